#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace survey {

// All randomness in the project flows through this generator so that runs are
// reproducible from explicit seeds. The engine is std::mt19937_64, whose
// output sequence is fixed by the C++ standard. Everything layered on top
// (bounded integers, uniforms, normals, shuffles) is implemented here instead
// of using <random> distributions, whose algorithms are implementation
// defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound) by rejection sampling; bound > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Uniform double in [0, 1) built from the top 53 bits.
  double uniform();

  // Standard normal via Box-Muller (one value per call, the pair's second
  // value is discarded).
  double normal();

  // Normal(0, stddev) redrawn until |x| <= 2 * stddev.
  double truncated_normal(double stddev);

  // Fisher-Yates, walking i from n-1 down to 1 and swapping with
  // uniform_index(i + 1).
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace survey
