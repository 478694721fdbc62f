#include "survey/param_file.h"

#include <bit>
#include <cstring>

#include "survey/errors.h"
#include "survey/io.h"

namespace survey::nn {
namespace {

constexpr std::string_view kMagic = "SVYPARAM";

template <typename T>
void put(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

class Cursor {
 public:
  explicit Cursor(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("parameter file truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_params(std::span<const NamedTensor> tensors, std::string_view metadata) {
  std::string out(kMagic);
  put<std::uint32_t>(out, kParamFileVersion);
  put<std::uint64_t>(out, metadata.size());
  out.append(metadata);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (const std::size_t d : tensor.shape()) put<std::uint64_t>(out, d);
    for (const double v : tensor.values()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ParamFile deserialize_params(std::string_view bytes) {
  Cursor in(bytes);
  if (in.take(kMagic.size()) != kMagic) throw IoError("not a parameter file (bad magic)");
  const auto version = in.get<std::uint32_t>();
  if (version != kParamFileVersion) {
    throw IoError("unsupported parameter file version " + std::to_string(version));
  }
  ParamFile file;
  file.metadata = std::string(in.take(in.get<std::uint64_t>()));
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name(in.take(in.get<std::uint32_t>()));
    const auto rank = in.get<std::uint32_t>();
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(in.get<std::uint64_t>());
    if (shape_size(shape) > in.remaining() / sizeof(double)) {
      throw IoError("parameter file truncated in tensor \"" + name + "\"");
    }
    std::vector<double> values(shape_size(shape));
    for (double& v : values) v = std::bit_cast<double>(in.get<std::uint64_t>());
    file.tensors.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  if (!in.at_end()) throw IoError("trailing bytes after parameter file");
  return file;
}

void save_params(const std::filesystem::path& path, std::span<const NamedTensor> tensors,
                 std::string_view metadata) {
  io::write_file_atomic(path, serialize_params(tensors, metadata));
}

ParamFile load_params(const std::filesystem::path& path) {
  return deserialize_params(io::read_file(path));
}

}  // namespace survey::nn
