#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "survey/tensor.h"

namespace survey::nn {

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-4;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor);
  // the floor keeps coordinates whose true gradient is ~0 from dividing
  // rounding noise by zero.
  double denominator_floor = 1e-6;
};

struct GradCheckEntry {
  std::string name;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;  // one per parameter tensor
  double max_relative_error = 0.0;
  bool passed = false;
};

double relative_error(double analytic, double numeric, double floor);

// Compares backward() gradients of f() against central differences
// (f(p + h) - f(p - h)) / 2h for every coordinate of every parameter. f must
// be deterministic and return a scalar built from the parameters. Parameter
// values are restored afterwards; their grads are left holding the analytic
// gradient.
GradCheckReport check_gradients(const std::function<Tensor()>& f,
                                std::span<NamedTensor> params,
                                const GradCheckOptions& options = {});

}  // namespace survey::nn
