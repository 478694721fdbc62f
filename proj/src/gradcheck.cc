#include "survey/gradcheck.h"

#include <algorithm>
#include <cmath>

namespace survey::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport check_gradients(const std::function<Tensor()>& f,
                                std::span<NamedTensor> params,
                                const GradCheckOptions& options) {
  for (auto& p : params) p.tensor.zero_grad();
  backward(f());

  GradCheckReport report;
  for (auto& p : params) {
    GradCheckEntry entry{.name = p.name};
    const std::vector<double> analytic = p.tensor.grad();
    std::span<double> values = p.tensor.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double up = f().item();
      values[i] = saved - options.step;
      const double down = f().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double err = relative_error(analytic[i], numeric, options.denominator_floor);
      if (err > entry.max_relative_error || i == 0) {
        entry.max_relative_error = err;
        entry.worst_index = i;
        entry.analytic = analytic[i];
        entry.numeric = numeric;
      }
    }
    report.max_relative_error = std::max(report.max_relative_error, entry.max_relative_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

}  // namespace survey::nn
