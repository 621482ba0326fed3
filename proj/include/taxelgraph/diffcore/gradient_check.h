#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace taxelgraph {

// Scalar function of a flat parameter vector. When `gradient` is non-empty
// the function also writes its analytic gradient there.
using DifferentiableFunction =
    std::function<double(std::span<const double> point, std::span<double> gradient)>;

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares the analytic gradient against central differences:
//   max_i |analytic_i - numeric_i| / max(1, |analytic_i|)
GradientCheckResult gradient_check(const DifferentiableFunction& function,
                                   std::span<const double> point, double step = 1e-5);

}  // namespace taxelgraph
