#include "taxelgraph/diffcore/gradient_check.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace taxelgraph {

GradientCheckResult gradient_check(const DifferentiableFunction& function,
                                   std::span<const double> point, double step) {
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> analytic(x.size(), 0.0);
  function(x, analytic);

  GradientCheckResult result;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double original = x[i];
    x[i] = original + step;
    const double plus = function(x, {});
    x[i] = original - step;
    const double minus = function(x, {});
    x[i] = original;
    const double numeric = (plus - minus) / (2.0 * step);
    const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    if (err > result.max_relative_error || i == 0) {
      result.max_relative_error = std::max(result.max_relative_error, err);
      result.worst_index = i;
      result.analytic = analytic[i];
      result.numeric = numeric;
    }
  }
  return result;
}

}  // namespace taxelgraph
