#pragma once

#include <span>
#include <vector>

namespace taxelgraph {

// sqrt(sum((p - l)^2) / T) over T = prediction.size() entries.
double rmse_loss(std::span<const double> prediction, std::span<const double> label);

// d rmse / d prediction. At zero loss the gradient is defined as zero.
std::vector<double> rmse_loss_gradient(std::span<const double> prediction,
                                       std::span<const double> label);

}  // namespace taxelgraph
