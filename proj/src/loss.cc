#include "taxelgraph/perception/loss.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace taxelgraph {

namespace {

void check_sizes(std::span<const double> prediction, std::span<const double> label) {
  if (prediction.size() != label.size() || prediction.empty()) {
    throw std::invalid_argument("rmse_loss: dimension mismatch (" +
                                std::to_string(prediction.size()) + " vs " +
                                std::to_string(label.size()) + ")");
  }
}

}  // namespace

double rmse_loss(std::span<const double> prediction, std::span<const double> label) {
  check_sizes(prediction, label);
  double sum = 0.0;
  for (std::size_t t = 0; t < prediction.size(); ++t) {
    const double d = prediction[t] - label[t];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(prediction.size()));
}

std::vector<double> rmse_loss_gradient(std::span<const double> prediction,
                                       std::span<const double> label) {
  const double loss = rmse_loss(prediction, label);
  std::vector<double> grad(prediction.size(), 0.0);
  if (loss == 0.0) return grad;
  const double scale = 1.0 / (static_cast<double>(prediction.size()) * loss);
  for (std::size_t t = 0; t < prediction.size(); ++t) grad[t] = (prediction[t] - label[t]) * scale;
  return grad;
}

}  // namespace taxelgraph
