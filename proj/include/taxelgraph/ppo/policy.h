#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "taxelgraph/diffcore/checkpoint.h"
#include "taxelgraph/diffcore/mlp.h"
#include "taxelgraph/rng.h"

namespace taxelgraph {

inline constexpr std::size_t kActionDim = 4;
// Policy means are kActionCenter + actor output, so a zero actor sits mid-range.
inline constexpr double kActionCenter = 0.5;

// Gaussian policy with a state-independent learnable log-std, plus a separate
// value network.
struct PolicyParams {
  MlpParams actor;   // obs -> kActionDim
  Matrix log_std;    // 1 x kActionDim
  MlpParams critic;  // obs -> 1

  std::size_t observation_width() const { return actor.input_width(); }
  void append_tensors(TensorList& out);
  void append_tensors(ConstTensorList& out) const;
  TensorList tensors();
  ConstTensorList tensors() const;

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

inline const std::vector<std::size_t> kDeskPolicyHidden = {64, 64};
inline const std::vector<std::size_t> kFullScalePolicyHidden = {512, 256, 128};

// Kaiming-initialized hidden layers; the actor's output layer is scaled by
// 0.01 so initial means start near kActionCenter.
PolicyParams init_policy(std::size_t observation_width, std::span<const std::size_t> hidden,
                         std::uint64_t seed, double initial_log_std = -0.7);
PolicyParams zeros_like(const PolicyParams& params);

std::vector<double> action_mean(const PolicyParams& params, std::span<const double> features);
double state_value(const PolicyParams& params, std::span<const double> features);

double gaussian_log_prob(std::span<const double> mean, const Matrix& log_std,
                         std::span<const double> action);
double gaussian_entropy(const Matrix& log_std);
std::vector<double> sample_action(std::span<const double> mean, const Matrix& log_std, Rng& rng);

Checkpoint policy_checkpoint(const PolicyParams& params,
                             std::vector<std::pair<std::string, std::string>> meta = {});
PolicyParams policy_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace taxelgraph
