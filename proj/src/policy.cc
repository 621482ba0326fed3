#include "taxelgraph/ppo/policy.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "taxelgraph/errors.h"
#include "taxelgraph/numeric_text.h"

namespace taxelgraph {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

std::vector<std::size_t> widths(std::size_t in, std::span<const std::size_t> hidden,
                                std::size_t out) {
  std::vector<std::size_t> w = {in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

std::string join_sizes(const std::vector<std::size_t>& sizes) {
  std::string s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0) s += ',';
    s += std::to_string(sizes[i]);
  }
  return s;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const auto v = parse_int(std::string_view(text).substr(start, end - start));
    if (v <= 0) throw DataError("bad layer size in policy checkpoint");
    out.push_back(static_cast<std::size_t>(v));
    start = end + 1;
  }
  return out;
}

}  // namespace

void PolicyParams::append_tensors(TensorList& out) {
  actor.append_tensors("actor", out);
  out.push_back({"log_std", &log_std});
  critic.append_tensors("critic", out);
}

void PolicyParams::append_tensors(ConstTensorList& out) const {
  actor.append_tensors("actor", out);
  out.push_back({"log_std", &log_std});
  critic.append_tensors("critic", out);
}

TensorList PolicyParams::tensors() {
  TensorList t;
  append_tensors(t);
  return t;
}

ConstTensorList PolicyParams::tensors() const {
  ConstTensorList t;
  append_tensors(t);
  return t;
}

PolicyParams init_policy(std::size_t observation_width, std::span<const std::size_t> hidden,
                         std::uint64_t seed, double initial_log_std) {
  if (observation_width == 0) throw std::invalid_argument("policy needs a non-empty observation");
  PolicyParams p;
  p.actor = kaiming_init(widths(observation_width, hidden, kActionDim), derive_seed(seed, 1));
  for (double& w : p.actor.weights.back().values()) w *= 0.01;
  p.log_std = Matrix(1, kActionDim, initial_log_std);
  p.critic = kaiming_init(widths(observation_width, hidden, 1), derive_seed(seed, 2));
  return p;
}

PolicyParams zeros_like(const PolicyParams& params) {
  return {zeros_like(params.actor), Matrix(1, kActionDim, 0.0), zeros_like(params.critic)};
}

std::vector<double> action_mean(const PolicyParams& params, std::span<const double> features) {
  const Matrix out = mlp_apply(params.actor, Matrix::row_vector(features));
  std::vector<double> mean(out.values().begin(), out.values().end());
  for (double& m : mean) m += kActionCenter;
  return mean;
}

double state_value(const PolicyParams& params, std::span<const double> features) {
  return mlp_apply(params.critic, Matrix::row_vector(features))(0, 0);
}

double gaussian_log_prob(std::span<const double> mean, const Matrix& log_std,
                         std::span<const double> action) {
  if (mean.size() != action.size() || log_std.size() != action.size()) {
    throw std::invalid_argument("gaussian_log_prob: dimension mismatch");
  }
  double lp = 0.0;
  for (std::size_t d = 0; d < action.size(); ++d) {
    const double z = (action[d] - mean[d]) * std::exp(-log_std.values()[d]);
    lp += -0.5 * z * z - log_std.values()[d] - kHalfLog2Pi;
  }
  return lp;
}

double gaussian_entropy(const Matrix& log_std) {
  double h = 0.0;
  for (double ls : log_std.values()) h += ls + 0.5 + kHalfLog2Pi;
  return h;
}

std::vector<double> sample_action(std::span<const double> mean, const Matrix& log_std, Rng& rng) {
  std::vector<double> a(mean.begin(), mean.end());
  for (std::size_t d = 0; d < a.size(); ++d) a[d] += std::exp(log_std.values()[d]) * standard_normal(rng);
  return a;
}

Checkpoint policy_checkpoint(const PolicyParams& params,
                             std::vector<std::pair<std::string, std::string>> meta) {
  meta.insert(meta.begin(), {"kind", "policy"});
  meta.insert(meta.begin() + 1, {"actor_layers", join_sizes(params.actor.layer_sizes)});
  meta.insert(meta.begin() + 2, {"critic_layers", join_sizes(params.critic.layer_sizes)});
  return make_checkpoint(params.tensors(), std::move(meta));
}

PolicyParams policy_from_checkpoint(const Checkpoint& checkpoint) {
  if (checkpoint.meta_value("kind") != "policy") throw DataError("checkpoint is not a policy");
  PolicyParams p;
  p.actor = zero_mlp(parse_sizes(checkpoint.meta_value("actor_layers")));
  p.critic = zero_mlp(parse_sizes(checkpoint.meta_value("critic_layers")));
  if (p.actor.output_width() != kActionDim || p.critic.output_width() != 1 ||
      p.actor.input_width() != p.critic.input_width()) {
    throw DataError("policy checkpoint has inconsistent layer sizes");
  }
  p.log_std = Matrix(1, kActionDim, 0.0);
  restore_tensors(checkpoint, p.tensors());
  return p;
}

}  // namespace taxelgraph
