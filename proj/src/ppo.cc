#include "taxelgraph/ppo/ppo.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "taxelgraph/errors.h"

namespace taxelgraph {

namespace {

std::uint64_t episode_seed(std::uint64_t seed, std::size_t env, std::uint64_t episode) {
  return derive_seed(derive_seed(seed, env), episode);
}

Matrix gather_rows(const RolloutBuffer& buffer, std::span<const std::size_t> indices) {
  const std::size_t width = buffer.transitions[indices[0]].observation.size();
  Matrix m(indices.size(), width);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& obs = buffer.transitions[indices[i]].observation;
    std::copy(obs.begin(), obs.end(), m.row(i).begin());
  }
  return m;
}

}  // namespace

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw UsageError("gamma must be in (0, 1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) throw UsageError("gae_lambda must be in (0, 1]");
  if (!(clip_epsilon > 0.0)) throw UsageError("clip_epsilon must be > 0");
  if (minibatch_size == 0) throw UsageError("minibatch_size must be >= 1");
  if (n_envs == 0) throw UsageError("n_envs must be >= 1");
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be > 0");
  if (!(reward_scale > 0.0)) throw UsageError("reward_scale must be > 0");
  if (entropy_coefficient < 0.0 || value_coefficient < 0.0 || max_grad_norm < 0.0) {
    throw UsageError("loss coefficients and max_grad_norm must be >= 0");
  }
}

PpoConfig desk_ppo_config() {
  PpoConfig c;
  c.learning_rate = 3e-4;
  return c;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

VecEnv::VecEnv(std::size_t n_envs, TaskConfig task, DishGeometry geometry, ObservationMode mode,
               std::uint64_t seed)
    : task_(task), geometry_(geometry), mode_(mode), seed_(seed) {
  if (n_envs == 0) throw UsageError("need at least one environment");
  slots_.reserve(n_envs);
  for (std::size_t e = 0; e < n_envs; ++e) {
    slots_.push_back(Slot{e, BaodingEnv(task_, geometry_), {}, {},
                          make_rng(derive_seed(seed, e), 0xAC7),
                          make_rng(derive_seed(seed, e), 0x0B5)});
    begin_episode(slots_.back());
  }
}

void VecEnv::set_mode(const ObservationMode& mode) {
  mode_ = mode;
  for (Slot& s : slots_) observe(s);
}

void VecEnv::begin_episode(Slot& slot) {
  slot.tactile = slot.env.reset(episode_seed(seed_, slot.index, slot.episode));
  slot.episode_reward = 0.0;
  observe(slot);
}

void VecEnv::observe(Slot& slot) {
  slot.features = policy_features(
      make_observation(slot.env.state(), slot.tactile, mode_, slot.observation_rng), geometry_);
}

RolloutBuffer collect_rollouts(const PolicyParams& policy, VecEnv& envs,
                               std::size_t rollout_length, bool deterministic,
                               bool record_perception, unsigned threads) {
  const std::size_t n = envs.size();
  RolloutBuffer buffer;
  buffer.n_envs = n;
  buffer.rollout_length = rollout_length;
  buffer.transitions.resize(n * rollout_length);
  buffer.bootstrap_values.assign(n, 0.0);
  std::vector<std::vector<EpisodeRecord>> episodes(n);
  std::vector<std::vector<GraspSample>> samples(n);

  parallel_for(n, threads, [&](std::size_t e) {
    VecEnv::Slot& slot = envs.slots_[e];
    for (std::size_t t = 0; t < rollout_length; ++t) {
      Transition& tr = buffer.transitions[t * n + e];
      if (record_perception) samples[e].push_back(perception_sample(slot.tactile, slot.env.state()));
      const std::vector<double> mean = action_mean(policy, slot.features);
      tr.observation = slot.features;
      tr.action = deterministic ? mean : sample_action(mean, policy.log_std, slot.action_rng);
      tr.log_prob = gaussian_log_prob(mean, policy.log_std, tr.action);
      tr.value = state_value(policy, slot.features);
      StepResult step = slot.env.step(tr.action);
      tr.reward = step.reward.total;
      tr.done = step.done;
      slot.episode_reward += tr.reward;
      slot.tactile = std::move(step.tactile);
      if (step.done) {
        episodes[e].push_back({slot.episode_reward, slot.env.state().step_count, step.outcome});
        ++slot.episode;
        envs.begin_episode(slot);
      } else {
        envs.observe(slot);
      }
    }
    buffer.bootstrap_values[e] = state_value(policy, slot.features);
  });

  for (std::size_t e = 0; e < n; ++e) {
    buffer.episodes.insert(buffer.episodes.end(), episodes[e].begin(), episodes[e].end());
    for (auto& s : samples[e]) buffer.perception_samples.push_back(std::move(s));
  }
  return buffer;
}

GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda,
                      double reward_scale) {
  const std::size_t n = buffer.n_envs, T = buffer.rollout_length;
  if (buffer.transitions.size() != n * T || buffer.bootstrap_values.size() != n) {
    throw std::invalid_argument("compute_gae: buffer shape mismatch");
  }
  GaeResult g;
  g.advantages.assign(n * T, 0.0);
  g.returns.assign(n * T, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    double next_value = buffer.bootstrap_values[e];
    double next_advantage = 0.0;
    for (std::size_t t = T; t-- > 0;) {
      const Transition& tr = buffer.transitions[t * n + e];
      const double live = tr.done ? 0.0 : 1.0;
      const double delta = reward_scale * tr.reward + gamma * next_value * live - tr.value;
      const double a = delta + gamma * lambda * live * next_advantage;
      g.advantages[t * n + e] = a;
      g.returns[t * n + e] = a + tr.value;
      next_value = tr.value;
      next_advantage = a;
    }
  }
  return g;
}

std::vector<double> normalize_advantages(std::span<const double> advantages) {
  std::vector<double> out(advantages.begin(), advantages.end());
  if (out.empty()) return out;
  const double n = static_cast<double>(out.size());
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
  double var = 0.0;
  for (double a : out) var += (a - mean) * (a - mean);
  const double std = std::sqrt(var / n);
  for (double& a : out) a = (a - mean) / std::max(std, 1e-8);
  return out;
}

PpoLossTerms ppo_loss(const PolicyParams& policy, const RolloutBuffer& buffer,
                      std::span<const std::size_t> indices, std::span<const double> advantages,
                      std::span<const double> returns, const PpoConfig& config,
                      PolicyParams* gradient) {
  PpoLossTerms terms;
  if (indices.empty()) return terms;
  const std::size_t B = indices.size();
  const double inv_b = 1.0 / static_cast<double>(B);
  const Matrix obs = gather_rows(buffer, indices);
  const MlpForward actor = mlp_forward(policy.actor, obs);
  const MlpForward critic = mlp_forward(policy.critic, obs);
  const auto log_std = policy.log_std.values();

  Matrix mean_grad(B, kActionDim, 0.0);
  Matrix value_grad(B, 1, 0.0);
  std::vector<double> log_std_grad(kActionDim, 0.0);
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < B; ++i) {
    const Transition& tr = buffer.transitions[indices[i]];
    const double adv = advantages[indices[i]];
    double logp = 0.0;
    std::array<double, kActionDim> z{};
    for (std::size_t d = 0; d < kActionDim; ++d) {
      const double mean = actor.output(i, d) + kActionCenter;
      z[d] = (tr.action[d] - mean) * std::exp(-log_std[d]);
      logp += -0.5 * z[d] * z[d] - log_std[d] - 0.91893853320467274178;
    }
    const double ratio = std::exp(logp - tr.log_prob);
    const double clipped_ratio =
        std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon);
    if (std::abs(ratio - 1.0) > config.clip_epsilon) ++clipped;
    const bool unclipped_branch = ratio * adv <= clipped_ratio * adv;
    terms.surrogate -= inv_b * std::min(ratio * adv, clipped_ratio * adv);
    // d surrogate / d logp, zero where the clipped constant is selected.
    const double dlogp = unclipped_branch ? -inv_b * ratio * adv : 0.0;
    for (std::size_t d = 0; d < kActionDim; ++d) {
      mean_grad(i, d) = dlogp * z[d] * std::exp(-log_std[d]);
      log_std_grad[d] += dlogp * (z[d] * z[d] - 1.0);
    }
    const double err = critic.output(i, 0) - returns[indices[i]];
    terms.value_loss += inv_b * err * err;
    value_grad(i, 0) = config.value_coefficient * 2.0 * inv_b * err;
  }
  terms.entropy = gaussian_entropy(policy.log_std);
  terms.total = terms.surrogate + config.value_coefficient * terms.value_loss -
                config.entropy_coefficient * terms.entropy;
  terms.clip_fraction = static_cast<double>(clipped) * inv_b;
  if (!std::isfinite(terms.total)) {
    throw NumericError("non-finite PPO loss (surrogate " + std::to_string(terms.surrogate) +
                       ", value loss " + std::to_string(terms.value_loss) + ", entropy " +
                       std::to_string(terms.entropy) + ")");
  }
  if (gradient != nullptr) {
    mlp_backward(policy.actor, actor.cache, mean_grad, gradient->actor);
    mlp_backward(policy.critic, critic.cache, value_grad, gradient->critic);
    for (std::size_t d = 0; d < kActionDim; ++d) {
      gradient->log_std.values()[d] += log_std_grad[d] - config.entropy_coefficient;
    }
  }
  return terms;
}

UpdateDiagnostics ppo_update(PolicyParams& policy, AdamState& adam, const RolloutBuffer& buffer,
                             const PpoConfig& config, Rng& rng) {
  config.validate();
  adam.config.learning_rate = config.learning_rate;
  UpdateDiagnostics diag;
  diag.env_steps = buffer.size();
  if (!buffer.episodes.empty()) {
    double reward = 0.0, success = 0.0;
    for (const auto& ep : buffer.episodes) {
      reward += ep.total_reward;
      success += ep.outcome == Outcome::kSuccess ? 1.0 : 0.0;
    }
    diag.mean_reward = reward / static_cast<double>(buffer.episodes.size());
    diag.success_rate = success / static_cast<double>(buffer.episodes.size());
  } else {
    diag.mean_reward = std::numeric_limits<double>::quiet_NaN();
    diag.success_rate = std::numeric_limits<double>::quiet_NaN();
  }
  if (buffer.size() == 0) return diag;

  const GaeResult gae = compute_gae(buffer, config.gamma, config.gae_lambda, config.reward_scale);
  const std::vector<double> advantages = normalize_advantages(gae.advantages);
  std::vector<std::size_t> order(buffer.size());
  std::iota(order.begin(), order.end(), 0);
  PolicyParams gradient = zeros_like(policy);
  const TensorList grad_tensors = gradient.tensors();

  for (std::size_t epoch = 0; epoch < config.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    PpoLossTerms sums;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.minibatch_size) {
      const std::size_t end = std::min(order.size(), start + config.minibatch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      zero_all(grad_tensors);
      const PpoLossTerms t = ppo_loss(policy, buffer, idx, advantages, gae.returns, config, &gradient);
      if (config.max_grad_norm > 0.0) {
        const double norm = global_norm(const_view(grad_tensors));
        if (norm > config.max_grad_norm) scale_all(grad_tensors, config.max_grad_norm / norm);
      }
      adam_step(policy.tensors(), const_view(grad_tensors), adam);
      sums.surrogate += t.surrogate;
      sums.value_loss += t.value_loss;
      sums.entropy += t.entropy;
      sums.clip_fraction += t.clip_fraction;
      ++batches;
    }
    const double inv = 1.0 / static_cast<double>(batches);
    diag.surrogate = sums.surrogate * inv;
    diag.value_loss = sums.value_loss * inv;
    diag.entropy = sums.entropy * inv;
    diag.clip_fraction = sums.clip_fraction * inv;
  }
  return diag;
}

std::vector<UpdateDiagnostics> train_policy(PolicyParams& policy, AdamState& adam, VecEnv& envs,
                                            const PpoConfig& config, std::size_t updates,
                                            std::uint64_t seed, unsigned threads,
                                            const UpdateCallback& on_update,
                                            bool record_perception) {
  config.validate();
  if (envs.size() != config.n_envs) throw UsageError("VecEnv size differs from n_envs");
  std::vector<UpdateDiagnostics> history;
  for (std::size_t u = 0; u < updates; ++u) {
    const RolloutBuffer buffer =
        collect_rollouts(policy, envs, config.rollout_length, false, record_perception, threads);
    Rng rng = make_rng(seed, 0x9F0 + adam.step_count);
    UpdateDiagnostics diag = ppo_update(policy, adam, buffer, config, rng);
    diag.update = history.size();
    history.push_back(diag);
    if (on_update) on_update(diag, buffer);
  }
  return history;
}

PolicyEval evaluate_policy(const PolicyParams& policy, const TaskConfig& task,
                           const DishGeometry& geometry, const ObservationMode& mode,
                           std::size_t episodes, std::uint64_t seed, unsigned threads) {
  if (episodes == 0) throw UsageError("evaluation needs at least one episode");
  if (policy.observation_width() != observation_width(mode.kind)) {
    throw UsageError("policy input width does not match the observation mode");
  }
  std::vector<EpisodeRecord> records(episodes);
  parallel_for(episodes, threads, [&](std::size_t i) {
    BaodingEnv env(task, geometry);
    TactileReading tactile = env.reset(derive_seed(seed, i));
    Rng obs_rng = make_rng(derive_seed(seed, i), 0x0B5);
    EpisodeRecord rec;
    while (true) {
      const auto features =
          policy_features(make_observation(env.state(), tactile, mode, obs_rng), geometry);
      StepResult step = env.step(action_mean(policy, features));
      rec.total_reward += step.reward.total;
      tactile = std::move(step.tactile);
      if (step.done) {
        rec.outcome = step.outcome;
        rec.steps = env.state().step_count;
        break;
      }
    }
    records[i] = rec;
  });
  PolicyEval out;
  out.episodes = episodes;
  for (const auto& r : records) {
    out.success_rate += r.outcome == Outcome::kSuccess ? 1.0 : 0.0;
    out.mean_steps += r.steps;
    out.mean_reward += r.total_reward;
  }
  const double n = static_cast<double>(episodes);
  out.success_rate /= n;
  out.mean_steps /= n;
  out.mean_reward /= n;
  return out;
}

}  // namespace taxelgraph
