#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "taxelgraph/baoding2d/env.h"
#include "taxelgraph/baoding2d/observation.h"
#include "taxelgraph/diffcore/adam.h"
#include "taxelgraph/perception/model.h"
#include "taxelgraph/ppo/policy.h"

namespace taxelgraph {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  std::size_t epochs_per_update = 4;
  std::size_t minibatch_size = 256;
  std::size_t rollout_length = 256;  // steps per environment per update
  std::size_t n_envs = 8;
  double entropy_coefficient = 0.0;
  double value_coefficient = 0.5;
  double learning_rate = 1e-3;
  // Rewards are multiplied by this before GAE; reported rewards are unscaled.
  double reward_scale = 0.01;
  // Global gradient-norm clip per minibatch; 0 disables.
  double max_grad_norm = 0.5;

  // Throws UsageError on out-of-range values.
  void validate() const;
};

// Settings used for desk-scale runs: the [64,64] networks train reliably
// across seeds at a lower step size.
PpoConfig desk_ppo_config();

struct Transition {
  std::vector<double> observation;  // policy features
  std::vector<double> action;       // unclamped sample
  double reward = 0.0;
  bool done = false;
  double value = 0.0;
  double log_prob = 0.0;
};

struct EpisodeRecord {
  double total_reward = 0.0;
  int steps = 0;
  Outcome outcome = Outcome::kRunning;
};

struct RolloutBuffer {
  std::size_t n_envs = 0;
  std::size_t rollout_length = 0;
  // Time-major: transition (t, e) lives at t * n_envs + e.
  std::vector<Transition> transitions;
  std::vector<double> bootstrap_values;  // value of each env's next observation
  std::vector<EpisodeRecord> episodes;   // episodes that ended during collection
  // Tactile frame of every observed state with its canonical disc label.
  std::vector<GraspSample> perception_samples;

  std::size_t size() const { return transitions.size(); }
};

// A fixed set of environments that keep running across rollouts and reset
// automatically. Environment e's episode j is seeded by (seed, e, j).
class VecEnv {
 public:
  VecEnv(std::size_t n_envs, TaskConfig task, DishGeometry geometry, ObservationMode mode,
         std::uint64_t seed);

  std::size_t size() const { return slots_.size(); }
  const ObservationMode& mode() const { return mode_; }
  // Swaps the observation mode (e.g. a retrained perception model) and
  // recomputes the pending observations.
  void set_mode(const ObservationMode& mode);
  const DishGeometry& geometry() const { return geometry_; }

  struct Slot;

 private:
  friend RolloutBuffer collect_rollouts(const PolicyParams&, VecEnv&, std::size_t, bool, bool,
                                        unsigned);
  void begin_episode(Slot& slot);
  void observe(Slot& slot);

  TaskConfig task_;
  DishGeometry geometry_;
  ObservationMode mode_;
  std::uint64_t seed_;
  std::vector<Slot> slots_;
};

struct VecEnv::Slot {
  std::size_t index = 0;
  BaodingEnv env;
  TactileReading tactile;
  std::vector<double> features;
  Rng action_rng;
  Rng observation_rng;
  std::uint64_t episode = 0;
  double episode_reward = 0.0;
};

// n_envs x rollout_length transitions. `deterministic` uses mean actions.
RolloutBuffer collect_rollouts(const PolicyParams& policy, VecEnv& envs,
                               std::size_t rollout_length, bool deterministic = false,
                               bool record_perception = false, unsigned threads = 1);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t,
// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}, returns = A + V.
// Rewards are multiplied by reward_scale first. Advantages are not normalized.
GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda,
                      double reward_scale = 1.0);

struct PpoLossTerms {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
};

// Loss over the transitions in `indices` (advantages already normalized).
// When `gradient` is non-null, d total / d params is added into it.
PpoLossTerms ppo_loss(const PolicyParams& policy, const RolloutBuffer& buffer,
                      std::span<const std::size_t> indices, std::span<const double> advantages,
                      std::span<const double> returns, const PpoConfig& config,
                      PolicyParams* gradient);

// Per-dimension normalization to mean 0, std 1 (population std, floored).
std::vector<double> normalize_advantages(std::span<const double> advantages);

struct UpdateDiagnostics {
  std::size_t update = 0;
  std::size_t env_steps = 0;
  double mean_reward = 0.0;   // mean return of episodes finished in the rollout
  double success_rate = 0.0;  // over the same episodes
  double surrogate = 0.0;     // minibatch means over the last epoch
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Epochs of shuffled minibatch Adam steps on the clipped objective. Throws
// NumericError (parameters untouched for that minibatch) on a non-finite loss.
UpdateDiagnostics ppo_update(PolicyParams& policy, AdamState& adam, const RolloutBuffer& buffer,
                             const PpoConfig& config, Rng& rng);

using UpdateCallback = std::function<void(const UpdateDiagnostics&, const RolloutBuffer&)>;

// `updates` rounds of collect + update. Returns one diagnostics row per update.
std::vector<UpdateDiagnostics> train_policy(PolicyParams& policy, AdamState& adam, VecEnv& envs,
                                            const PpoConfig& config, std::size_t updates,
                                            std::uint64_t seed, unsigned threads = 1,
                                            const UpdateCallback& on_update = {},
                                            bool record_perception = false);

struct PolicyEval {
  std::size_t episodes = 0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
  double mean_reward = 0.0;
};

// Mean actions, episode i seeded by (seed, i). Throws UsageError for 0 episodes.
PolicyEval evaluate_policy(const PolicyParams& policy, const TaskConfig& task,
                           const DishGeometry& geometry, const ObservationMode& mode,
                           std::size_t episodes, std::uint64_t seed, unsigned threads = 1);

// Runs `fn(i)` for i in [0, n) on up to `threads` workers, strided.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace taxelgraph
