#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "taxelgraph/baoding2d/env.h"
#include "taxelgraph/baoding2d/observation.h"
#include "taxelgraph/perception/model.h"
#include "taxelgraph/perception/training.h"
#include "taxelgraph/ppo/ppo.h"

namespace taxelgraph {

// FIFO of (tactile frame, true disc state) pairs.
class PerceptionBuffer {
 public:
  explicit PerceptionBuffer(std::size_t capacity);

  void push(GraspSample sample);
  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t evicted() const { return evicted_; }
  // Oldest first.
  std::vector<GraspSample> snapshot() const;

 private:
  std::size_t capacity_;
  std::size_t evicted_ = 0;
  std::deque<GraspSample> samples_;
};

struct WorkflowConfig {
  ModelKind perception_kind = ModelKind::kTacGnn;
  std::size_t buffer_threshold = 5000;  // buffer capacity is twice this
  std::size_t perception_epochs = 10;
  std::size_t max_outer_iterations = 4;
  std::size_t policy_updates_per_iteration = 100;
  std::vector<std::size_t> policy_hidden = kDeskPolicyHidden;
  PpoConfig ppo = desk_ppo_config();
  TaskConfig task;
  DishGeometry geometry;
  std::size_t perception_batch_size = 32;
  double perception_learning_rate = 1e-3;
  double perception_train_fraction = 0.8;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  unsigned threads = 1;

  // Throws UsageError.
  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  std::size_t env_steps = 0;  // cumulative
  double mean_reward = 0.0;   // over episodes finished during this RL stage
  double success_rate = 0.0;
  std::size_t buffer_size = 0;
  bool perception_retrained = false;
  // Perception rmse on the buffer's train / held-out split after retraining,
  // in cm. NaN when not retrained.
  double perception_train_cm = 0.0;
  double perception_test_cm = 0.0;
};

struct WorkflowResult {
  std::unique_ptr<PerceptionModel> perception;
  PolicyParams policy;
  std::vector<IterationRecord> history;
  std::vector<UpdateDiagnostics> updates;
};

struct WorkflowHooks {
  // Called after every RL stage with the perception model that stage used.
  std::function<void(std::size_t iteration, const PerceptionModel&)> after_rl_stage;
  std::function<void(const IterationRecord&)> on_iteration;
};

// Perception starts from Kaiming init and is frozen while PPO runs with
// observations predicted from the tactile frames; every recorded frame goes
// into the buffer; when it holds >= threshold samples the perception model is
// trained for perception_epochs on a snapshot. Repeats max_outer_iterations
// times.
WorkflowResult run_alternating_training(const WorkflowConfig& config, std::uint64_t seed,
                                        const WorkflowHooks& hooks = {});

// Policy-only training (no alternating perception) for a fixed observation
// mode, using the same budget: max_outer_iterations x policy_updates_per_iteration.
WorkflowResult run_policy_training(const WorkflowConfig& config, const ObservationMode& mode,
                                   std::uint64_t seed);

struct BaselineRow {
  ModelKind kind = ModelKind::kTacGnn;
  std::uint64_t seed = 0;
  EvalMetrics train;
  EvalMetrics test;
};

struct BaselineBudget {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double train_fraction = 0.8;
};

// Every kind gets the same split, epochs, batch size and learning rate for a
// given seed; the seed also drives initialization.
std::vector<BaselineRow> run_baseline_comparison(std::span<const GraspSample> samples,
                                                 const ModelSpec& base_spec,
                                                 std::span<const ModelKind> kinds,
                                                 const BaselineBudget& budget,
                                                 std::span<const std::uint64_t> seeds,
                                                 unsigned threads = 1);

struct LevelRow {
  TaskLevel level = TaskLevel::kSimple;
  std::uint64_t seed = 0;
  PolicyEval eval;
};

// Evaluation only. Throws UsageError for 0 episodes.
std::vector<LevelRow> run_task_levels(const PolicyParams& policy, const DishGeometry& geometry,
                                      const ObservationMode& mode,
                                      std::span<const TaskLevel> levels, std::size_t episodes,
                                      std::span<const std::uint64_t> seeds, unsigned threads = 1);

struct AblationCurve {
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<UpdateDiagnostics> updates;
  // Mean of the last `final_window` updates' mean_reward.
  double final_reward = 0.0;
};

// One policy per (mode, seed) with identical budgets. The "perception" mode
// runs the alternating workflow; the others train the policy directly.
std::vector<AblationCurve> run_input_ablations(const WorkflowConfig& config,
                                               std::span<const std::string> modes,
                                               std::size_t final_window = 10);

}  // namespace taxelgraph
