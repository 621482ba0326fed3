#include "taxelgraph/workflow/workflow.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "taxelgraph/errors.h"

namespace taxelgraph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct EpisodeStats {
  double mean_reward = kNaN;
  double success_rate = kNaN;
};

EpisodeStats summarize(const std::vector<EpisodeRecord>& episodes) {
  EpisodeStats s;
  if (episodes.empty()) return s;
  double reward = 0.0;
  std::size_t wins = 0;
  for (const auto& e : episodes) {
    reward += e.total_reward;
    if (e.outcome == Outcome::kSuccess) ++wins;
  }
  s.mean_reward = reward / static_cast<double>(episodes.size());
  s.success_rate = static_cast<double>(wins) / static_cast<double>(episodes.size());
  return s;
}

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stream) { return derive_seed(seed, stream); }

}  // namespace

PerceptionBuffer::PerceptionBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("perception buffer capacity must be positive");
}

void PerceptionBuffer::push(GraspSample sample) {
  if (samples_.size() == capacity_) {
    samples_.pop_front();
    ++evicted_;
  }
  samples_.push_back(std::move(sample));
}

std::vector<GraspSample> PerceptionBuffer::snapshot() const {
  return {samples_.begin(), samples_.end()};
}

void WorkflowConfig::validate() const {
  if (buffer_threshold < 1) throw UsageError("buffer_threshold must be at least 1");
  if (policy_updates_per_iteration < 1) {
    throw UsageError("policy_updates_per_iteration must be at least 1");
  }
  if (seeds.empty()) throw UsageError("at least one seed is required");
  if (perception_batch_size < 1) throw UsageError("perception batch size must be at least 1");
  if (!(perception_learning_rate > 0.0)) throw UsageError("perception learning rate must be positive");
  if (!(perception_train_fraction > 0.0 && perception_train_fraction < 1.0)) {
    throw UsageError("perception train fraction must lie in (0, 1)");
  }
  ppo.validate();
}

WorkflowResult run_alternating_training(const WorkflowConfig& config, std::uint64_t seed,
                                        const WorkflowHooks& hooks) {
  config.validate();
  WorkflowResult result;
  result.perception = PerceptionModel::create(
      baoding_perception_spec(config.perception_kind, config.geometry), stage_seed(seed, 11));
  ObservationMode mode{ObservationKind::kPerception, 0.0, result.perception.get()};
  result.policy = init_policy(observation_width(mode.kind), config.policy_hidden, stage_seed(seed, 12));
  if (config.max_outer_iterations == 0) return result;

  AdamState policy_adam;
  AdamState perception_adam;
  VecEnv envs(config.ppo.n_envs, config.task, config.geometry, mode, stage_seed(seed, 13));
  PerceptionBuffer buffer(2 * config.buffer_threshold);
  std::size_t env_steps = 0;

  for (std::size_t it = 1; it <= config.max_outer_iterations; ++it) {
    std::vector<EpisodeRecord> episodes;
    auto stage = train_policy(
        result.policy, policy_adam, envs, config.ppo, config.policy_updates_per_iteration,
        stage_seed(seed, 14), config.threads,
        [&](const UpdateDiagnostics&, const RolloutBuffer& rollout) {
          for (const auto& s : rollout.perception_samples) buffer.push(s);
          episodes.insert(episodes.end(), rollout.episodes.begin(), rollout.episodes.end());
        },
        true);
    for (auto& d : stage) {
      env_steps += d.env_steps;
      d.update = result.updates.size();
      d.env_steps = env_steps;
      result.updates.push_back(d);
    }
    if (hooks.after_rl_stage) hooks.after_rl_stage(it, *result.perception);

    IterationRecord rec;
    rec.iteration = it;
    rec.env_steps = env_steps;
    const EpisodeStats stats = summarize(episodes);
    rec.mean_reward = stats.mean_reward;
    rec.success_rate = stats.success_rate;
    rec.buffer_size = buffer.size();
    rec.perception_train_cm = kNaN;
    rec.perception_test_cm = kNaN;
    if (buffer.size() >= config.buffer_threshold) {
      const std::vector<GraspSample> data = buffer.snapshot();
      TrainConfig tc;
      tc.epochs = config.perception_epochs;
      tc.batch_size = config.perception_batch_size;
      tc.learning_rate = config.perception_learning_rate;
      tc.train_fraction = config.perception_train_fraction;
      tc.seed = stage_seed(seed, 100 + it);
      const TrainReport report = train_perception(*result.perception, data, tc, &perception_adam);
      const EpochReport& last = report.epochs.empty() ? report.initial : report.epochs.back();
      rec.perception_retrained = true;
      rec.perception_train_cm = last.train.position_cm;
      rec.perception_test_cm = last.test.position_cm;
      // Same model object, new weights: recompute the pending observations.
      envs.set_mode(mode);
    }
    result.history.push_back(rec);
    if (hooks.on_iteration) hooks.on_iteration(rec);
  }
  return result;
}

WorkflowResult run_policy_training(const WorkflowConfig& config, const ObservationMode& mode,
                                   std::uint64_t seed) {
  config.validate();
  WorkflowResult result;
  result.policy = init_policy(observation_width(mode.kind), config.policy_hidden, stage_seed(seed, 12));
  if (config.max_outer_iterations == 0) return result;
  AdamState adam;
  VecEnv envs(config.ppo.n_envs, config.task, config.geometry, mode, stage_seed(seed, 13));
  const std::size_t updates = config.max_outer_iterations * config.policy_updates_per_iteration;
  result.updates = train_policy(result.policy, adam, envs, config.ppo, updates,
                                stage_seed(seed, 14), config.threads);
  std::size_t env_steps = 0;
  for (auto& d : result.updates) {
    env_steps += d.env_steps;
    d.env_steps = env_steps;
  }
  return result;
}

std::vector<BaselineRow> run_baseline_comparison(std::span<const GraspSample> samples,
                                                 const ModelSpec& base_spec,
                                                 std::span<const ModelKind> kinds,
                                                 const BaselineBudget& budget,
                                                 std::span<const std::uint64_t> seeds,
                                                 unsigned threads) {
  if (samples.size() < 2) throw UsageError("baseline comparison needs at least two samples");
  if (kinds.empty() || seeds.empty()) throw UsageError("baseline comparison needs kinds and seeds");
  struct Job {
    ModelKind kind;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::uint64_t s : seeds) {
    for (ModelKind k : kinds) jobs.push_back({k, s});
  }
  std::vector<BaselineRow> rows(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    ModelSpec spec = base_spec;
    spec.kind = jobs[j].kind;
    auto model = PerceptionModel::create(spec, derive_seed(jobs[j].seed, 21));
    const DatasetSplit split =
        split_dataset(samples.size(), budget.train_fraction, derive_seed(jobs[j].seed, 22));
    TrainConfig tc;
    tc.epochs = budget.epochs;
    tc.batch_size = budget.batch_size;
    tc.learning_rate = budget.learning_rate;
    tc.train_fraction = budget.train_fraction;
    tc.seed = derive_seed(jobs[j].seed, 23);
    const TrainReport report = train_perception(*model, samples, split, tc);
    const EpochReport& last = report.epochs.empty() ? report.initial : report.epochs.back();
    rows[j] = {jobs[j].kind, jobs[j].seed, last.train, last.test};
  });
  return rows;
}

std::vector<LevelRow> run_task_levels(const PolicyParams& policy, const DishGeometry& geometry,
                                      const ObservationMode& mode,
                                      std::span<const TaskLevel> levels, std::size_t episodes,
                                      std::span<const std::uint64_t> seeds, unsigned threads) {
  if (episodes == 0) throw UsageError("task evaluation needs at least one episode");
  if (levels.empty() || seeds.empty()) throw UsageError("task evaluation needs levels and seeds");
  std::vector<LevelRow> rows;
  for (TaskLevel level : levels) {
    for (std::uint64_t s : seeds) {
      rows.push_back({level, s,
                      evaluate_policy(policy, TaskConfig::for_level(level), geometry, mode,
                                      episodes, s, threads)});
    }
  }
  return rows;
}

std::vector<AblationCurve> run_input_ablations(const WorkflowConfig& config,
                                               std::span<const std::string> modes,
                                               std::size_t final_window) {
  config.validate();
  if (modes.empty()) throw UsageError("ablation needs at least one mode");
  if (final_window == 0) throw UsageError("final window must be at least 1");
  std::vector<AblationCurve> curves;
  for (const std::string& name : modes) {
    const ObservationMode mode = parse_observation_mode(name);
    for (std::uint64_t s : config.seeds) {
      WorkflowResult r = mode.kind == ObservationKind::kPerception
                             ? run_alternating_training(config, s)
                             : run_policy_training(config, mode, s);
      AblationCurve c;
      c.mode = observation_mode_name(mode);
      c.seed = s;
      c.updates = std::move(r.updates);
      const std::size_t n = std::min(final_window, c.updates.size());
      double sum = 0.0;
      std::size_t counted = 0;
      for (std::size_t i = c.updates.size() - n; i < c.updates.size(); ++i) {
        if (std::isfinite(c.updates[i].mean_reward)) {
          sum += c.updates[i].mean_reward;
          ++counted;
        }
      }
      c.final_reward = counted > 0 ? sum / static_cast<double>(counted) : kNaN;
      curves.push_back(std::move(c));
    }
  }
  return curves;
}

}  // namespace taxelgraph
