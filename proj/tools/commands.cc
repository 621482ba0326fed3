#include "taxelgraph/cli/commands.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "taxelgraph/baoding2d/env.h"
#include "taxelgraph/baoding2d/observation.h"
#include "taxelgraph/errors.h"
#include "taxelgraph/numeric_text.h"
#include "taxelgraph/perception/model.h"
#include "taxelgraph/perception/training.h"
#include "taxelgraph/ppo/policy.h"
#include "taxelgraph/ppo/ppo.h"
#include "taxelgraph/rng.h"
#include "taxelgraph/tactilesim/dataset.h"
#include "taxelgraph/tactilesim/layout.h"
#include "taxelgraph/workflow/workflow.h"

namespace taxelgraph {

namespace {

const std::vector<std::string> kPpoKeys = {
    "ppo.gamma",          "ppo.gae_lambda",         "ppo.clip_epsilon",
    "ppo.epochs_per_update", "ppo.minibatch_size",  "ppo.rollout_length",
    "ppo.n_envs",         "ppo.entropy_coefficient", "ppo.value_coefficient",
    "ppo.learning_rate",  "ppo.reward_scale",       "ppo.max_grad_norm"};

const std::vector<std::string> kWorkflowKeys = {
    "task.level",
    "perception.kind",
    "perception.batch_size",
    "perception.learning_rate",
    "perception.train_fraction",
    "policy.hidden",
    "workflow.buffer_threshold",
    "workflow.perception_epochs",
    "workflow.max_outer_iterations",
    "workflow.policy_updates_per_iteration"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> table = {
      {"gen-data", "generate a simulated grasp dataset",
       {"seed", "data.layout", "data.object", "data.n", "data.noise_fraction",
        "data.activation_radius"}},
      {"train-perception", "train one perception model on a dataset",
       {"seed", "data.path", "data.limit", "perception.kind", "perception.epochs",
        "perception.batch_size", "perception.learning_rate", "perception.train_fraction",
        "perception.channels"}},
      {"bench", "compare perception models on one dataset with equal budgets",
       {"data.path", "data.limit", "bench.kinds", "bench.seeds", "perception.epochs",
        "perception.batch_size", "perception.learning_rate", "perception.train_fraction",
        "perception.channels"}},
      {"train-policy", "train a Baoding policy with PPO on a fixed observation mode",
       concat({"seed", "task.level", "obs.mode", "perception.path", "policy.hidden",
               "policy.initial_log_std", "policy.updates"},
              kPpoKeys)},
      {"workflow", "alternate PPO and perception training on tactile observations",
       concat(concat({"seed"}, kWorkflowKeys), kPpoKeys)},
      {"eval", "evaluate a policy checkpoint on task levels",
       {"seed", "policy.path", "obs.mode", "perception.path", "eval.levels", "eval.episodes"}},
      {"ablate", "train one policy per observation mode and seed with equal budgets",
       concat(concat({"ablate.modes", "ablate.seeds", "ablate.final_window"}, kWorkflowKeys),
              kPpoKeys)},
  };
  return table;
}

std::string required_path(const RunConfig& c, const std::string& key) {
  const std::string& p = c.get(key);
  if (p.empty()) throw UsageError(key + " is required");
  return p;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string num(double v) { return format_double(v); }

// Config values that fit in checkpoint meta (single non-empty tokens).
std::vector<std::pair<std::string, std::string>> config_meta(const RunConfig& c,
                                                             const std::vector<std::string>& keys) {
  std::vector<std::pair<std::string, std::string>> meta;
  for (const auto& k : keys) {
    const std::string& v = c.get(k);
    if (v.empty() || v.find_first_of(" \t") != std::string::npos) continue;
    meta.emplace_back("config." + k, v);
  }
  return meta;
}

void save_with_meta(Checkpoint ckpt, std::vector<std::pair<std::string, std::string>> extra,
                    const std::string& path) {
  for (auto& kv : extra) ckpt.meta.push_back(std::move(kv));
  save_checkpoint(ckpt, path);
}

struct LoadedData {
  DatasetFile file;
  std::vector<GraspSample> samples;
};

LoadedData load_data(const RunConfig& c) {
  LoadedData d;
  d.file = read_dataset(required_path(c, "data.path"));
  const std::size_t limit = c.get_uint("data.limit");
  d.samples = d.file.samples;
  if (limit > 0 && limit < d.samples.size()) d.samples.resize(limit);
  if (d.samples.empty()) throw DataError("dataset '" + c.get("data.path") + "' has no samples");
  return d;
}

PpoConfig ppo_config(const RunConfig& c) {
  PpoConfig p;
  p.gamma = c.get_double("ppo.gamma");
  p.gae_lambda = c.get_double("ppo.gae_lambda");
  p.clip_epsilon = c.get_double("ppo.clip_epsilon");
  p.epochs_per_update = c.get_uint("ppo.epochs_per_update");
  p.minibatch_size = c.get_uint("ppo.minibatch_size");
  p.rollout_length = c.get_uint("ppo.rollout_length");
  p.n_envs = c.get_uint("ppo.n_envs");
  p.entropy_coefficient = c.get_double("ppo.entropy_coefficient");
  p.value_coefficient = c.get_double("ppo.value_coefficient");
  p.learning_rate = c.get_double("ppo.learning_rate");
  p.reward_scale = c.get_double("ppo.reward_scale");
  p.max_grad_norm = c.get_double("ppo.max_grad_norm");
  p.validate();
  return p;
}

WorkflowConfig workflow_config(const RunConfig& c) {
  WorkflowConfig w;
  w.perception_kind = parse_model_kind(c.get("perception.kind"));
  w.buffer_threshold = c.get_uint("workflow.buffer_threshold");
  w.perception_epochs = c.get_uint("workflow.perception_epochs");
  w.max_outer_iterations = c.get_uint("workflow.max_outer_iterations");
  w.policy_updates_per_iteration = c.get_uint("workflow.policy_updates_per_iteration");
  w.policy_hidden = c.get_size_list("policy.hidden");
  w.ppo = ppo_config(c);
  w.task = TaskConfig::for_level(parse_task_level(c.get("task.level")));
  w.perception_batch_size = c.get_uint("perception.batch_size");
  w.perception_learning_rate = c.get_double("perception.learning_rate");
  w.perception_train_fraction = c.get_double("perception.train_fraction");
  w.threads = static_cast<unsigned>(c.get_uint("threads"));
  return w;
}

// Resolves the observation mode, loading the perception model it needs.
ObservationMode resolve_mode(const RunConfig& c, std::unique_ptr<PerceptionModel>& holder) {
  ObservationMode mode = parse_observation_mode(c.get("obs.mode"));
  if (mode.kind == ObservationKind::kPerception) {
    holder = load_model(required_path(c, "perception.path"));
    if (holder->spec().target.size() != 4) {
      throw DataError("perception model does not predict two disc centers");
    }
    mode.perception = holder.get();
  }
  return mode;
}

std::string updates_csv(const std::vector<UpdateDiagnostics>& updates) {
  std::string csv =
      "update,env_steps,mean_reward,success_rate,surrogate,value_loss,entropy,clip_fraction\n";
  for (const auto& u : updates) {
    csv += std::to_string(u.update) + "," + std::to_string(u.env_steps) + "," + num(u.mean_reward) +
           "," + num(u.success_rate) + "," + num(u.surrogate) + "," + num(u.value_loss) + "," +
           num(u.entropy) + "," + num(u.clip_fraction) + "\n";
  }
  return csv;
}

void log_update(std::ostream& log, const UpdateDiagnostics& u) {
  if (u.update % 10 != 0) return;
  log << "update " << u.update << "  steps " << u.env_steps << "  reward " << num(u.mean_reward)
      << "  success " << num(u.success_rate) << "\n";
}

using Outputs = std::vector<std::pair<std::string, std::string>>;  // suffix, path

Outputs cmd_gen_data(const RunConfig& c, const std::string& out, std::ostream& log) {
  const HandLayout layout = hand_layout(c.get("data.layout"));
  GeneratorConfig g;
  g.object = parse_object_kind(c.get("data.object"));
  g.count = c.get_uint("data.n");
  g.seed = c.get_uint("seed");
  g.noise_fraction = c.get_double("data.noise_fraction");
  g.activation_radius = c.get_double("data.activation_radius");
  g.threads = static_cast<unsigned>(c.get_uint("threads"));
  const DatasetFile file = generate_grasp_dataset(layout, g);
  write_dataset(file, out);

  std::size_t active = 0;
  std::size_t empty = 0;
  for (const auto& s : file.samples) {
    active += s.frame.size();
    if (s.frame.size() == 0) ++empty;
  }
  log << "wrote " << file.samples.size() << " " << file.object_kind << " samples on layout "
      << file.layout_id << " to " << out << "\n"
      << "mean active taxels " << num(static_cast<double>(active) / file.samples.size())
      << ", empty frames " << empty << "\n";
  return {{"", out}};
}

Outputs cmd_train_perception(const RunConfig& c, const std::string& out, std::ostream& log) {
  const LoadedData d = load_data(c);
  ModelSpec spec = dataset_model_spec(d.file, parse_model_kind(c.get("perception.kind")));
  spec.channels = c.get_uint("perception.channels");
  const std::uint64_t seed = c.get_uint("seed");
  auto model = PerceptionModel::create(spec, derive_seed(seed, 1));
  TrainConfig tc;
  tc.epochs = c.get_uint("perception.epochs");
  tc.batch_size = c.get_uint("perception.batch_size");
  tc.learning_rate = c.get_double("perception.learning_rate");
  tc.train_fraction = c.get_double("perception.train_fraction");
  tc.seed = derive_seed(seed, 2);
  const TrainReport report =
      train_perception(*model, d.samples, tc, nullptr, [&](std::size_t epoch, const EpochReport& r) {
        log << "epoch " << epoch << "  train " << num(r.train.position_cm) << " cm  test "
            << num(r.test.position_cm) << " cm\n";
      });

  std::string csv =
      "epoch,train_rmse,test_rmse,train_position_cm,test_position_cm,train_orientation_deg,"
      "test_orientation_deg\n";
  auto row = [&](std::size_t epoch, const EpochReport& r) {
    csv += std::to_string(epoch) + "," + num(r.train.rmse) + "," + num(r.test.rmse) + "," +
           num(r.train.position_cm) + "," + num(r.test.position_cm) + "," +
           num(r.train.orientation_deg) + "," + num(r.test.orientation_deg) + "\n";
  };
  row(0, report.initial);
  for (std::size_t e = 0; e < report.epochs.size(); ++e) row(e + 1, report.epochs[e]);

  save_with_meta(model_checkpoint(*model),
                 config_meta(c, command_info("train-perception").keys), out);
  write_text(out + ".csv", csv);
  log << "wrote " << out << " and " << out << ".csv\n";
  return {{"", out}, {".csv", out + ".csv"}};
}

Outputs cmd_bench(const RunConfig& c, const std::string& out, std::ostream& log) {
  const LoadedData d = load_data(c);
  ModelSpec spec = dataset_model_spec(d.file, ModelKind::kTacGnn);
  spec.channels = c.get_uint("perception.channels");
  std::vector<ModelKind> kinds;
  for (const auto& k : c.get_list("bench.kinds")) kinds.push_back(parse_model_kind(k));
  const auto seeds = c.get_uint_list("bench.seeds");
  BaselineBudget budget;
  budget.epochs = c.get_uint("perception.epochs");
  budget.batch_size = c.get_uint("perception.batch_size");
  budget.learning_rate = c.get_double("perception.learning_rate");
  budget.train_fraction = c.get_double("perception.train_fraction");
  const auto rows = run_baseline_comparison(d.samples, spec, kinds, budget, seeds,
                                            static_cast<unsigned>(c.get_uint("threads")));

  const bool angles = spec.target.angle_dims > 0;
  std::string csv = "kind,seed,train_rmse,test_rmse,train_position_cm,test_position_cm";
  csv += angles ? ",test_orientation_deg\n" : "\n";
  auto line = [&](std::string_view kind, const std::string& seed, double tr, double te, double trp,
                  double tep, double teo) {
    csv += std::string(kind) + "," + seed + "," + num(tr) + "," + num(te) + "," + num(trp) + "," +
           num(tep);
    csv += angles ? "," + num(teo) + "\n" : "\n";
  };
  for (const auto& r : rows) {
    line(model_kind_name(r.kind), std::to_string(r.seed), r.train.rmse, r.test.rmse,
         r.train.position_cm, r.test.position_cm, r.test.orientation_deg);
  }
  log << "kind     test position rmse (cm, mean over " << seeds.size() << " seeds)\n";
  for (ModelKind k : kinds) {
    double m[5] = {0, 0, 0, 0, 0};
    for (const auto& r : rows) {
      if (r.kind != k) continue;
      m[0] += r.train.rmse;
      m[1] += r.test.rmse;
      m[2] += r.train.position_cm;
      m[3] += r.test.position_cm;
      m[4] += r.test.orientation_deg;
    }
    for (double& v : m) v /= static_cast<double>(seeds.size());
    line(model_kind_name(k), "mean", m[0], m[1], m[2], m[3], m[4]);
    log << model_kind_name(k) << std::string(9 - model_kind_name(k).size(), ' ') << num(m[3])
        << "\n";
  }
  write_text(out, csv);
  log << "note: these are desk-scale runs (" << d.samples.size()
      << " samples, layout " << d.file.layout_id << ", " << budget.epochs
      << " epochs); full-scale reference errors come from much larger datasets and budgets and "
         "are not directly comparable.\n";
  return {{"", out}};
}

Outputs cmd_train_policy(const RunConfig& c, const std::string& out, std::ostream& log) {
  std::unique_ptr<PerceptionModel> perception;
  const ObservationMode mode = resolve_mode(c, perception);
  const PpoConfig ppo = ppo_config(c);
  const std::uint64_t seed = c.get_uint("seed");
  const TaskConfig task = TaskConfig::for_level(parse_task_level(c.get("task.level")));
  const DishGeometry geometry;
  PolicyParams policy = init_policy(observation_width(mode.kind), c.get_size_list("policy.hidden"),
                                    derive_seed(seed, 12), c.get_double("policy.initial_log_std"));
  VecEnv envs(ppo.n_envs, task, geometry, mode, derive_seed(seed, 13));
  AdamState adam;
  const auto updates = train_policy(
      policy, adam, envs, ppo, c.get_uint("policy.updates"), derive_seed(seed, 14),
      static_cast<unsigned>(c.get_uint("threads")),
      [&](const UpdateDiagnostics& u, const RolloutBuffer&) { log_update(log, u); });

  auto meta = config_meta(c, command_info("train-policy").keys);
  meta.insert(meta.begin(), {"observation_mode", observation_mode_name(mode)});
  save_checkpoint(policy_checkpoint(policy, std::move(meta)), out);
  write_text(out + ".csv", updates_csv(updates));
  log << "wrote " << out << " and " << out << ".csv\n";
  return {{"", out}, {".csv", out + ".csv"}};
}

Outputs cmd_workflow(const RunConfig& c, const std::string& out, std::ostream& log) {
  const WorkflowConfig wc = workflow_config(c);
  WorkflowHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& r) {
    log << "iteration " << r.iteration << "  steps " << r.env_steps << "  reward "
        << num(r.mean_reward) << "  success " << num(r.success_rate) << "  buffer "
        << r.buffer_size;
    if (r.perception_retrained) {
      log << "  perception train " << num(r.perception_train_cm) << " cm, test "
          << num(r.perception_test_cm) << " cm";
    }
    log << "\n";
  };
  const WorkflowResult result = run_alternating_training(wc, c.get_uint("seed"), hooks);

  std::string csv =
      "iteration,env_steps,mean_reward,success_rate,buffer_size,perception_retrained,"
      "perception_train_cm,perception_test_cm\n";
  for (const auto& r : result.history) {
    csv += std::to_string(r.iteration) + "," + std::to_string(r.env_steps) + "," +
           num(r.mean_reward) + "," + num(r.success_rate) + "," + std::to_string(r.buffer_size) +
           "," + (r.perception_retrained ? "1" : "0") + "," + num(r.perception_train_cm) + "," +
           num(r.perception_test_cm) + "\n";
  }
  write_text(out, csv);
  const auto meta = config_meta(c, command_info("workflow").keys);
  auto policy_meta = meta;
  policy_meta.insert(policy_meta.begin(), {"observation_mode", "perception"});
  save_checkpoint(policy_checkpoint(result.policy, std::move(policy_meta)), out + ".policy.ckpt");
  save_with_meta(model_checkpoint(*result.perception), meta, out + ".perception.ckpt");
  write_text(out + ".updates.csv", updates_csv(result.updates));
  log << "wrote " << out << ", " << out << ".policy.ckpt, " << out << ".perception.ckpt and "
      << out << ".updates.csv\n";
  return {{"", out},
          {".policy.ckpt", out + ".policy.ckpt"},
          {".perception.ckpt", out + ".perception.ckpt"},
          {".updates.csv", out + ".updates.csv"}};
}

Outputs cmd_eval(const RunConfig& c, const std::string& out, std::ostream& log) {
  const PolicyParams policy = policy_from_checkpoint(load_checkpoint(required_path(c, "policy.path")));
  std::unique_ptr<PerceptionModel> perception;
  const ObservationMode mode = resolve_mode(c, perception);
  if (policy.observation_width() != observation_width(mode.kind)) {
    throw UsageError("policy expects " + std::to_string(policy.observation_width()) +
                     " observation values but obs.mode '" + c.get("obs.mode") + "' gives " +
                     std::to_string(observation_width(mode.kind)));
  }
  std::vector<TaskLevel> levels;
  for (const auto& l : c.get_list("eval.levels")) levels.push_back(parse_task_level(l));
  const std::vector<std::uint64_t> seeds = {c.get_uint("seed")};
  const auto rows = run_task_levels(policy, DishGeometry{}, mode, levels, c.get_uint("eval.episodes"),
                                    seeds, static_cast<unsigned>(c.get_uint("threads")));
  std::string csv = "level,seed,episodes,success_rate,mean_steps,mean_reward\n";
  for (const auto& r : rows) {
    csv += std::string(task_level_name(r.level)) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.eval.episodes) + "," + num(r.eval.success_rate) + "," +
           num(r.eval.mean_steps) + "," + num(r.eval.mean_reward) + "\n";
    log << task_level_name(r.level) << ": success " << num(r.eval.success_rate) << " over "
        << r.eval.episodes << " episodes, mean steps " << num(r.eval.mean_steps) << "\n";
  }
  write_text(out, csv);
  return {{"", out}};
}

Outputs cmd_ablate(const RunConfig& c, const std::string& out, std::ostream& log) {
  WorkflowConfig wc = workflow_config(c);
  wc.seeds = c.get_uint_list("ablate.seeds");
  const auto modes = c.get_list("ablate.modes");
  const auto curves = run_input_ablations(wc, modes, c.get_uint("ablate.final_window"));

  std::string csv = "mode,seed,update,env_steps,mean_reward,success_rate\n";
  std::string summary = "mode,seed,final_reward\n";
  for (const auto& curve : curves) {
    for (const auto& u : curve.updates) {
      csv += curve.mode + "," + std::to_string(curve.seed) + "," + std::to_string(u.update) + "," +
             std::to_string(u.env_steps) + "," + num(u.mean_reward) + "," + num(u.success_rate) +
             "\n";
    }
    summary += curve.mode + "," + std::to_string(curve.seed) + "," + num(curve.final_reward) + "\n";
  }
  for (const auto& m : modes) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& curve : curves) {
      if (curve.mode != m) continue;
      total += curve.final_reward;
      ++n;
    }
    const double mean = n > 0 ? total / static_cast<double>(n) : std::nan("");
    summary += m + ",mean," + num(mean) + "\n";
    log << m << ": final reward " << num(mean) << "\n";
  }
  write_text(out, csv);
  write_text(out + ".summary.csv", summary);
  return {{"", out}, {".summary.csv", out + ".summary.csv"}};
}

using Handler = Outputs (*)(const RunConfig&, const std::string&, std::ostream&);

Handler handler_for(std::string_view name) {
  static const std::map<std::string_view, Handler> handlers = {
      {"gen-data", cmd_gen_data},         {"train-perception", cmd_train_perception},
      {"bench", cmd_bench},               {"train-policy", cmd_train_policy},
      {"workflow", cmd_workflow},         {"eval", cmd_eval},
      {"ablate", cmd_ablate}};
  return handlers.at(name);
}

}  // namespace

const std::vector<CommandInfo>& commands() { return command_table(); }

const CommandInfo& command_info(std::string_view name) {
  for (const auto& c : command_table()) {
    if (c.name == name) return c;
  }
  throw UsageError("unknown command '" + std::string(name) + "'");
}

Manifest run_command(std::string_view name, const RunConfig& config, std::ostream& log) {
  const CommandInfo& info = command_info(name);
  const std::string out = required_path(config, "out");
  const Outputs outputs = handler_for(info.name)(config, out, log);

  Manifest m;
  m.command = std::string(info.name);
  m.config = config;
  m.keys = info.keys;
  for (const auto& [suffix, path] : outputs) m.outputs.push_back({suffix, file_blob_sha1(path)});
  write_manifest(m, out + ".manifest");
  return m;
}

ReproduceReport reproduce(const std::string& manifest_path, const std::string& out,
                          unsigned threads, std::ostream& log) {
  ReproduceReport report;
  report.original = read_manifest(manifest_path);
  RunConfig config = RunConfig::defaults();
  config.merge(report.original.config);
  std::string target = out;
  if (target.empty()) {
    constexpr std::string_view kSuffix = ".manifest";
    if (manifest_path.size() <= kSuffix.size() || !manifest_path.ends_with(kSuffix)) {
      throw UsageError("cannot derive the output path from '" + manifest_path + "'; pass --out");
    }
    target = manifest_path.substr(0, manifest_path.size() - kSuffix.size());
  }
  config.set("out", target);
  config.set("threads", std::to_string(threads));
  report.rerun = run_command(report.original.command, config, log);

  for (const auto& o : report.original.outputs) {
    const auto it = std::find_if(report.rerun.outputs.begin(), report.rerun.outputs.end(),
                                 [&](const ManifestOutput& r) { return r.suffix == o.suffix; });
    if (it == report.rerun.outputs.end() || it->sha1 != o.sha1) report.mismatched.push_back(o.suffix);
  }
  for (const auto& r : report.rerun.outputs) {
    const bool known = std::any_of(report.original.outputs.begin(), report.original.outputs.end(),
                                   [&](const ManifestOutput& o) { return o.suffix == r.suffix; });
    if (!known) report.mismatched.push_back(r.suffix);
  }
  return report;
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace taxelgraph
