#include "taxelgraph/cli/run_config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "taxelgraph/baoding2d/env.h"
#include "taxelgraph/baoding2d/observation.h"
#include "taxelgraph/errors.h"
#include "taxelgraph/numeric_text.h"
#include "taxelgraph/perception/model.h"
#include "taxelgraph/tactilesim/dataset.h"
#include "taxelgraph/tactilesim/layout.h"

namespace taxelgraph {

namespace {

using T = ValueType;

const std::vector<KeySpec> kKeys = {
    {"seed", T::kUInt, "0", "master seed (default from TAXELGRAPH_SEED)"},
    {"threads", T::kPositiveUInt, "1", "worker threads; results do not depend on it"},
    {"out", T::kPath, "", "primary output path; sidecars use it as a prefix"},
    {"data.layout", T::kLayout, "desk", "hand layout: desk or allegro"},
    {"data.object", T::kObject, "sphere", "sphere, cube or cylinder"},
    {"data.n", T::kPositiveUInt, "1000", "samples to generate"},
    {"data.noise_fraction", T::kNonNegativeDouble, "0.1", "taxel noise as a fraction of full scale"},
    {"data.activation_radius", T::kNonNegativeDouble, "0", "contact radius in meters; 0 calibrates"},
    {"data.path", T::kPath, "", "input dataset"},
    {"data.limit", T::kUInt, "0", "use only the first n samples; 0 uses all"},
    {"perception.kind", T::kModelKind, "tacgnn", "tacgnn, mlp, cnn or gcn"},
    {"perception.epochs", T::kUInt, "10", "training epochs"},
    {"perception.batch_size", T::kPositiveUInt, "32", "mini-batch size"},
    {"perception.learning_rate", T::kPositiveDouble, "0.001", "Adam step size"},
    {"perception.train_fraction", T::kFraction, "0.8", "share of samples in the train split"},
    {"perception.channels", T::kPositiveUInt, "32", "graph feature width"},
    {"perception.path", T::kPath, "", "perception checkpoint to load"},
    {"bench.kinds", T::kModelKindList, "tacgnn,mlp,cnn,gcn", "models to compare"},
    {"bench.seeds", T::kUIntList, "0,1,2", "one row per seed"},
    {"task.level", T::kTaskLevel, "simple", "training task level"},
    {"obs.mode", T::kObservationMode, "groundtruth",
     "groundtruth, no_perception, noise(<mm>), perception or finger_torque"},
    {"policy.hidden", T::kSizeList, "64,64", "actor and critic hidden widths"},
    {"policy.initial_log_std", T::kDouble, "-0.7", "initial action log-std"},
    {"policy.updates", T::kUInt, "300", "PPO updates for train-policy"},
    {"policy.path", T::kPath, "", "policy checkpoint to load"},
    {"ppo.gamma", T::kPositiveDouble, "0.99", "discount"},
    {"ppo.gae_lambda", T::kPositiveDouble, "0.95", "GAE lambda"},
    {"ppo.clip_epsilon", T::kPositiveDouble, "0.2", "ratio clip"},
    {"ppo.epochs_per_update", T::kPositiveUInt, "4", "passes over each rollout"},
    {"ppo.minibatch_size", T::kPositiveUInt, "256", "transitions per Adam step"},
    {"ppo.rollout_length", T::kPositiveUInt, "256", "steps per environment per update"},
    {"ppo.n_envs", T::kPositiveUInt, "8", "parallel environments"},
    {"ppo.entropy_coefficient", T::kNonNegativeDouble, "0", "entropy bonus weight"},
    {"ppo.value_coefficient", T::kNonNegativeDouble, "0.5", "value loss weight"},
    {"ppo.learning_rate", T::kPositiveDouble, "0.0003", "Adam step size"},
    {"ppo.reward_scale", T::kPositiveDouble, "0.01", "reward multiplier before GAE"},
    {"ppo.max_grad_norm", T::kNonNegativeDouble, "0.5", "gradient norm clip; 0 disables"},
    {"workflow.buffer_threshold", T::kPositiveUInt, "5000", "frames needed before retraining"},
    {"workflow.perception_epochs", T::kUInt, "10", "epochs per perception stage"},
    {"workflow.max_outer_iterations", T::kUInt, "4", "alternations of PPO and perception"},
    {"workflow.policy_updates_per_iteration", T::kPositiveUInt, "100", "PPO updates per stage"},
    {"eval.levels", T::kTaskLevelList, "simple,middle,hard", "levels to evaluate"},
    {"eval.episodes", T::kPositiveUInt, "500", "episodes per level"},
    {"ablate.modes", T::kObservationModeList, "groundtruth,perception,no_perception,noise(2),noise(10)",
     "observation modes to compare"},
    {"ablate.seeds", T::kUIntList, "0,1,2", "seeds per mode"},
    {"ablate.final_window", T::kPositiveUInt, "10", "updates averaged into the final reward"},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::uint64_t to_uint(std::string_view text, std::string_view key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError(std::string(key) + ": expected a non-negative integer, got '" +
                     std::string(text) + "'");
  }
  return v;
}

double to_double(std::string_view text, std::string_view key) {
  try {
    const double v = parse_double(text);
    if (!std::isfinite(v)) throw DataError("not finite");
    return v;
  } catch (const DataError&) {
    throw UsageError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
  }
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    out.emplace_back(trim(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

const std::vector<KeySpec>& config_keys() { return kKeys; }

const KeySpec* find_key(std::string_view key) {
  for (const KeySpec& k : kKeys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

void check_value(const KeySpec& spec, std::string_view value) {
  const std::string_view key = spec.key;
  auto each = [&](auto&& fn) {
    const auto items = split_list(value);
    for (const auto& item : items) {
      if (item.empty()) throw UsageError(std::string(key) + ": empty list entry in '" + std::string(value) + "'");
      fn(item);
    }
  };
  switch (spec.type) {
    case T::kUInt:
      to_uint(value, key);
      break;
    case T::kPositiveUInt:
      if (to_uint(value, key) == 0) throw UsageError(std::string(key) + " must be at least 1");
      break;
    case T::kDouble:
      to_double(value, key);
      break;
    case T::kPositiveDouble:
      if (!(to_double(value, key) > 0.0)) throw UsageError(std::string(key) + " must be positive");
      break;
    case T::kNonNegativeDouble:
      if (!(to_double(value, key) >= 0.0)) throw UsageError(std::string(key) + " must be >= 0");
      break;
    case T::kFraction: {
      const double v = to_double(value, key);
      if (!(v > 0.0 && v < 1.0)) throw UsageError(std::string(key) + " must lie in (0, 1)");
      break;
    }
    case T::kPath:
      if (value.find('\n') != std::string_view::npos) throw UsageError(std::string(key) + ": bad path");
      break;
    case T::kUIntList:
      each([&](const std::string& s) { to_uint(s, key); });
      break;
    case T::kSizeList:
      each([&](const std::string& s) {
        if (to_uint(s, key) == 0) throw UsageError(std::string(key) + ": widths must be >= 1");
      });
      break;
    case T::kLayout:
      hand_layout(value);
      break;
    case T::kObject:
      parse_object_kind(value);
      break;
    case T::kModelKind:
      parse_model_kind(value);
      break;
    case T::kModelKindList:
      each([](const std::string& s) { parse_model_kind(s); });
      break;
    case T::kObservationMode:
      parse_observation_mode(value);
      break;
    case T::kObservationModeList:
      each([](const std::string& s) { parse_observation_mode(s); });
      break;
    case T::kTaskLevel:
      parse_task_level(value);
      break;
    case T::kTaskLevelList:
      each([](const std::string& s) { parse_task_level(s); });
      break;
  }
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  for (const KeySpec& k : kKeys) c.values_.emplace(std::string(k.key), std::string(k.default_value));
  if (const char* env = std::getenv("TAXELGRAPH_SEED"); env != nullptr && *env != '\0') {
    try {
      c.set("seed", env);
    } catch (const UsageError&) {
      throw UsageError("TAXELGRAPH_SEED must be a non-negative integer, got '" + std::string(env) + "'");
    }
  }
  return c;
}

RunConfig RunConfig::parse(std::string_view text, std::string_view source) {
  RunConfig c;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[outputs]") break;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(std::string(source) + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key == "command") continue;
    try {
      c.set(key, trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) throw UsageError("unknown config key '" + std::string(key) + "'");
  check_value(*spec, value);
  values_[std::string(key)] = std::string(value);
}

void RunConfig::merge(const RunConfig& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

bool RunConfig::has(std::string_view key) const { return values_.find(key) != values_.end(); }

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("config key '" + std::string(key) + "' is not set");
  return it->second;
}

std::uint64_t RunConfig::get_uint(std::string_view key) const { return to_uint(get(key), key); }

double RunConfig::get_double(std::string_view key) const { return to_double(get(key), key); }

std::vector<std::string> RunConfig::get_list(std::string_view key) const { return split_list(get(key)); }

std::vector<std::uint64_t> RunConfig::get_uint_list(std::string_view key) const {
  std::vector<std::uint64_t> out;
  for (const auto& s : get_list(key)) out.push_back(to_uint(s, key));
  return out;
}

std::vector<std::size_t> RunConfig::get_size_list(std::string_view key) const {
  std::vector<std::size_t> out;
  for (const auto& s : get_list(key)) out.push_back(static_cast<std::size_t>(to_uint(s, key)));
  return out;
}

std::string RunConfig::to_text(const std::vector<std::string>& keys) const {
  std::string out;
  for (const KeySpec& k : kKeys) {
    if (!keys.empty() && std::find(keys.begin(), keys.end(), k.key) == keys.end()) continue;
    const auto it = values_.find(k.key);
    if (it == values_.end()) continue;
    out += std::string(k.key) + "=" + it->second + "\n";
  }
  return out;
}

}  // namespace taxelgraph
