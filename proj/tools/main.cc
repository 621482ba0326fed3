#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "taxelgraph/cli/commands.h"
#include "taxelgraph/cli/run_config.h"
#include "taxelgraph/errors.h"

namespace {

using taxelgraph::RunConfig;

// Convenience flags; each maps onto one config key.
struct FlagSpec {
  const char* flag;
  const char* key;
};

const std::vector<FlagSpec> kFlags = {
    {"--seed", "seed"},
    {"--threads", "threads"},
    {"--out", "out"},
    {"--layout", "data.layout"},
    {"--object", "data.object"},
    {"--n", "data.n"},
    {"--noise", "data.noise_fraction"},
    {"--data", "data.path"},
    {"--model", "perception.kind"},
    {"--epochs", "perception.epochs"},
    {"--perception", "perception.path"},
    {"--kinds", "bench.kinds"},
    {"--seeds", "bench.seeds"},
    {"--level", "task.level"},
    {"--obs", "obs.mode"},
    {"--updates", "policy.updates"},
    {"--policy", "policy.path"},
    {"--levels", "eval.levels"},
    {"--episodes", "eval.episodes"},
    {"--modes", "ablate.modes"},
};

// Some flags mean different keys per command: --n is "use the first n samples"
// for commands that read a dataset.
std::string flag_key(const std::string& command, const FlagSpec& f) {
  const std::string flag = f.flag;
  if (flag == "--n" && (command == "train-perception" || command == "bench")) return "data.limit";
  if (flag == "--seeds" && command == "ablate") return "ablate.seeds";
  const bool alternating = command == "workflow" || command == "ablate";
  if (flag == "--epochs" && alternating) return "workflow.perception_epochs";
  if (flag == "--updates" && alternating) return "workflow.policy_updates_per_iteration";
  return f.key;
}

bool uses_key(const taxelgraph::CommandInfo& info, const std::string& key) {
  if (key == "seed" || key == "threads" || key == "out") return true;
  return std::find(info.keys.begin(), info.keys.end(), key) != info.keys.end();
}

// Lists `info`'s keys, or every key when `info` is null.
std::string keys_help(const taxelgraph::CommandInfo* info) {
  std::string text = "Config keys (set with --set key=value or in a --config file):\n";
  for (const auto& k : taxelgraph::config_keys()) {
    if (info != nullptr && !uses_key(*info, std::string(k.key))) continue;
    text += "  " + std::string(k.key) + " = " + std::string(k.default_value) + "    " +
            std::string(k.help) + "\n";
  }
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"taxelgraph: tactile graph perception and Baoding-ball policy learning"};
  app.require_subcommand(1);
  app.footer(keys_help(nullptr));

  struct Sub {
    CLI::App* app = nullptr;
    std::string config_path;
    std::vector<std::string> sets;
    std::vector<std::string> flag_values;
  };
  std::vector<Sub> subs;
  const auto& table = taxelgraph::commands();
  subs.resize(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    Sub& s = subs[i];
    s.app = app.add_subcommand(std::string(table[i].name), std::string(table[i].description));
    s.app->footer(keys_help(&table[i]));
    s.app->add_option("--config", s.config_path, "key=value config file");
    s.app->add_option("--set", s.sets, "override one key (key=value); repeatable");
    s.flag_values.resize(kFlags.size());
    for (std::size_t f = 0; f < kFlags.size(); ++f) {
      const std::string key = flag_key(s.app->get_name(), kFlags[f]);
      if (!uses_key(table[i], key)) continue;
      s.app->add_option(kFlags[f].flag, s.flag_values[f], "sets " + key);
    }
  }

  std::string manifest_path;
  std::string reproduce_out;
  unsigned reproduce_threads = 1;
  CLI::App* repro = app.add_subcommand("reproduce", "re-run a manifest and compare output hashes");
  repro->add_option("manifest", manifest_path, "<out>.manifest written by an earlier run")->required();
  repro->add_option("--out", reproduce_out, "output path (default: the manifest's own prefix)");
  repro->add_option("--threads", reproduce_threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (repro->parsed()) {
      const auto report =
          taxelgraph::reproduce(manifest_path, reproduce_out, reproduce_threads, std::cout);
      if (report.identical()) {
        std::cout << "reproduced: all " << report.original.outputs.size()
                  << " outputs match the manifest\n";
        return 0;
      }
      for (const auto& m : report.mismatched) {
        std::cout << "mismatch: " << (m.empty() ? "primary output" : m) << "\n";
      }
      return 1;
    }
    for (const Sub& s : subs) {
      if (!s.app->parsed()) continue;
      const std::string command = s.app->get_name();
      RunConfig config = RunConfig::defaults();
      if (!s.config_path.empty()) config.merge(RunConfig::load(s.config_path));
      for (const auto& kv : s.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw taxelgraph::UsageError("--set expects key=value, got '" + kv + "'");
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      for (std::size_t f = 0; f < kFlags.size(); ++f) {
        const std::string key = flag_key(command, kFlags[f]);
        if (!uses_key(taxelgraph::command_info(command), key)) continue;
        if (s.app->count(kFlags[f].flag) > 0) config.set(key, s.flag_values[f]);
      }
      taxelgraph::run_command(command, config, std::cout);
      return 0;
    }
  } catch (...) {
    return taxelgraph::exit_code_for_current_exception(std::cerr);
  }
  return 2;
}
