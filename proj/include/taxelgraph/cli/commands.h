#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "taxelgraph/cli/manifest.h"
#include "taxelgraph/cli/run_config.h"

namespace taxelgraph {

struct CommandInfo {
  std::string_view name;
  std::string_view description;
  // Keys that shape this command's outputs; they are echoed to the manifest.
  std::vector<std::string> keys;
};

const std::vector<CommandInfo>& commands();
// Throws UsageError for unknown names.
const CommandInfo& command_info(std::string_view name);

// Runs `name` with `config`, writes its outputs and the <out>.manifest
// sidecar, and prints a human-readable summary to `log`. Returns the manifest.
Manifest run_command(std::string_view name, const RunConfig& config, std::ostream& log);

struct ReproduceReport {
  Manifest original;
  Manifest rerun;
  std::vector<std::string> mismatched;  // suffixes whose hashes differ
  bool identical() const { return mismatched.empty(); }
};

// Re-runs the command recorded in `manifest_path` from its embedded config,
// writing to `out` (the recorded path when empty), and compares output hashes.
ReproduceReport reproduce(const std::string& manifest_path, const std::string& out,
                          unsigned threads, std::ostream& log);

// Exit code for an exception escaping a command: 2 usage, 3 data, 4 numeric.
int exit_code_for_current_exception(std::ostream& err);

}  // namespace taxelgraph
