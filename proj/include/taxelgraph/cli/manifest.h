#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "taxelgraph/cli/run_config.h"

namespace taxelgraph {

// SHA-1 of "blob <size>\0<content>", as git hashes file contents.
std::string git_blob_sha1(std::string_view content);
// Throws DataError when the file cannot be read.
std::string file_blob_sha1(const std::string& path);

struct ManifestOutput {
  std::string suffix;  // appended to the run's out path; "" for the primary file
  std::string sha1;
};

// Sidecar written next to every command's primary output as <out>.manifest:
//   command=<name>
//   <key>=<value>           (the command's effective config)
//   [outputs]
//   <suffix or -> <sha1>
struct Manifest {
  std::string command;
  RunConfig config;
  std::vector<std::string> keys;
  std::vector<ManifestOutput> outputs;
};

std::string manifest_text(const Manifest& manifest);
Manifest parse_manifest(std::string_view text);
void write_manifest(const Manifest& manifest, const std::string& path);
Manifest read_manifest(const std::string& path);

}  // namespace taxelgraph
