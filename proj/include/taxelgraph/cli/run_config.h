#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace taxelgraph {

enum class ValueType {
  kUInt,          // non-negative integer
  kPositiveUInt,  // integer >= 1
  kDouble,
  kPositiveDouble,
  kNonNegativeDouble,
  kFraction,  // strictly between 0 and 1
  kPath,
  kUIntList,  // comma separated, at least one entry
  kSizeList,  // comma separated positive integers
  kLayout,
  kObject,
  kModelKind,
  kModelKindList,
  kObservationMode,
  kObservationModeList,
  kTaskLevel,
  kTaskLevelList,
};

struct KeySpec {
  std::string_view key;
  ValueType type;
  std::string_view default_value;
  std::string_view help;
};

// Every recognized key, in echo order.
const std::vector<KeySpec>& config_keys();
const KeySpec* find_key(std::string_view key);

// Throws UsageError when `value` is not a valid `type`.
void check_value(const KeySpec& spec, std::string_view value);

// Flat key=value configuration. Values are type-checked as they are set;
// unknown keys are rejected.
class RunConfig {
 public:
  // Every key at its default; "seed" comes from TAXELGRAPH_SEED when set.
  static RunConfig defaults();

  // Lines of key=value; '#' starts a comment, blank lines are skipped, and a
  // line "[outputs]" ends the config section (so manifests load directly).
  static RunConfig parse(std::string_view text, std::string_view source = "config");
  static RunConfig load(const std::string& path);

  void set(std::string_view key, std::string_view value);
  // Copies every value of `other` over this one.
  void merge(const RunConfig& other);
  bool has(std::string_view key) const;

  const std::string& get(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;
  std::vector<std::uint64_t> get_uint_list(std::string_view key) const;
  std::vector<std::size_t> get_size_list(std::string_view key) const;

  // key=value lines for `keys` (all set keys when empty), in registry order.
  std::string to_text(const std::vector<std::string>& keys = {}) const;
  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

std::vector<std::string> split_list(std::string_view text);

}  // namespace taxelgraph
