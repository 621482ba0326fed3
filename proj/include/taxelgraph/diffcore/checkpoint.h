#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taxelgraph/diffcore/matrix.h"
#include "taxelgraph/diffcore/tensor_list.h"

namespace taxelgraph {

// Text checkpoint:
//   TAXELGRAPH-CKPT v1
//   meta <count>
//   <key> <value>                     (count lines)
//   tensors <count>
//   <name> <rows> <cols>              (then one line of values per row)
// Values use the shortest decimal form that round-trips to the same double.
inline constexpr std::string_view kCheckpointHeader = "TAXELGRAPH-CKPT v1";

struct Checkpoint {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  // Returns the value for `key`; throws DataError when absent.
  const std::string& meta_value(const std::string& key) const;
  const Matrix& tensor(const std::string& name) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

Checkpoint make_checkpoint(const ConstTensorList& tensors,
                           std::vector<std::pair<std::string, std::string>> meta = {});
// Copies tensors by name into `targets`; shapes must match exactly.
void restore_tensors(const Checkpoint& checkpoint, const TensorList& targets);

void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace taxelgraph
