#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "taxelgraph/perception/model.h"
#include "taxelgraph/tactilesim/layout.h"

namespace taxelgraph {

enum class ObjectKind { kSphere, kCube, kCylinder };

std::string_view object_kind_name(ObjectKind kind);
ObjectKind parse_object_kind(std::string_view name);  // throws UsageError
// sphere: [x, y, z]; cube: [x, y, z, yaw in [0, 90]]; cylinder: [x, y, z, yaw in [0, 180)].
TargetLayout object_target(ObjectKind kind);

// Text format:
//   TAXELGRAPH-DATA v1 <layout_id> <object_kind> <D_out> <n>
//   per sample: S <n_active>, n_active lines T <taxel_id> <x> <y> <z> <pressure>,
//   L <v1> ... <vD>, R <p1> ... <p_total>
struct DatasetFile {
  std::string layout_id;
  std::string object_kind;
  std::size_t label_dim = 0;
  std::vector<GraspSample> samples;

  friend bool operator==(const DatasetFile&, const DatasetFile&) = default;
};

void write_dataset(const DatasetFile& file, std::ostream& out);
// Throws DataError on a bad header, version mismatch, or truncated record.
DatasetFile read_dataset(std::istream& in);
void write_dataset(const DatasetFile& file, const std::string& path);
DatasetFile read_dataset(const std::string& path);

struct GeneratorConfig {
  ObjectKind object = ObjectKind::kSphere;
  std::size_t count = 5000;
  std::uint64_t seed = 0;
  double noise_fraction = 0.1;
  // Zero selects calibrate_activation_radius(layout, noise_fraction).
  double activation_radius = 0.0;
  unsigned threads = 1;
};

// Object shape for one sampled pose (label units: meters, degrees).
Shape object_shape(const HandLayout& layout, ObjectKind kind, std::span<const double> label);

// One power-grasp sample per index; sample i uses the RNG stream (seed, i),
// so results do not depend on the thread count.
DatasetFile generate_grasp_dataset(const HandLayout& layout, const GeneratorConfig& config);

// Model spec matching a dataset's layout and label width. Throws DataError for
// an unknown layout or object, or a label width that disagrees with the object.
ModelSpec dataset_model_spec(const DatasetFile& file, ModelKind kind);

}  // namespace taxelgraph
