#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "taxelgraph/diffcore/checkpoint.h"
#include "taxelgraph/diffcore/tensor_list.h"
#include "taxelgraph/perception/cnn.h"
#include "taxelgraph/perception/tacgnn.h"
#include "taxelgraph/pointset/pointset.h"

namespace taxelgraph {

// One tactile reading with its object-state label. `frame` holds the
// activated taxels, `raw` the full pressure vector indexed by taxel id.
struct GraspSample {
  PointSet frame;
  std::vector<double> raw;
  std::vector<double> label;

  friend bool operator==(const GraspSample&, const GraspSample&) = default;
};

// Labels are position coordinates in meters followed by angles in degrees.
// Losses are computed in centimeters and degrees.
struct TargetLayout {
  std::size_t position_dims = 3;
  std::size_t angle_dims = 0;

  std::size_t size() const { return position_dims + angle_dims; }
  friend bool operator==(const TargetLayout&, const TargetLayout&) = default;
};

std::vector<double> to_loss_units(const TargetLayout& target, std::span<const double> label);
std::vector<double> from_loss_units(const TargetLayout& target, std::span<const double> values);

enum class ModelKind { kTacGnn, kMlp, kCnn, kGcn };

std::string_view model_kind_name(ModelKind kind);
// Throws UsageError for unknown names.
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::kTacGnn;
  TargetLayout target;
  std::string layout_id;
  // Rest position of every taxel, indexed by taxel id.
  std::vector<Vec3> rest_positions;

  std::size_t channels = 32;
  std::size_t neighbors = kDefaultNeighbors;
  double sampling_ratio = kDefaultSamplingRatio;
  double coord_scale = 100.0;
  std::vector<std::size_t> mlp_hidden = {64, 64, 64};
  GridShape grid;  // zero area selects default_grid(taxel_count)

  std::size_t taxel_count() const { return rest_positions.size(); }
};

class PerceptionModel {
 public:
  static std::unique_ptr<PerceptionModel> create(const ModelSpec& spec, std::uint64_t seed);

  virtual ~PerceptionModel() = default;

  const ModelSpec& spec() const { return spec_; }
  ModelKind kind() const { return spec_.kind; }

  virtual std::unique_ptr<PerceptionModel> clone() const = 0;
  // Same architecture with every parameter zero; used as a gradient buffer.
  virtual std::unique_ptr<PerceptionModel> zeros_like() const = 0;

  virtual TensorList tensors() = 0;
  virtual ConstTensorList tensors() const = 0;

  // Prediction in loss units (cm, degrees).
  virtual std::vector<double> forward(const GraspSample& sample) const = 0;

  // Adds weight * d rmse / d params into `gradient` (from zeros_like()) and
  // returns the sample's rmse in loss units.
  virtual double accumulate_gradient(const GraspSample& sample, double weight,
                                     PerceptionModel& gradient) const = 0;

  // Prediction in label units (meters, degrees).
  std::vector<double> predict(const GraspSample& sample) const;
  // rmse in loss units.
  double loss(const GraspSample& sample) const;

 protected:
  explicit PerceptionModel(ModelSpec spec) : spec_(std::move(spec)) {}

  ModelSpec spec_;
};

// kNN graph over every taxel's rest position (pressures zero); the GCN
// baseline's fixed structure.
TactileGraph static_layout_graph(const ModelSpec& spec);

Checkpoint model_checkpoint(const PerceptionModel& model);
std::unique_ptr<PerceptionModel> model_from_checkpoint(const Checkpoint& checkpoint);
void save_model(const PerceptionModel& model, const std::string& path);
std::unique_ptr<PerceptionModel> load_model(const std::string& path);

}  // namespace taxelgraph
