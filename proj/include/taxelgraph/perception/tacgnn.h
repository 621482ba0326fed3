#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "taxelgraph/diffcore/mlp.h"
#include "taxelgraph/perception/message_layer.h"
#include "taxelgraph/pointset/pointset.h"

namespace taxelgraph {

inline constexpr std::size_t kMessageLayers = 3;

struct TacGnnConfig {
  std::size_t channels = 32;
  std::size_t output_dim = 3;
  std::size_t neighbors = kDefaultNeighbors;
  double sampling_ratio = kDefaultSamplingRatio;
  // Positions are multiplied by this before entering any network (meters -> cm).
  double coord_scale = 100.0;
  std::vector<std::size_t> head_hidden = {32};
};

// encoder: [x, y, z, pressure] -> C
// layers[l]: phi for message layer l, [h_i, h_j, dx] (2C + 3) -> C -> C
// head: global feature C -> head_hidden -> output_dim
struct TacGnnParams {
  MlpParams encoder;
  std::array<MlpParams, kMessageLayers> layers;
  MlpParams head;

  void append_tensors(TensorList& out);
  void append_tensors(ConstTensorList& out) const;

  friend bool operator==(const TacGnnParams&, const TacGnnParams&) = default;
};

TacGnnParams init_tacgnn(const TacGnnConfig& config, std::uint64_t seed);
TacGnnParams zeros_like(const TacGnnParams& params);

// Encoder applied row-wise to node_inputs(points).
Matrix encode_nodes(const MlpParams& encoder, const PointSet& points, double coord_scale);

struct TacGnnCache {
  MlpCache encoder;
  std::array<MessageLayerCache, kMessageLayers> layers;
  // Rows of the layer-l output that survive downsampling, in order.
  std::array<std::vector<std::size_t>, kMessageLayers> survivors;
  bool downsampled = true;
  RowMax readout;
  std::size_t readout_rows = 0;
  MlpCache head;
  bool empty_frame = false;
};

struct TacGnnForward {
  std::vector<double> output;
  // Node count after each message layer's downsampling step.
  std::array<std::size_t, kMessageLayers> node_counts{};
  std::vector<double> global_feature;
  TacGnnCache cache;
};

// Hierarchical forward pass over an activated frame. An empty frame reads out
// a zero global feature and still runs the head.
TacGnnForward tacgnn_forward(const TacGnnParams& params, const TacGnnConfig& config,
                             const PointSet& frame);

// Accumulates parameter gradients given d loss / d output.
void tacgnn_backward(const TacGnnParams& params, const TacGnnCache& cache,
                     std::span<const double> output_gradient, TacGnnParams& gradients);

// Static-graph variant used by the GCN baseline: message layers run over a
// fixed graph with no downsampling.
TacGnnForward static_graph_forward(const TacGnnParams& params, const TacGnnConfig& config,
                                   const TactileGraph& graph);

}  // namespace taxelgraph
