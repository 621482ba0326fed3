#pragma once

#include <cstddef>
#include <vector>

#include "taxelgraph/diffcore/matrix.h"
#include "taxelgraph/diffcore/mlp.h"
#include "taxelgraph/pointset/pointset.h"

namespace taxelgraph {

// Per-node encoder input: [x, y, z] * coord_scale followed by pressure.
Matrix node_inputs(const PointSet& points, double coord_scale);

struct MessageLayerCache {
  MlpCache mlp;
  // Endpoints of every row of the edge input matrix.
  std::vector<std::size_t> edge_source;
  std::vector<std::size_t> edge_target;
  // Winning edge row for every (node, channel) of the output.
  std::vector<std::size_t> argmax_row;
  std::size_t node_count = 0;
  std::size_t input_channels = 0;
  std::size_t output_channels = 0;
};

struct MessageLayerForward {
  Matrix features;
  MessageLayerCache cache;
};

// One round of message passing over graph.features. Each edge j -> i computes
// phi([h_i, h_j, (x_j - x_i) * coord_scale]); each node keeps the column-wise
// max over its incoming messages. A lone node sends itself phi([h_i, h_i, 0]).
MessageLayerForward message_layer_forward(const MlpParams& phi, const TactileGraph& graph,
                                          double coord_scale);

// Accumulates phi gradients and returns the gradient w.r.t. graph.features.
Matrix message_layer_backward(const MlpParams& phi, const MessageLayerCache& cache,
                              const Matrix& output_gradient, MlpParams& phi_gradient);

}  // namespace taxelgraph
