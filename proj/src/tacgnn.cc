#include "taxelgraph/perception/tacgnn.h"

#include <stdexcept>

#include "taxelgraph/rng.h"

namespace taxelgraph {

void TacGnnParams::append_tensors(TensorList& out) {
  encoder.append_tensors("encoder", out);
  for (std::size_t l = 0; l < kMessageLayers; ++l) {
    layers[l].append_tensors("phi" + std::to_string(l), out);
  }
  head.append_tensors("head", out);
}

void TacGnnParams::append_tensors(ConstTensorList& out) const {
  encoder.append_tensors("encoder", out);
  for (std::size_t l = 0; l < kMessageLayers; ++l) {
    layers[l].append_tensors("phi" + std::to_string(l), out);
  }
  head.append_tensors("head", out);
}

TacGnnParams init_tacgnn(const TacGnnConfig& config, std::uint64_t seed) {
  if (config.channels == 0 || config.output_dim == 0) {
    throw std::invalid_argument("init_tacgnn: channels and output_dim must be >= 1");
  }
  const std::size_t c = config.channels;
  TacGnnParams p;
  p.encoder = kaiming_init(std::vector<std::size_t>{4, c}, derive_seed(seed, 0));
  for (std::size_t l = 0; l < kMessageLayers; ++l) {
    p.layers[l] = kaiming_init(std::vector<std::size_t>{2 * c + 3, c, c}, derive_seed(seed, 1 + l));
  }
  std::vector<std::size_t> head_sizes = {c};
  head_sizes.insert(head_sizes.end(), config.head_hidden.begin(), config.head_hidden.end());
  head_sizes.push_back(config.output_dim);
  p.head = kaiming_init(head_sizes, derive_seed(seed, 1 + kMessageLayers));
  return p;
}

TacGnnParams zeros_like(const TacGnnParams& params) {
  TacGnnParams g;
  g.encoder = zeros_like(params.encoder);
  for (std::size_t l = 0; l < kMessageLayers; ++l) g.layers[l] = zeros_like(params.layers[l]);
  g.head = zeros_like(params.head);
  return g;
}

Matrix encode_nodes(const MlpParams& encoder, const PointSet& points, double coord_scale) {
  if (points.empty()) return Matrix(0, encoder.output_width());
  return mlp_apply(encoder, node_inputs(points, coord_scale));
}

namespace {

// Shared tail: global max readout over the remaining nodes, then the head.
void readout_and_head(const TacGnnParams& params, const Matrix& final_features,
                      TacGnnForward& out) {
  const std::size_t c = params.head.input_width();
  Matrix global(1, c);
  if (final_features.rows() > 0) {
    out.cache.readout = max_reduce_rows(final_features);
    out.cache.readout_rows = final_features.rows();
    std::copy(out.cache.readout.values.begin(), out.cache.readout.values.end(),
              global.values().begin());
  }
  out.global_feature.assign(global.values().begin(), global.values().end());
  MlpForward head = mlp_forward(params.head, global);
  out.output.assign(head.output.values().begin(), head.output.values().end());
  out.cache.head = std::move(head.cache);
}

TacGnnForward run_layers(const TacGnnParams& params, const TacGnnConfig& config,
                         TactileGraph graph, bool downsample) {
  TacGnnForward out;
  out.cache.downsampled = downsample;
  out.cache.empty_frame = graph.node_count() == 0;
  if (out.cache.empty_frame) {
    readout_and_head(params, Matrix(0, params.head.input_width()), out);
    return out;
  }
  MlpForward encoded = mlp_forward(params.encoder, node_inputs(graph.points, config.coord_scale));
  graph.features = std::move(encoded.output);
  out.cache.encoder = std::move(encoded.cache);

  for (std::size_t l = 0; l < kMessageLayers; ++l) {
    MessageLayerForward layer = message_layer_forward(params.layers[l], graph, config.coord_scale);
    out.cache.layers[l] = std::move(layer.cache);
    graph.features = std::move(layer.features);
    if (downsample) {
      graph = downsample_graph(graph, config.sampling_ratio, out.cache.survivors[l]);
    }
    out.node_counts[l] = graph.node_count();
  }
  readout_and_head(params, graph.features, out);
  return out;
}

}  // namespace

TacGnnForward tacgnn_forward(const TacGnnParams& params, const TacGnnConfig& config,
                             const PointSet& frame) {
  if (params.encoder.output_width() != config.channels ||
      params.head.output_width() != config.output_dim) {
    throw std::invalid_argument("tacgnn_forward: params do not match config");
  }
  TactileGraph graph = build_knn_graph(frame, config.neighbors);
  return run_layers(params, config, std::move(graph), true);
}

TacGnnForward static_graph_forward(const TacGnnParams& params, const TacGnnConfig& config,
                                   const TactileGraph& graph) {
  return run_layers(params, config, graph, false);
}

void tacgnn_backward(const TacGnnParams& params, const TacGnnCache& cache,
                     std::span<const double> output_gradient, TacGnnParams& gradients) {
  const Matrix out_grad = Matrix::row_vector(output_gradient);
  const Matrix global_grad = mlp_backward(params.head, cache.head, out_grad, gradients.head);
  if (cache.empty_frame) return;

  Matrix grad = max_reduce_rows_backward(cache.readout, global_grad.values(), cache.readout_rows);
  for (std::size_t l = kMessageLayers; l-- > 0;) {
    const MessageLayerCache& layer = cache.layers[l];
    Matrix layer_out_grad;
    if (cache.downsampled) {
      // Survivors carry their rows forward; dropped nodes get no gradient.
      layer_out_grad = Matrix(layer.node_count, layer.output_channels);
      const auto& kept = cache.survivors[l];
      for (std::size_t r = 0; r < kept.size(); ++r) {
        auto src = grad.row(r);
        auto dst = layer_out_grad.row(kept[r]);
        for (std::size_t ch = 0; ch < src.size(); ++ch) dst[ch] += src[ch];
      }
    } else {
      layer_out_grad = std::move(grad);
    }
    grad = message_layer_backward(params.layers[l], layer, layer_out_grad, gradients.layers[l]);
  }
  mlp_backward(params.encoder, cache.encoder, grad, gradients.encoder);
}

}  // namespace taxelgraph
