#include "taxelgraph/perception/message_layer.h"

#include <stdexcept>
#include <string>

namespace taxelgraph {

Matrix node_inputs(const PointSet& points, double coord_scale) {
  Matrix x(points.size(), 4);
  for (std::size_t i = 0; i < points.size(); ++i) {
    x(i, 0) = points[i].position.x * coord_scale;
    x(i, 1) = points[i].position.y * coord_scale;
    x(i, 2) = points[i].position.z * coord_scale;
    x(i, 3) = points[i].pressure;
  }
  return x;
}

MessageLayerForward message_layer_forward(const MlpParams& phi, const TactileGraph& graph,
                                          double coord_scale) {
  const std::size_t n = graph.node_count();
  const std::size_t c = graph.features.cols();
  if (phi.input_width() != 2 * c + 3) {
    throw std::invalid_argument("message_layer: phi expects input width " +
                                std::to_string(phi.input_width()) + " but features give " +
                                std::to_string(2 * c + 3));
  }
  if (graph.features.rows() != n) {
    throw std::invalid_argument("message_layer: feature rows != node count");
  }
  MessageLayerForward out;
  MessageLayerCache& cache = out.cache;
  cache.node_count = n;
  cache.input_channels = c;
  cache.output_channels = phi.output_width();
  if (n == 0) {
    out.features = Matrix(0, phi.output_width());
    return out;
  }

  if (n == 1) {
    cache.edge_source = {0};
    cache.edge_target = {0};
  } else {
    for (const Edge& e : graph.edges) {
      cache.edge_source.push_back(e.source);
      cache.edge_target.push_back(e.target);
    }
  }
  const std::size_t rows = cache.edge_source.size();
  Matrix edge_input(rows, 2 * c + 3);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t i = cache.edge_target[r];
    const std::size_t j = cache.edge_source[r];
    auto dst = edge_input.row(r);
    auto hi = graph.features.row(i);
    auto hj = graph.features.row(j);
    std::copy(hi.begin(), hi.end(), dst.begin());
    std::copy(hj.begin(), hj.end(), dst.begin() + c);
    const Vec3 rel = graph.points[j].position - graph.points[i].position;
    dst[2 * c] = rel.x * coord_scale;
    dst[2 * c + 1] = rel.y * coord_scale;
    dst[2 * c + 2] = rel.z * coord_scale;
  }

  MlpForward messages = mlp_forward(phi, edge_input);
  const std::size_t cout = phi.output_width();
  out.features = Matrix(n, cout);
  cache.argmax_row.assign(n * cout, rows);
  // Edge rows are grouped by target, so the first row seen for a node is its
  // lowest row and strict '>' keeps ties there.
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t i = cache.edge_target[r];
    auto msg = messages.output.row(r);
    for (std::size_t ch = 0; ch < cout; ++ch) {
      std::size_t& best = cache.argmax_row[i * cout + ch];
      if (best == rows || msg[ch] > out.features(i, ch)) {
        best = r;
        out.features(i, ch) = msg[ch];
      }
    }
  }
  cache.mlp = std::move(messages.cache);
  return out;
}

Matrix message_layer_backward(const MlpParams& phi, const MessageLayerCache& cache,
                              const Matrix& output_gradient, MlpParams& phi_gradient) {
  const std::size_t n = cache.node_count;
  const std::size_t c = cache.input_channels;
  const std::size_t cout = cache.output_channels;
  if (output_gradient.rows() != n || output_gradient.cols() != cout) {
    throw std::invalid_argument("message_layer_backward: gradient shape mismatch");
  }
  Matrix feature_grad(n, c);
  if (n == 0) return feature_grad;
  const std::size_t rows = cache.edge_source.size();
  Matrix message_grad(rows, cout);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < cout; ++ch) {
      message_grad(cache.argmax_row[i * cout + ch], ch) += output_gradient(i, ch);
    }
  }
  const Matrix input_grad = mlp_backward(phi, cache.mlp, message_grad, phi_gradient);
  for (std::size_t r = 0; r < rows; ++r) {
    auto g = input_grad.row(r);
    auto gi = feature_grad.row(cache.edge_target[r]);
    auto gj = feature_grad.row(cache.edge_source[r]);
    for (std::size_t ch = 0; ch < c; ++ch) {
      gi[ch] += g[ch];
      gj[ch] += g[c + ch];
    }
  }
  return feature_grad;
}

}  // namespace taxelgraph
