#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "taxelgraph/diffcore/matrix.h"
#include "taxelgraph/diffcore/tensor_list.h"

namespace taxelgraph {

// Fully connected network: ReLU on hidden layers, identity on the output layer.
// weights[l] is (layer_sizes[l] x layer_sizes[l+1]) so a forward pass is x * W + b.
// Gradients use the same type, zero-initialized with matching shapes.
struct MlpParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;

  std::size_t input_width() const { return layer_sizes.front(); }
  std::size_t output_width() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;

  void append_tensors(const std::string& prefix, TensorList& out);
  void append_tensors(const std::string& prefix, ConstTensorList& out) const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Everything mlp_backward needs: the inputs to every layer and the
// pre-activations of every layer, plus the shape signature of the params.
struct MlpCache {
  const MlpParams* params = nullptr;
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> layer_inputs;
  std::vector<Matrix> pre_activations;
};

struct MlpForward {
  Matrix output;
  MlpCache cache;
};

// Zero-mean normal weights with variance 2/fan_in, zero biases.
MlpParams kaiming_init(std::span<const std::size_t> layer_sizes, std::uint64_t seed);
MlpParams zero_mlp(std::span<const std::size_t> layer_sizes);
MlpParams zeros_like(const MlpParams& params);

MlpForward mlp_forward(const MlpParams& params, const Matrix& input);
// Inference-only forward pass without a cache.
Matrix mlp_apply(const MlpParams& params, const Matrix& input);

// Accumulates (+=) parameter gradients into `gradients` and returns the
// gradient w.r.t. the forward input.
Matrix mlp_backward(const MlpParams& params, const MlpCache& cache,
                    const Matrix& output_gradient, MlpParams& gradients);

}  // namespace taxelgraph
