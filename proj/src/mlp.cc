#include "taxelgraph/diffcore/mlp.h"

#include <cmath>
#include <random>
#include <stdexcept>

namespace taxelgraph {

namespace {

void validate_sizes(std::span<const std::size_t> layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("MLP needs at least an input and an output width");
  }
  for (std::size_t w : layer_sizes) {
    if (w == 0) throw std::invalid_argument("MLP layer widths must be >= 1");
  }
}

void apply_relu(Matrix& m) {
  for (double& v : m.values()) {
    if (v < 0.0) v = 0.0;
  }
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return n;
}

void MlpParams::append_tensors(const std::string& prefix, TensorList& out) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back({prefix + ".w" + std::to_string(l), &weights[l]});
    out.push_back({prefix + ".b" + std::to_string(l), &biases[l]});
  }
}

void MlpParams::append_tensors(const std::string& prefix, ConstTensorList& out) const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back({prefix + ".w" + std::to_string(l), &weights[l]});
    out.push_back({prefix + ".b" + std::to_string(l), &biases[l]});
  }
}

MlpParams zero_mlp(std::span<const std::size_t> layer_sizes) {
  validate_sizes(layer_sizes);
  MlpParams p;
  p.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    p.weights.emplace_back(layer_sizes[l], layer_sizes[l + 1]);
    p.biases.emplace_back(1, layer_sizes[l + 1]);
  }
  return p;
}

MlpParams zeros_like(const MlpParams& params) { return zero_mlp(params.layer_sizes); }

MlpParams kaiming_init(std::span<const std::size_t> layer_sizes, std::uint64_t seed) {
  MlpParams p = zero_mlp(layer_sizes);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double fan_in = static_cast<double>(layer_sizes[l]);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    for (double& w : p.weights[l].values()) w = normal(rng);
  }
  return p;
}

MlpForward mlp_forward(const MlpParams& params, const Matrix& input) {
  if (input.cols() != params.input_width()) {
    throw std::invalid_argument("mlp_forward: input width " + std::to_string(input.cols()) +
                                " != " + std::to_string(params.input_width()));
  }
  MlpForward out;
  out.cache.params = &params;
  out.cache.layer_sizes = params.layer_sizes;
  out.cache.layer_inputs.reserve(params.layer_count());
  out.cache.pre_activations.reserve(params.layer_count());
  Matrix x = input;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    Matrix z = matmul(x, params.weights[l]);
    add_row_bias(z, params.biases[l]);
    out.cache.layer_inputs.push_back(std::move(x));
    x = z;
    if (l + 1 < params.layer_count()) apply_relu(x);
    out.cache.pre_activations.push_back(std::move(z));
  }
  out.output = std::move(x);
  return out;
}

Matrix mlp_apply(const MlpParams& params, const Matrix& input) {
  if (input.cols() != params.input_width()) {
    throw std::invalid_argument("mlp_apply: input width " + std::to_string(input.cols()) +
                                " != " + std::to_string(params.input_width()));
  }
  Matrix x = input;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    Matrix z = matmul(x, params.weights[l]);
    add_row_bias(z, params.biases[l]);
    if (l + 1 < params.layer_count()) apply_relu(z);
    x = std::move(z);
  }
  return x;
}

Matrix mlp_backward(const MlpParams& params, const MlpCache& cache,
                    const Matrix& output_gradient, MlpParams& gradients) {
  if (cache.params != &params || cache.layer_sizes != params.layer_sizes ||
      cache.layer_inputs.size() != params.layer_count()) {
    throw std::invalid_argument("mlp_backward: cache was not produced by these parameters");
  }
  if (gradients.layer_sizes != params.layer_sizes) {
    throw std::invalid_argument("mlp_backward: gradient buffer shape mismatch");
  }
  const Matrix& last = cache.pre_activations.back();
  if (!output_gradient.same_shape(last)) {
    throw std::invalid_argument("mlp_backward: output gradient shape mismatch");
  }
  Matrix grad = output_gradient;
  for (std::size_t li = params.layer_count(); li-- > 0;) {
    if (li + 1 < params.layer_count()) {
      // ReLU: zero gradient wherever the pre-activation was not positive.
      const Matrix& z = cache.pre_activations[li];
      auto g = grad.values();
      auto zv = z.values();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (zv[i] <= 0.0) g[i] = 0.0;
      }
    }
    gradients.weights[li] += matmul_transpose_a(cache.layer_inputs[li], grad);
    gradients.biases[li] += column_sums(grad);
    grad = matmul_transpose_b(grad, params.weights[li]);
  }
  return grad;
}

}  // namespace taxelgraph
