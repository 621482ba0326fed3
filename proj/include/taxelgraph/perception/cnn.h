#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "taxelgraph/diffcore/matrix.h"
#include "taxelgraph/diffcore/mlp.h"

namespace taxelgraph {

struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t area() const { return rows * cols; }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

// Smallest square grid whose side is a multiple of 4 and whose area covers
// taxel_count (two 2x2 poolings need a side divisible by 4).
GridShape default_grid(std::size_t taxel_count);

// Two 3x3 same-padded convolutions, each followed by ReLU and 2x2 max pooling,
// then an MLP on the flattened maps. Kernels are (9 * in_channels) x
// out_channels with rows ordered (dy, dx, in_channel).
struct CnnParams {
  GridShape grid;
  Matrix conv1_kernel;
  Matrix conv1_bias;
  Matrix conv2_kernel;
  Matrix conv2_bias;
  MlpParams head;

  void append_tensors(TensorList& out);
  void append_tensors(ConstTensorList& out) const;

  friend bool operator==(const CnnParams&, const CnnParams&) = default;
};

struct CnnConfig {
  GridShape grid;
  std::size_t conv1_channels = 32;
  std::size_t conv2_channels = 16;
  std::vector<std::size_t> head_hidden = {128};
  std::size_t output_dim = 3;
};

CnnParams init_cnn(const CnnConfig& config, std::uint64_t seed);
CnnParams zeros_like(const CnnParams& params);

// Raw values packed row-major (index = taxel id) into the grid, zero-padded.
Matrix pack_grid(std::span<const double> raw, GridShape grid);

struct ConvCache {
  Matrix columns;       // im2col input, (H * W) x (9 * in_channels)
  Matrix activation;    // post-ReLU output, (H * W) x out_channels
  std::vector<std::size_t> pool_argmax;  // per pooled (cell, channel): source row
};

struct CnnCache {
  ConvCache conv1;
  ConvCache conv2;
  MlpCache head;
};

struct CnnForward {
  std::vector<double> output;
  CnnCache cache;
};

CnnForward cnn_forward(const CnnParams& params, std::span<const double> raw);
void cnn_backward(const CnnParams& params, const CnnCache& cache,
                  std::span<const double> output_gradient, CnnParams& gradients);

}  // namespace taxelgraph
