#include "taxelgraph/perception/cnn.h"

#include <stdexcept>
#include <string>

#include "taxelgraph/rng.h"

namespace taxelgraph {

namespace {

// One feature map: rows are grid cells (y * width + x), columns are channels.
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  Matrix values;
};

Matrix im2col(const FeatureMap& in) {
  const std::size_t h = in.height, w = in.width, c = in.values.cols();
  Matrix cols(h * w, 9 * c);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      auto dst = cols.row(y * w + x);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const long sy = static_cast<long>(y) + dy, sx = static_cast<long>(x) + dx;
          if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(w)) continue;
          auto src = in.values.row(static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx));
          const std::size_t offset = static_cast<std::size_t>((dy + 1) * 3 + (dx + 1)) * c;
          std::copy(src.begin(), src.end(), dst.begin() + offset);
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: sums column gradients back onto the input cells.
Matrix col2im(const Matrix& cols_grad, std::size_t h, std::size_t w, std::size_t c) {
  Matrix grad(h * w, c);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      auto src = cols_grad.row(y * w + x);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const long sy = static_cast<long>(y) + dy, sx = static_cast<long>(x) + dx;
          if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(w)) continue;
          auto dst = grad.row(static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx));
          const std::size_t offset = static_cast<std::size_t>((dy + 1) * 3 + (dx + 1)) * c;
          for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[offset + ch];
        }
      }
    }
  }
  return grad;
}

// conv -> ReLU -> 2x2 max pool.
FeatureMap conv_block(const FeatureMap& in, const Matrix& kernel, const Matrix& bias,
                      ConvCache& cache) {
  cache.columns = im2col(in);
  cache.activation = matmul(cache.columns, kernel);
  add_row_bias(cache.activation, bias);
  for (double& v : cache.activation.values()) {
    if (v < 0.0) v = 0.0;
  }
  const std::size_t c = kernel.cols();
  FeatureMap out{in.height / 2, in.width / 2, Matrix(in.height / 2 * (in.width / 2), c)};
  cache.pool_argmax.assign(out.values.size(), 0);
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      const std::size_t cell = y * out.width + x;
      const std::size_t sources[4] = {(2 * y) * in.width + 2 * x, (2 * y) * in.width + 2 * x + 1,
                                      (2 * y + 1) * in.width + 2 * x,
                                      (2 * y + 1) * in.width + 2 * x + 1};
      for (std::size_t ch = 0; ch < c; ++ch) {
        std::size_t best = sources[0];
        for (int s = 1; s < 4; ++s) {
          if (cache.activation(sources[s], ch) > cache.activation(best, ch)) best = sources[s];
        }
        out.values(cell, ch) = cache.activation(best, ch);
        cache.pool_argmax[cell * c + ch] = best;
      }
    }
  }
  return out;
}

// Returns the gradient w.r.t. the block's im2col columns.
Matrix conv_block_backward(const ConvCache& cache, const Matrix& kernel, const Matrix& pooled_grad,
                           Matrix& kernel_grad, Matrix& bias_grad) {
  const std::size_t c = kernel.cols();
  Matrix grad(cache.activation.rows(), c);
  for (std::size_t cell = 0; cell < pooled_grad.rows(); ++cell) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t src = cache.pool_argmax[cell * c + ch];
      if (cache.activation(src, ch) > 0.0) grad(src, ch) += pooled_grad(cell, ch);
    }
  }
  kernel_grad += matmul_transpose_a(cache.columns, grad);
  bias_grad += column_sums(grad);
  return matmul_transpose_b(grad, kernel);
}

void check_grid(GridShape grid) {
  if (grid.rows == 0 || grid.cols == 0 || grid.rows % 4 != 0 || grid.cols % 4 != 0) {
    throw std::invalid_argument("cnn: grid sides must be positive multiples of 4");
  }
}

}  // namespace

GridShape default_grid(std::size_t taxel_count) {
  std::size_t side = 4;
  while (side * side < taxel_count) side += 4;
  return {side, side};
}

void CnnParams::append_tensors(TensorList& out) {
  out.push_back({"conv1.kernel", &conv1_kernel});
  out.push_back({"conv1.bias", &conv1_bias});
  out.push_back({"conv2.kernel", &conv2_kernel});
  out.push_back({"conv2.bias", &conv2_bias});
  head.append_tensors("head", out);
}

void CnnParams::append_tensors(ConstTensorList& out) const {
  out.push_back({"conv1.kernel", &conv1_kernel});
  out.push_back({"conv1.bias", &conv1_bias});
  out.push_back({"conv2.kernel", &conv2_kernel});
  out.push_back({"conv2.bias", &conv2_bias});
  head.append_tensors("head", out);
}

CnnParams init_cnn(const CnnConfig& config, std::uint64_t seed) {
  check_grid(config.grid);
  CnnParams p;
  p.grid = config.grid;
  p.conv1_kernel =
      kaiming_init(std::vector<std::size_t>{9, config.conv1_channels}, derive_seed(seed, 0))
          .weights[0];
  p.conv1_bias = Matrix(1, config.conv1_channels);
  p.conv2_kernel = kaiming_init(std::vector<std::size_t>{9 * config.conv1_channels,
                                                         config.conv2_channels},
                                derive_seed(seed, 1))
                       .weights[0];
  p.conv2_bias = Matrix(1, config.conv2_channels);
  const std::size_t flat = (config.grid.rows / 4) * (config.grid.cols / 4) * config.conv2_channels;
  std::vector<std::size_t> head_sizes = {flat};
  head_sizes.insert(head_sizes.end(), config.head_hidden.begin(), config.head_hidden.end());
  head_sizes.push_back(config.output_dim);
  p.head = kaiming_init(head_sizes, derive_seed(seed, 2));
  return p;
}

CnnParams zeros_like(const CnnParams& params) {
  CnnParams g;
  g.grid = params.grid;
  g.conv1_kernel = Matrix(params.conv1_kernel.rows(), params.conv1_kernel.cols());
  g.conv1_bias = Matrix(1, params.conv1_bias.cols());
  g.conv2_kernel = Matrix(params.conv2_kernel.rows(), params.conv2_kernel.cols());
  g.conv2_bias = Matrix(1, params.conv2_bias.cols());
  g.head = zeros_like(params.head);
  return g;
}

Matrix pack_grid(std::span<const double> raw, GridShape grid) {
  if (raw.size() > grid.area()) {
    throw std::invalid_argument("pack_grid: " + std::to_string(raw.size()) +
                                " taxels do not fit a " + std::to_string(grid.rows) + "x" +
                                std::to_string(grid.cols) + " grid");
  }
  Matrix cells(grid.area(), 1);
  std::copy(raw.begin(), raw.end(), cells.values().begin());
  return cells;
}

CnnForward cnn_forward(const CnnParams& params, std::span<const double> raw) {
  check_grid(params.grid);
  CnnForward out;
  FeatureMap input{params.grid.rows, params.grid.cols, pack_grid(raw, params.grid)};
  FeatureMap h1 = conv_block(input, params.conv1_kernel, params.conv1_bias, out.cache.conv1);
  FeatureMap h2 = conv_block(h1, params.conv2_kernel, params.conv2_bias, out.cache.conv2);
  const Matrix flat = Matrix::row_vector(h2.values.values());
  MlpForward head = mlp_forward(params.head, flat);
  out.output.assign(head.output.values().begin(), head.output.values().end());
  out.cache.head = std::move(head.cache);
  return out;
}

void cnn_backward(const CnnParams& params, const CnnCache& cache,
                  std::span<const double> output_gradient, CnnParams& gradients) {
  const Matrix flat_grad =
      mlp_backward(params.head, cache.head, Matrix::row_vector(output_gradient), gradients.head);
  const std::size_t c2 = params.conv2_kernel.cols();
  const Matrix pooled2_grad(flat_grad.size() / c2, c2,
                            std::vector<double>(flat_grad.values().begin(), flat_grad.values().end()));
  const Matrix cols2_grad = conv_block_backward(cache.conv2, params.conv2_kernel, pooled2_grad,
                                                gradients.conv2_kernel, gradients.conv2_bias);
  const std::size_t h1 = params.grid.rows / 2, w1 = params.grid.cols / 2;
  const Matrix pooled1_grad = col2im(cols2_grad, h1, w1, params.conv1_kernel.cols());
  conv_block_backward(cache.conv1, params.conv1_kernel, pooled1_grad, gradients.conv1_kernel,
                      gradients.conv1_bias);
}

}  // namespace taxelgraph
