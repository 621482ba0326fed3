#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "taxelgraph/diffcore/matrix.h"

namespace taxelgraph {

struct NamedTensor {
  std::string name;
  Matrix* tensor;
};

struct ConstNamedTensor {
  std::string name;
  const Matrix* tensor;
};

// Ordered views over a model's learnable tensors. Parameters and their
// gradients enumerate in the same order so they can be zipped.
using TensorList = std::vector<NamedTensor>;
using ConstTensorList = std::vector<ConstNamedTensor>;

ConstTensorList const_view(const TensorList& tensors);
std::size_t total_size(const ConstTensorList& tensors);
std::vector<double> flatten(const ConstTensorList& tensors);
void unflatten(const std::vector<double>& flat, const TensorList& tensors);
void zero_all(const TensorList& tensors);
void scale_all(const TensorList& tensors, double factor);
double global_norm(const ConstTensorList& tensors);
bool all_finite(const ConstTensorList& tensors);

}  // namespace taxelgraph
