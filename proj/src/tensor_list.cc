#include "taxelgraph/diffcore/tensor_list.h"

#include <cmath>
#include <stdexcept>

namespace taxelgraph {

ConstTensorList const_view(const TensorList& tensors) {
  ConstTensorList out;
  out.reserve(tensors.size());
  for (const auto& t : tensors) out.push_back({t.name, t.tensor});
  return out;
}

std::size_t total_size(const ConstTensorList& tensors) {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.tensor->size();
  return n;
}

std::vector<double> flatten(const ConstTensorList& tensors) {
  std::vector<double> flat;
  flat.reserve(total_size(tensors));
  for (const auto& t : tensors) {
    auto values = t.tensor->values();
    flat.insert(flat.end(), values.begin(), values.end());
  }
  return flat;
}

void unflatten(const std::vector<double>& flat, const TensorList& tensors) {
  std::size_t offset = 0;
  for (const auto& t : tensors) {
    auto values = t.tensor->values();
    if (offset + values.size() > flat.size()) {
      throw std::invalid_argument("unflatten: flat vector too short");
    }
    for (double& v : values) v = flat[offset++];
  }
  if (offset != flat.size()) throw std::invalid_argument("unflatten: flat vector too long");
}

void zero_all(const TensorList& tensors) {
  for (const auto& t : tensors) t.tensor->fill(0.0);
}

void scale_all(const TensorList& tensors, double factor) {
  for (const auto& t : tensors) *t.tensor *= factor;
}

double global_norm(const ConstTensorList& tensors) {
  double sq = 0.0;
  for (const auto& t : tensors) {
    for (double v : t.tensor->values()) sq += v * v;
  }
  return std::sqrt(sq);
}

bool all_finite(const ConstTensorList& tensors) {
  for (const auto& t : tensors) {
    if (!t.tensor->all_finite()) return false;
  }
  return true;
}

}  // namespace taxelgraph
