#pragma once

#include <cstdint>
#include <vector>

#include "taxelgraph/diffcore/matrix.h"
#include "taxelgraph/diffcore/tensor_list.h"

namespace taxelgraph {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moments are created lazily on the first step, shaped like the parameters.
struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step_count = 0;
};

// Bias-corrected Adam update. Throws NumericError on non-finite gradients
// before touching any parameter.
void adam_step(const TensorList& params, const ConstTensorList& gradients, AdamState& state);

}  // namespace taxelgraph
