#include "taxelgraph/diffcore/adam.h"

#include <cmath>
#include <stdexcept>

#include "taxelgraph/errors.h"

namespace taxelgraph {

void adam_step(const TensorList& params, const ConstTensorList& gradients, AdamState& state) {
  if (params.size() != gradients.size()) {
    throw std::invalid_argument("adam_step: parameter/gradient count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].tensor->same_shape(*gradients[i].tensor)) {
      throw std::invalid_argument("adam_step: shape mismatch for " + params[i].name);
    }
    if (!gradients[i].tensor->all_finite()) {
      throw NumericError("adam_step: non-finite gradient for " + params[i].name);
    }
  }
  if (state.step_count == 0) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.tensor->rows(), p.tensor->cols());
      state.second_moment.emplace_back(p.tensor->rows(), p.tensor->cols());
    }
  } else if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: state belongs to a different parameter set");
  }

  ++state.step_count;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].tensor->values();
    auto g = gradients[i].tensor->values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace taxelgraph
