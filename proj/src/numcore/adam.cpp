#include "sybilnet/numcore/adam.hpp"

#include <cmath>

#include "sybilnet/error.hpp"

namespace sybilnet::num {

AdamState make_adam_state(std::span<const Tensor> params, AdamHyper hyper) {
  AdamState state;
  state.hyper = hyper;
  for (const Tensor& p : params) {
    state.first_moment.emplace_back(p.shape(), 0.0);
    state.second_moment.emplace_back(p.shape(), 0.0);
  }
  return state;
}

void adam_step(AdamState& state, std::span<Tensor> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw Error(ErrorKind::Shape, "adam_step: " + std::to_string(params.size()) + " parameters, " +
                                      std::to_string(grads.size()) + " gradients, " +
                                      std::to_string(state.first_moment.size()) + " accumulators");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape() || params[i].shape() != state.first_moment[i].shape()) {
      throw Error(ErrorKind::Shape, "adam_step: parameter " + params[i].shape_string() + " vs gradient " +
                                        grads[i].shape_string());
    }
    if (!grads[i].all_finite()) {
      throw Error(ErrorKind::Numeric, "adam_step: non-finite gradient for parameter block " + std::to_string(i));
    }
  }

  const AdamHyper& h = state.hyper;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values();
    auto g = grads[i].values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = h.beta1 * m[j] + (1.0 - h.beta1) * g[j];
      v[j] = h.beta2 * v[j] + (1.0 - h.beta2) * g[j] * g[j];
      p[j] -= h.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + h.epsilon);
    }
  }
}

}  // namespace sybilnet::num
