#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sybilnet/numcore/tensor.hpp"

namespace sybilnet::num {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamHyper hyper;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

// Zeroed accumulators shaped like `params`.
AdamState make_adam_state(std::span<const Tensor> params, AdamHyper hyper);

// One bias-corrected Adam update applied in place. Throws Error(Numeric) on a
// non-finite gradient and Error(Shape) when params, grads, and accumulators
// are not aligned.
void adam_step(AdamState& state, std::span<Tensor> params, std::span<const Tensor> grads);

}  // namespace sybilnet::num
