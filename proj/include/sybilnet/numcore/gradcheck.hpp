#pragma once

#include <cstddef>
#include <functional>

#include "sybilnet/numcore/tape.hpp"

namespace sybilnet::num {

// Builds a scalar loss on `tape` from the parameter variable it is given.
using ScalarFunction = std::function<Var(Tape& tape, Var parameter)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool passed = true;
};

inline constexpr double kFiniteDiffStep = 1e-5;
// Gradients smaller than this are compared on an absolute scale.
inline constexpr double kRelativeErrorFloor = 1e-6;

// Compares tape gradients of `f` at `point` against central differences with
// step 1e-5. Failures are reported, never thrown.
GradCheckReport finite_diff_check(const ScalarFunction& f, const Tensor& point, double tolerance);

}  // namespace sybilnet::num
