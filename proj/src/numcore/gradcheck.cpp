#include "sybilnet/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sybilnet::num {

namespace {

double evaluate(const ScalarFunction& f, const Tensor& point) {
  Tape tape;
  Var p = tape.constant(point);
  return f(tape, p).value()[0];
}

}  // namespace

GradCheckReport finite_diff_check(const ScalarFunction& f, const Tensor& point, double tolerance) {
  GradCheckReport report;
  Tensor analytic;
  {
    Tape tape;
    Var p = tape.parameter(point);
    Var loss = f(tape, p);
    analytic = backward(tape, loss)[p];
  }

  Tensor probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double x = point[i];
    probe[i] = x + kFiniteDiffStep;
    const double up = evaluate(f, probe);
    probe[i] = x - kFiniteDiffStep;
    const double down = evaluate(f, probe);
    probe[i] = x;

    const double numeric = (up - down) / (2.0 * kFiniteDiffStep);
    const double abs_err = std::abs(numeric - analytic[i]);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), kRelativeErrorFloor});
    const double rel_err = abs_err / denom;
    report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
    if (rel_err > report.max_relative_error) {
      report.max_relative_error = rel_err;
      report.worst_index = i;
    }
    ++report.checked;
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace sybilnet::num
