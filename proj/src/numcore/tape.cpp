#include "sybilnet/numcore/tape.hpp"

#include <cmath>

#include "sybilnet/error.hpp"

namespace sybilnet::num {

namespace {

Tape& tape_of(Var a) {
  if (a.tape() == nullptr) throw Error(ErrorKind::Parameter, "variable is not attached to a tape");
  return *a.tape();
}

Tape& common_tape(Var a, Var b) {
  if (a.tape() != b.tape()) throw Error(ErrorKind::Parameter, "variables recorded on different tapes");
  return tape_of(a);
}

// Sums `grad` over the dimensions along which `acc` was broadcast.
void accumulate_reduced(Tensor& acc, const Tensor& grad) {
  auto av = acc.values();
  auto gv = grad.values();
  if (acc.shape() == grad.shape()) {
    for (std::size_t i = 0; i < av.size(); ++i) av[i] += gv[i];
    return;
  }
  const std::size_t rows = grad.rows();
  const std::size_t cols = grad.cols();
  const std::size_t rs = acc.rows() == 1 ? 0 : acc.cols();
  const std::size_t cs = acc.cols() == 1 ? 0 : 1;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) av[r * rs + c * cs] += gv[r * cols + c];
  }
}

void accumulate(Tensor& acc, const Tensor& grad) {
  auto av = acc.values();
  auto gv = grad.values();
  for (std::size_t i = 0; i < av.size(); ++i) av[i] += gv[i];
}

}  // namespace

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw Error(ErrorKind::Parameter, "variable is not attached to a tape");
  return tape_->value(id_);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), false, false, {}, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Tensor value) {
  if (!value.all_finite()) throw Error(ErrorKind::Numeric, "non-finite parameter value");
  nodes_.push_back(Node{std::move(value), true, true, {}, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) {
    throw Error(ErrorKind::Numeric, std::string("non-finite value produced by ") + op);
  }
  Node node;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (Var v : inputs) {
    if (v.tape() != this) throw Error(ErrorKind::Parameter, std::string(op) + ": input from another tape");
    node.inputs.push_back(v.id());
    node.needs_grad = node.needs_grad || nodes_[v.id()].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Gradients::operator[](Var parameter) const {
  auto it = grads_.find(parameter.id());
  if (it == grads_.end()) throw Error(ErrorKind::Parameter, "no gradient recorded for variable");
  return it->second;
}

Gradients backward(Tape& tape, Var loss) {
  if (loss.tape() != &tape) throw Error(ErrorKind::Parameter, "loss was not recorded on this tape");
  auto& nodes = tape.nodes_;
  if (nodes[loss.id()].value.size() != 1) {
    throw Error(ErrorKind::Shape, "backward requires a scalar loss, got " + nodes[loss.id()].value.shape_string());
  }

  std::vector<Tensor> grads(loss.id() + 1);
  grads[loss.id()] = Tensor(nodes[loss.id()].value.shape(), 1.0);

  std::vector<Tensor*> input_grads;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    auto& node = nodes[id];
    if (!node.needs_grad || !node.backward || grads[id].empty()) continue;
    input_grads.clear();
    for (std::size_t in : node.inputs) {
      if (!nodes[in].needs_grad) {
        input_grads.push_back(nullptr);
        continue;
      }
      if (grads[in].empty() && !nodes[in].value.empty()) grads[in] = Tensor(nodes[in].value.shape(), 0.0);
      input_grads.push_back(&grads[in]);
    }
    node.backward(tape, grads[id], input_grads);
    // Intermediate gradients are no longer needed once propagated.
    if (!node.parameter) grads[id] = Tensor();
  }

  Gradients out;
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (!nodes[id].parameter) continue;
    if (id < grads.size() && !grads[id].empty()) {
      out.grads_.emplace(id, std::move(grads[id]));
    } else {
      out.grads_.emplace(id, Tensor(nodes[id].value.shape(), 0.0));
    }
  }
  return out;
}

Var matmul(Var a, Var b, Transpose ta, Transpose tb) {
  Tape& tape = common_tape(a, b);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return tape.record("matmul", matmul(a.value(), b.value(), ta, tb), {a, b},
                     [ia, ib, ta, tb](const Tape& t, const Tensor& g, std::span<Tensor* const> in) {
                       const Tensor& av = t.value(ia);
                       const Tensor& bv = t.value(ib);
                       const bool tra = ta == Transpose::Yes;
                       const bool trb = tb == Transpose::Yes;
                       if (in[0]) {
                         // C = op(A) op(B): dA = G op(B)^T, transposed back if A was.
                         Tensor da = tra ? matmul(bv, g, trb ? Transpose::Yes : Transpose::No, Transpose::Yes)
                                         : matmul(g, bv, Transpose::No, trb ? Transpose::No : Transpose::Yes);
                         accumulate(*in[0], da);
                       }
                       if (in[1]) {
                         Tensor db = trb ? matmul(g, av, Transpose::Yes, tra ? Transpose::Yes : Transpose::No)
                                         : matmul(av, g, tra ? Transpose::No : Transpose::Yes, Transpose::No);
                         accumulate(*in[1], db);
                       }
                     });
}

Var add(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  return tape.record("add", add(a.value(), b.value()), {a, b},
                     [](const Tape&, const Tensor& g, std::span<Tensor* const> in) {
                       if (in[0]) accumulate_reduced(*in[0], g);
                       if (in[1]) accumulate_reduced(*in[1], g);
                     });
}

Var multiply(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return tape.record("multiply", multiply(a.value(), b.value()), {a, b},
                     [ia, ib](const Tape& t, const Tensor& g, std::span<Tensor* const> in) {
                       if (in[0]) accumulate_reduced(*in[0], multiply(g, t.value(ib)));
                       if (in[1]) accumulate_reduced(*in[1], multiply(g, t.value(ia)));
                     });
}

Var relu(Var x) {
  Tape& tape = tape_of(x);
  const std::size_t ix = x.id();
  return tape.record("relu", relu(x.value()), {x},
                     [ix](const Tape& t, const Tensor& g, std::span<Tensor* const> in) {
                       auto xv = t.value(ix).values();
                       auto gv = g.values();
                       auto dv = in[0]->values();
                       for (std::size_t i = 0; i < dv.size(); ++i) {
                         if (xv[i] > 0.0) dv[i] += gv[i];
                       }
                     });
}

// The output of the node being recorded lands at index tape.size().
Var sigmoid(Var x) {
  Tape& tape = tape_of(x);
  const std::size_t io = tape.size();
  return tape.record("sigmoid", sigmoid(x.value()), {x},
                     [io](const Tape& t, const Tensor& g, std::span<Tensor* const> in) {
                       auto yv = t.value(io).values();
                       auto gv = g.values();
                       auto dv = in[0]->values();
                       for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += gv[i] * yv[i] * (1.0 - yv[i]);
                     });
}

Var tanh(Var x) {
  Tape& tape = tape_of(x);
  const std::size_t io = tape.size();
  return tape.record("tanh", tanh(x.value()), {x},
                     [io](const Tape& t, const Tensor& g, std::span<Tensor* const> in) {
                       auto yv = t.value(io).values();
                       auto gv = g.values();
                       auto dv = in[0]->values();
                       for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += gv[i] * (1.0 - yv[i] * yv[i]);
                     });
}

Var softmax(Var x) {
  Tape& tape = tape_of(x);
  const std::size_t io = tape.size();
  return tape.record("softmax", softmax(x.value()), {x},
                     [io](const Tape& t, const Tensor& g, std::span<Tensor* const> in) {
                       const Tensor& y = t.value(io);
                       const std::size_t rows = y.rows();
                       const std::size_t cols = y.cols();
                       auto yv = y.values();
                       auto gv = g.values();
                       auto dv = in[0]->values();
                       for (std::size_t r = 0; r < rows; ++r) {
                         const std::size_t base = r * cols;
                         double dot = 0.0;
                         for (std::size_t c = 0; c < cols; ++c) dot += yv[base + c] * gv[base + c];
                         for (std::size_t c = 0; c < cols; ++c) {
                           const double yc = yv[base + c];
                           if (yc != 0.0) dv[base + c] += yc * (gv[base + c] - dot);
                         }
                       }
                     });
}

Var mean_rows(Var x) {
  Tape& tape = tape_of(x);
  const std::size_t rows = x.value().rows();
  return tape.record("mean_rows", mean_rows(x.value()), {x},
                     [rows](const Tape&, const Tensor& g, std::span<Tensor* const> in) {
                       auto gv = g.values();
                       auto dv = in[0]->values();
                       const std::size_t cols = gv.size();
                       const double inv = 1.0 / static_cast<double>(rows);
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t c = 0; c < cols; ++c) dv[r * cols + c] += gv[c] * inv;
                       }
                     });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(ErrorKind::Shape, "concat: no inputs");
  Tape& tape = tape_of(parts.front());
  std::vector<const Tensor*> values;
  std::vector<std::size_t> widths;
  for (Var p : parts) {
    if (p.tape() != &tape) throw Error(ErrorKind::Parameter, "concat: inputs recorded on different tapes");
    values.push_back(&p.value());
    widths.push_back(p.value().cols());
  }
  return tape.record("concat", concat(values), parts,
                     [widths](const Tape&, const Tensor& g, std::span<Tensor* const> in) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         if (in[k]) accumulate(*in[k], slice(g, offset, offset + widths[k]));
                         offset += widths[k];
                       }
                     });
}

Var slice(Var x, std::size_t col_begin, std::size_t col_end) {
  Tape& tape = tape_of(x);
  return tape.record("slice", slice(x.value(), col_begin, col_end), {x},
                     [col_begin](const Tape&, const Tensor& g, std::span<Tensor* const> in) {
                       const std::size_t rows = g.rows();
                       const std::size_t width = g.cols();
                       const std::size_t cols = in[0]->cols();
                       auto gv = g.values();
                       auto dv = in[0]->values();
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t c = 0; c < width; ++c) dv[r * cols + col_begin + c] += gv[r * width + c];
                       }
                     });
}

Var mse_loss(Var predicted, Var target) {
  Tape& tape = common_tape(predicted, target);
  const std::size_t ip = predicted.id();
  const std::size_t it = target.id();
  Tensor value({1, 1}, mse(predicted.value(), target.value()));
  return tape.record("mse_loss", std::move(value), {predicted, target},
                     [ip, it](const Tape& t, const Tensor& g, std::span<Tensor* const> in) {
                       auto pv = t.value(ip).values();
                       auto tv = t.value(it).values();
                       const double scale = 2.0 * g[0] / static_cast<double>(pv.size());
                       for (std::size_t i = 0; i < pv.size(); ++i) {
                         const double d = scale * (pv[i] - tv[i]);
                         if (in[0]) (*in[0])[i] += d;
                         if (in[1]) (*in[1])[i] -= d;
                       }
                     });
}

}  // namespace sybilnet::num
