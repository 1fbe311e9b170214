#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "sybilnet/numcore/tensor.hpp"

namespace sybilnet::num {

class Tape;
class Gradients;

// Handle to a tensor recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Receives the gradient of the recorded output and accumulates into the
// gradients of its inputs. Entries of `input_grads` are null for inputs that
// do not lead to a parameter.
using BackwardFn =
    std::function<void(const Tape& tape, const Tensor& out_grad, std::span<Tensor* const> input_grads)>;

Gradients backward(Tape& tape, Var loss);

// Append-only record of primitive applications. Nodes are stored in creation
// order, which is a topological order by construction.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  // Throws Error(Numeric) naming `op` if `value` holds a non-finite entry.
  Var record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  bool is_parameter(Var v) const { return nodes_.at(v.id()).parameter; }
  bool needs_grad(Var v) const { return nodes_.at(v.id()).needs_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend class Gradients;
  friend Gradients backward(Tape& tape, Var loss);

  struct Node {
    Tensor value;
    bool parameter = false;
    bool needs_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
};

// Gradients of a scalar loss with respect to every parameter on the tape.
class Gradients {
 public:
  const Tensor& operator[](Var parameter) const;
  bool contains(Var v) const { return grads_.count(v.id()) != 0; }
  std::size_t size() const noexcept { return grads_.size(); }

 private:
  friend Gradients backward(Tape& tape, Var loss);
  std::map<std::size_t, Tensor> grads_;
};

// Reverse sweep from a 1-element loss. Throws Error(Shape) otherwise.
Gradients backward(Tape& tape, Var loss);

Var matmul(Var a, Var b, Transpose ta = Transpose::No, Transpose tb = Transpose::No);
Var add(Var a, Var b);
Var multiply(Var a, Var b);
Var relu(Var x);
Var sigmoid(Var x);
Var tanh(Var x);
Var softmax(Var x);
Var mean_rows(Var x);
Var concat(const std::vector<Var>& parts);
Var slice(Var x, std::size_t col_begin, std::size_t col_end);
Var mse_loss(Var predicted, Var target);

}  // namespace sybilnet::num
