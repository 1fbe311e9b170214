#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sybilnet::num {

// Dense row-major tensor of doubles. Most operations work on rank-2 tensors;
// a rank-1 tensor is treated as a single row.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row(std::vector<double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Rank-2 view; rank-1 tensors are 1 x n, scalars 1 x 1.
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  bool all_finite() const noexcept;
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

enum class Transpose { No, Yes };

// Forward semantics of the primitive set. Every function throws
// Error(ErrorKind::Shape) naming both shapes on incompatible inputs.
Tensor matmul(const Tensor& a, const Tensor& b, Transpose ta = Transpose::No,
              Transpose tb = Transpose::No);
// Elementwise with rank-2 broadcasting: each dimension of either operand
// must equal the result dimension or be 1 (so n x 1 + 1 x m is an outer sum).
Tensor add(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor softmax(const Tensor& x);
Tensor mean_rows(const Tensor& x);
Tensor concat(const std::vector<const Tensor*>& parts);
Tensor slice(const Tensor& x, std::size_t col_begin, std::size_t col_end);

double mse(const Tensor& predicted, const Tensor& target);

// Shape of a broadcast add/multiply, or throws.
std::vector<std::size_t> broadcast_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace sybilnet::num
