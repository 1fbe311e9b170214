#include "sybilnet/numcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "sybilnet/error.hpp"

namespace sybilnet::num {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(ErrorKind::Shape,
              std::string(op) + ": incompatible shapes " + a.shape_string() + " and " + b.shape_string());
}

template <typename F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.shape());
  auto src = x.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

template <typename F>
Tensor broadcast_binary(const Tensor& a, const Tensor& b, const char* op, F f) {
  if (a.shape() == b.shape()) {
    Tensor out(a.shape());
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = f(av[i], bv[i]);
    return out;
  }
  Tensor out(broadcast_shape(a, b, op));
  const std::size_t rows = out.rows();
  const std::size_t cols = out.cols();
  const std::size_t a_rs = a.rows() == 1 ? 0 : a.cols();
  const std::size_t a_cs = a.cols() == 1 ? 0 : 1;
  const std::size_t b_rs = b.rows() == 1 ? 0 : b.cols();
  const std::size_t b_cs = b.cols() == 1 ? 0 : 1;
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      ov[r * cols + c] = f(av[r * a_rs + c * a_cs], bv[r * b_rs + c * b_cs]);
    }
  }
  return out;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_)) {
    throw Error(ErrorKind::Shape, "data length " + std::to_string(data_.size()) +
                                      " does not match shape " + shape_string());
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
  return Tensor({rows, cols}, fill);
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(n * m);
  for (const auto& r : rows) {
    if (r.size() != m) throw Error(ErrorKind::Shape, "ragged rows in Tensor::from_rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({n, m}, std::move(data));
}

Tensor Tensor::row(std::vector<double> values) {
  const std::size_t m = values.size();
  return Tensor({1, m}, std::move(values));
}

std::size_t Tensor::rows() const noexcept {
  if (shape_.size() < 2) return 1;
  return shape_[0];
}

std::size_t Tensor::cols() const noexcept {
  if (shape_.empty()) return 1;
  if (shape_.size() == 1) return shape_[0];
  return data_.empty() ? shape_[1] : data_.size() / shape_[0];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

std::vector<std::size_t> broadcast_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return a.shape();
  if (a.rank() > 2 || b.rank() > 2) shape_error(op, a, b);
  auto dim = [&](std::size_t x, std::size_t y) -> std::size_t {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    shape_error(op, a, b);
  };
  return {dim(a.rows(), b.rows()), dim(a.cols(), b.cols())};
}

Tensor matmul(const Tensor& a, const Tensor& b, Transpose ta, Transpose tb) {
  if (a.rank() != 2 || b.rank() != 2) shape_error("matmul", a, b);
  const bool tra = ta == Transpose::Yes;
  const bool trb = tb == Transpose::Yes;
  const std::size_t m = tra ? a.cols() : a.rows();
  const std::size_t k = tra ? a.rows() : a.cols();
  const std::size_t kb = trb ? b.cols() : b.rows();
  const std::size_t n = trb ? b.rows() : b.cols();
  if (k != kb) shape_error("matmul", a, b);

  Tensor out = Tensor::matrix(m, n);
  auto av = a.values();
  auto bv = b.values();
  auto cv = out.values();
  const std::size_t acols = a.cols();
  const std::size_t bcols = b.cols();
  // Zero entries of the left operand are skipped; adjacency and attention
  // matrices are mostly zeros. The reduction order over k is fixed.
  if (!tra && !trb) {
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = &cv[i * n];
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = av[i * acols + p];
        if (aip == 0.0) continue;
        const double* brow = &bv[p * bcols];
        for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
      }
    }
  } else if (!tra && trb) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* arow = &av[i * acols];
      for (std::size_t j = 0; j < n; ++j) {
        const double* brow = &bv[j * bcols];
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
        cv[i * n + j] = s;
      }
    }
  } else if (tra && !trb) {
    for (std::size_t p = 0; p < k; ++p) {
      const double* arow = &av[p * acols];
      const double* brow = &bv[p * bcols];
      for (std::size_t i = 0; i < m; ++i) {
        const double api = arow[i];
        if (api == 0.0) continue;
        double* crow = &cv[i * n];
        for (std::size_t j = 0; j < n; ++j) crow[j] += api * brow[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += av[p * acols + i] * bv[j * bcols + p];
        cv[i * n + j] = s;
      }
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, "multiply", [](double x, double y) { return x * y; });
}

Tensor relu(const Tensor& x) {
  return map(x, [](double v) { return v > 0.0 ? v : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return map(x, [](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Tensor tanh(const Tensor& x) {
  return map(x, [](double v) { return std::tanh(v); });
}

Tensor softmax(const Tensor& x) {
  Tensor out(x.shape());
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = &xv[r * cols];
    double* o = &ov[r * cols];
    const double hi = *std::max_element(in, in + cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - hi);
      sum += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= sum;
  }
  return out;
}

Tensor mean_rows(const Tensor& x) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  if (rows == 0) throw Error(ErrorKind::Shape, "mean_rows: empty tensor " + x.shape_string());
  Tensor out = Tensor::matrix(1, cols);
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) ov[c] += xv[r * cols + c];
  }
  for (double& v : ov) v /= static_cast<double>(rows);
  return out;
}

Tensor concat(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw Error(ErrorKind::Shape, "concat: no inputs");
  const std::size_t rows = parts.front()->rows();
  std::size_t cols = 0;
  for (const Tensor* p : parts) {
    if (p->rows() != rows) shape_error("concat", *parts.front(), *p);
    cols += p->cols();
  }
  Tensor out = Tensor::matrix(rows, cols);
  std::size_t offset = 0;
  for (const Tensor* p : parts) {
    const std::size_t pc = p->cols();
    auto pv = p->values();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(&pv[r * pc], pc, &out.at(r, offset));
    }
    offset += pc;
  }
  return out;
}

Tensor slice(const Tensor& x, std::size_t col_begin, std::size_t col_end) {
  const std::size_t cols = x.cols();
  if (col_begin > col_end || col_end > cols) {
    throw Error(ErrorKind::Shape, "slice: column range [" + std::to_string(col_begin) + ", " +
                                      std::to_string(col_end) + ") out of bounds for " + x.shape_string());
  }
  const std::size_t rows = x.rows();
  const std::size_t width = col_end - col_begin;
  Tensor out = Tensor::matrix(rows, width);
  auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(&xv[r * cols + col_begin], width, &out.at(r, 0));
  }
  return out;
}

double mse(const Tensor& predicted, const Tensor& target) {
  if (predicted.shape() != target.shape()) shape_error("mse_loss", predicted, target);
  if (predicted.empty()) return 0.0;
  auto pv = predicted.values();
  auto tv = target.values();
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = pv[i] - tv[i];
    s += d * d;
  }
  return s / static_cast<double>(pv.size());
}

}  // namespace sybilnet::num
