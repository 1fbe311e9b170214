#include "sybilnet/sybil/flat_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sybilnet/error.hpp"

namespace sybilnet::sybil {

FlatIndex::FlatIndex(const num::Tensor& vectors, std::vector<NodeId> ids)
    : dim_(vectors.cols()), data_(vectors.values().begin(), vectors.values().end()), ids_(std::move(ids)) {
  if (vectors.rank() != 2) throw Error(ErrorKind::Shape, "index vectors must be a matrix, got " + vectors.shape_string());
  if (ids_.size() != vectors.rows()) {
    throw Error(ErrorKind::Shape, "index has " + std::to_string(vectors.rows()) + " vectors but " +
                                      std::to_string(ids_.size()) + " ids");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorKind::Numeric, "non-finite value in vector " + std::to_string(i / std::max<std::size_t>(dim_, 1)));
    }
  }
}

FlatIndex::FlatIndex(const num::Tensor& vectors) : FlatIndex(vectors, [&] {
  std::vector<NodeId> ids(vectors.rank() == 2 ? vectors.rows() : 0);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  return ids;
}()) {}

std::span<const double> FlatIndex::vector(std::size_t row) const {
  if (row >= ids_.size()) throw Error(ErrorKind::Parameter, "index row out of range");
  return {data_.data() + row * dim_, dim_};
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

KnnResult knn_search(const FlatIndex& index, const num::Tensor& queries, std::size_t k) {
  if (k > index.size()) {
    throw Error(ErrorKind::Parameter, "k = " + std::to_string(k) + " exceeds index size " + std::to_string(index.size()));
  }
  if (queries.rank() != 2 || queries.cols() != index.dim()) {
    throw Error(ErrorKind::Shape, "queries " + queries.shape_string() + " do not match index dimension " +
                                      std::to_string(index.dim()));
  }
  KnnResult out;
  out.queries = queries.rows();
  out.k = k;
  out.ids.reserve(out.queries * k);
  out.distances.reserve(out.queries * k);

  std::vector<std::pair<double, NodeId>> scored(index.size());
  const auto qv = queries.values();
  for (std::size_t q = 0; q < out.queries; ++q) {
    const std::span<const double> query(qv.data() + q * index.dim(), index.dim());
    for (std::size_t i = 0; i < index.size(); ++i) scored[i] = {squared_l2(query, index.vector(i)), index.id(i)};
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end());
    for (std::size_t j = 0; j < k; ++j) {
      out.distances.push_back(scored[j].first);
      out.ids.push_back(scored[j].second);
    }
  }
  return out;
}

}  // namespace sybilnet::sybil
