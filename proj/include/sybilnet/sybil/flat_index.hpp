#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sybilnet/numcore/tensor.hpp"
#include "sybilnet/votegraph.hpp"

namespace sybilnet::sybil {

// Exact L2 index: stores every vector and answers queries by full scan.
class FlatIndex {
 public:
  // Row i of `vectors` is stored under ids[i]. Throws Error(Numeric) on a
  // non-finite entry and Error(Shape) when the id count differs from the rows.
  FlatIndex(const num::Tensor& vectors, std::vector<NodeId> ids);
  // Ids are the row numbers.
  explicit FlatIndex(const num::Tensor& vectors);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  NodeId id(std::size_t row) const { return ids_.at(row); }
  std::span<const double> vector(std::size_t row) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::vector<NodeId> ids_;
};

struct KnnResult {
  std::size_t queries = 0;
  std::size_t k = 0;
  std::vector<NodeId> ids;         // queries x k, row-major
  std::vector<double> distances;  // squared L2, ascending within a row

  NodeId id(std::size_t q, std::size_t j) const { return ids.at(q * k + j); }
  double distance(std::size_t q, std::size_t j) const { return distances.at(q * k + j); }
};

double squared_l2(std::span<const double> a, std::span<const double> b);

// The k nearest stored vectors per query row, ties going to the lower id.
// Throws Error(Parameter) when k exceeds the index size and Error(Shape) on a
// dimension mismatch.
KnnResult knn_search(const FlatIndex& index, const num::Tensor& queries, std::size_t k);

}  // namespace sybilnet::sybil
