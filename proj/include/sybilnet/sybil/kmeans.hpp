#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sybilnet/numcore/tensor.hpp"

namespace sybilnet::sybil {

struct KMeansResult {
  std::size_t k = 0;
  num::Tensor centroids;                 // k x d
  std::vector<std::size_t> assignments;  // per point, in [0, k)
  double objective = 0.0;                // sum of squared distances to assigned centroids
  std::size_t iterations_run = 0;
  std::vector<double> objective_history;  // after each assignment step
  bool converged = false;                 // assignments stopped changing
};

// Lloyd iterations from k-means++ seeds. Assignment ties go to the lower
// centroid index; an emptied cluster is re-seeded at the point farthest from
// its centroid. Throws Error(Parameter) unless 1 <= k <= points.
KMeansResult kmeans_cluster(const num::Tensor& points, std::size_t k, std::size_t max_iters, std::uint64_t seed);

double kmeans_objective(const num::Tensor& points, const num::Tensor& centroids,
                        const std::vector<std::size_t>& assignments);

}  // namespace sybilnet::sybil
