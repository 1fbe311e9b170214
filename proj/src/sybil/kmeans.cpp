#include "sybilnet/sybil/kmeans.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "sybilnet/error.hpp"
#include "sybilnet/random.hpp"
#include "sybilnet/sybil/flat_index.hpp"

namespace sybilnet::sybil {

using num::Tensor;

namespace {

std::span<const double> row_of(const Tensor& t, std::size_t r) { return {t.values().data() + r * t.cols(), t.cols()}; }

void copy_row(const Tensor& from, std::size_t r, Tensor& to, std::size_t c) {
  auto src = row_of(from, r);
  for (std::size_t j = 0; j < src.size(); ++j) to.at(c, j) = src[j];
}

Tensor seed_plus_plus(const Tensor& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Tensor centroids = Tensor::matrix(k, points.cols());
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng.index(n));
  chosen[first] = true;
  copy_row(points, first, centroids, 0);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_l2(row_of(points, i), row_of(centroids, 0));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      std::vector<double> weights(n);
      for (std::size_t i = 0; i < n; ++i) weights[i] = chosen[i] ? 0.0 : d2[i];
      pick = rng.weighted(weights);
    } else {
      // Every remaining point coincides with a centroid.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    chosen[pick] = true;
    copy_row(points, pick, centroids, c);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_l2(row_of(points, i), row_of(centroids, c)));
  }
  return centroids;
}

std::vector<std::size_t> assign(const Tensor& points, const Tensor& centroids) {
  std::vector<std::size_t> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const double d = squared_l2(row_of(points, i), row_of(centroids, c));
      if (d < best) {
        best = d;
        out[i] = c;
      }
    }
  }
  return out;
}

Tensor update(const Tensor& points, const Tensor& old, const std::vector<std::size_t>& assignments) {
  const std::size_t k = old.rows();
  const std::size_t d = old.cols();
  Tensor sums = Tensor::matrix(k, d);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const std::size_t c = assignments[i];
    ++counts[c];
    auto p = row_of(points, i);
    for (std::size_t j = 0; j < d; ++j) sums.at(c, j) += p[j];
  }
  std::vector<bool> taken(points.rows(), false);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      for (std::size_t j = 0; j < d; ++j) sums.at(c, j) /= static_cast<double>(counts[c]);
      continue;
    }
    // Empty: move the centroid onto the point worst served by its own centroid.
    std::size_t far = points.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (taken[i]) continue;
      const double dist = squared_l2(row_of(points, i), row_of(old, assignments[i]));
      if (dist > far_d) {
        far_d = dist;
        far = i;
      }
    }
    taken[far] = true;
    copy_row(points, far, sums, c);
  }
  return sums;
}

}  // namespace

double kmeans_objective(const Tensor& points, const Tensor& centroids, const std::vector<std::size_t>& assignments) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) s += squared_l2(row_of(points, i), row_of(centroids, assignments[i]));
  return s;
}

KMeansResult kmeans_cluster(const Tensor& points, std::size_t k, std::size_t max_iters, std::uint64_t seed) {
  if (points.rank() != 2) throw Error(ErrorKind::Shape, "k-means points must be a matrix");
  if (k == 0 || k > points.rows()) {
    throw Error(ErrorKind::Parameter, "k = " + std::to_string(k) + " must lie in [1, " +
                                          std::to_string(points.rows()) + "]");
  }
  if (max_iters == 0) throw Error(ErrorKind::Parameter, "k-means needs at least one iteration");
  if (!points.all_finite()) throw Error(ErrorKind::Numeric, "k-means points contain non-finite values");

  Rng rng(seed);
  KMeansResult r;
  r.k = k;
  r.centroids = seed_plus_plus(points, k, rng);
  for (std::size_t iter = 1; iter <= max_iters; ++iter) {
    std::vector<std::size_t> next = assign(points, r.centroids);
    r.objective_history.push_back(kmeans_objective(points, r.centroids, next));
    r.iterations_run = iter;
    if (iter > 1 && next == r.assignments) {
      r.converged = true;
      break;
    }
    r.assignments = std::move(next);
    r.centroids = update(points, r.centroids, r.assignments);
  }
  r.objective = kmeans_objective(points, r.centroids, r.assignments);
  return r;
}

}  // namespace sybilnet::sybil
