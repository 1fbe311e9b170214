#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "sybilnet/numcore/tensor.hpp"
#include "sybilnet/sybil/kmeans.hpp"
#include "sybilnet/votegraph.hpp"

namespace sybilnet::sybil {

struct ClusterFilterPolicy {
  bool drop_singletons = true;
  bool drop_oversized = true;  // clusters larger than mean + 1 sd
  // Filled in by normalize_clusters, over the non-singleton sizes.
  double size_mean = 0.0;
  double size_std = 0.0;  // population
  double size_threshold = 0.0;
};

struct SybilCluster {
  std::vector<NodeId> members;  // sorted
  std::string label;            // empty until labels are propagated
};

struct ClusterStats {
  std::size_t input_clusters = 0;       // non-empty clusters before filtering
  std::size_t singletons_dropped = 0;
  std::size_t oversized_dropped = 0;
  // Over clusters left after the singleton step.
  std::size_t nonsingleton_clusters = 0;
  double nonsingleton_mean = 0.0;
  std::size_t nonsingleton_min = 0;
  std::size_t nonsingleton_max = 0;
  // Over the surviving clusters.
  std::size_t total_clusters = 0;
  double mean_size = 0.0;
  std::size_t min_size = 0;
  std::size_t max_size = 0;
  std::size_t flagged_nodes = 0;
};

struct SybilClusterSet {
  std::vector<SybilCluster> clusters;
  ClusterFilterPolicy policy;
  ClusterStats stats;
};

// Drops singletons, then clusters whose size exceeds mean + 1 sd of the
// remaining sizes. Throws Error(Consistency) when clusters overlap.
SybilClusterSet normalize_clusters(std::vector<std::vector<NodeId>> clusters, ClusterFilterPolicy policy = {});

// Groups points by assignment; row i of the clustered matrix is node_ids[i].
SybilClusterSet normalize_clusters(const KMeansResult& kmeans, const std::vector<NodeId>& node_ids,
                                   ClusterFilterPolicy policy = {});

// Sets each cluster's label to the most frequent Known name among its members'
// nearest Known voters in `embeddings` (rows indexed by node id), ties going to
// the lexicographically smallest name. Clusters with no Known voters in reach
// get "sybil-cluster-<index>". Returns the similarity graph: `graph` with the
// labels written onto the member voters.
VotingGraph propagate_labels(const VotingGraph& graph, SybilClusterSet& clusters, const num::Tensor& embeddings,
                             std::size_t neighbors);

std::string synthetic_cluster_label(std::size_t index);

nlohmann::json cluster_set_to_json(const SybilClusterSet& set);
SybilClusterSet cluster_set_from_json(const nlohmann::json& doc);

}  // namespace sybilnet::sybil
