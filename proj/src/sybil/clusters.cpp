#include "sybilnet/sybil/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sybilnet/error.hpp"
#include "sybilnet/sybil/flat_index.hpp"

namespace sybilnet::sybil {

using nlohmann::json;

namespace {

struct SizeSummary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
};

SizeSummary summarize(const std::vector<std::vector<NodeId>>& clusters) {
  SizeSummary s;
  if (clusters.empty()) return s;
  s.min = clusters.front().size();
  double sum = 0.0;
  for (const auto& c : clusters) {
    sum += static_cast<double>(c.size());
    s.min = std::min(s.min, c.size());
    s.max = std::max(s.max, c.size());
  }
  const double m = static_cast<double>(clusters.size());
  s.mean = sum / m;
  double var = 0.0;
  for (const auto& c : clusters) var += (static_cast<double>(c.size()) - s.mean) * (static_cast<double>(c.size()) - s.mean);
  s.std = std::sqrt(var / m);
  return s;
}

}  // namespace

SybilClusterSet normalize_clusters(std::vector<std::vector<NodeId>> clusters, ClusterFilterPolicy policy) {
  SybilClusterSet out;
  std::set<NodeId> seen;
  std::vector<std::vector<NodeId>> kept;
  for (auto& c : clusters) {
    if (c.empty()) continue;
    std::sort(c.begin(), c.end());
    for (NodeId id : c) {
      if (!seen.insert(id).second) throw Error(ErrorKind::Consistency, "node " + std::to_string(id) + " is in two clusters");
    }
    ++out.stats.input_clusters;
    if (policy.drop_singletons && c.size() == 1) {
      ++out.stats.singletons_dropped;
      continue;
    }
    kept.push_back(std::move(c));
  }

  const SizeSummary before = summarize(kept);
  out.stats.nonsingleton_clusters = kept.size();
  out.stats.nonsingleton_mean = before.mean;
  out.stats.nonsingleton_min = before.min;
  out.stats.nonsingleton_max = before.max;
  policy.size_mean = before.mean;
  policy.size_std = before.std;
  policy.size_threshold = before.mean + before.std;

  std::vector<std::vector<NodeId>> survivors;
  for (auto& c : kept) {
    // The tolerance only absorbs rounding when the threshold is an exact size.
    if (policy.drop_oversized && static_cast<double>(c.size()) > policy.size_threshold + 1e-9) {
      ++out.stats.oversized_dropped;
      continue;
    }
    survivors.push_back(std::move(c));
  }

  const SizeSummary after = summarize(survivors);
  out.stats.total_clusters = survivors.size();
  out.stats.mean_size = after.mean;
  out.stats.min_size = after.min;
  out.stats.max_size = after.max;
  for (auto& c : survivors) {
    out.stats.flagged_nodes += c.size();
    out.clusters.push_back({std::move(c), {}});
  }
  out.policy = policy;
  return out;
}

SybilClusterSet normalize_clusters(const KMeansResult& kmeans, const std::vector<NodeId>& node_ids,
                                   ClusterFilterPolicy policy) {
  if (node_ids.size() != kmeans.assignments.size()) {
    throw Error(ErrorKind::Shape, "k-means has " + std::to_string(kmeans.assignments.size()) + " assignments but " +
                                      std::to_string(node_ids.size()) + " node ids");
  }
  std::vector<std::vector<NodeId>> groups(kmeans.k);
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    if (kmeans.assignments[i] >= kmeans.k) throw Error(ErrorKind::Consistency, "assignment out of range");
    groups[kmeans.assignments[i]].push_back(node_ids[i]);
  }
  return normalize_clusters(std::move(groups), policy);
}

std::string synthetic_cluster_label(std::size_t index) { return "sybil-cluster-" + std::to_string(index); }

VotingGraph propagate_labels(const VotingGraph& graph, SybilClusterSet& clusters, const num::Tensor& embeddings,
                             std::size_t neighbors) {
  if (embeddings.rank() != 2 || embeddings.rows() != graph.node_count()) {
    throw Error(ErrorKind::Shape, "embeddings " + embeddings.shape_string() + " do not cover " +
                                      std::to_string(graph.node_count()) + " nodes");
  }
  std::vector<NodeId> known_ids;
  for (const auto& v : graph.voters) {
    if (v.is_known()) known_ids.push_back(v.node_id);
  }
  std::sort(known_ids.begin(), known_ids.end());
  const std::size_t d = embeddings.cols();
  num::Tensor known_vectors = num::Tensor::matrix(known_ids.size(), d);
  for (std::size_t r = 0; r < known_ids.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) known_vectors.at(r, c) = embeddings.at(known_ids[r], c);
  }
  const FlatIndex index(known_vectors, known_ids);
  const std::size_t reach = std::min(neighbors, index.size());

  VotingGraph similarity = graph;
  for (std::size_t ci = 0; ci < clusters.clusters.size(); ++ci) {
    SybilCluster& cluster = clusters.clusters[ci];
    std::map<std::string, std::size_t> votes;
    if (reach > 0) {
      num::Tensor queries = num::Tensor::matrix(cluster.members.size(), d);
      for (std::size_t r = 0; r < cluster.members.size(); ++r) {
        for (std::size_t c = 0; c < d; ++c) queries.at(r, c) = embeddings.at(cluster.members[r], c);
      }
      const KnnResult hits = knn_search(index, queries, reach);
      for (NodeId id : hits.ids) ++votes[*graph.voter(id).known_name];
    }
    std::string label = synthetic_cluster_label(ci);
    std::size_t best = 0;
    // std::map iterates names in ascending order, so strict > keeps the smallest on ties.
    for (const auto& [name, count] : votes) {
      if (count > best) {
        best = count;
        label = name;
      }
    }
    cluster.label = label;
    for (NodeId id : cluster.members) {
      if (!graph.is_voter(id)) throw Error(ErrorKind::Consistency, "cluster member " + std::to_string(id) + " is not a voter");
      similarity.voter(id).label = label;
    }
  }
  return similarity;
}

json cluster_set_to_json(const SybilClusterSet& set) {
  json clusters = json::array();
  for (const auto& c : set.clusters) clusters.push_back({{"members", c.members}, {"label", c.label}});
  const ClusterStats& s = set.stats;
  return {{"clusters", std::move(clusters)},
          {"policy",
           {{"drop_singletons", set.policy.drop_singletons},
            {"drop_oversized", set.policy.drop_oversized},
            {"size_mean", set.policy.size_mean},
            {"size_std", set.policy.size_std},
            {"size_threshold", set.policy.size_threshold}}},
          {"stats",
           {{"input_clusters", s.input_clusters},
            {"singletons_dropped", s.singletons_dropped},
            {"oversized_dropped", s.oversized_dropped},
            {"nonsingleton_clusters", s.nonsingleton_clusters},
            {"nonsingleton_mean", s.nonsingleton_mean},
            {"nonsingleton_min", s.nonsingleton_min},
            {"nonsingleton_max", s.nonsingleton_max},
            {"total_clusters", s.total_clusters},
            {"mean_size", s.mean_size},
            {"min_size", s.min_size},
            {"max_size", s.max_size},
            {"flagged_nodes", s.flagged_nodes}}}};
}

SybilClusterSet cluster_set_from_json(const json& doc) {
  SybilClusterSet set;
  try {
    for (const auto& c : doc.at("clusters")) {
      set.clusters.push_back({c.at("members").get<std::vector<NodeId>>(), c.at("label").get<std::string>()});
    }
    const json& p = doc.at("policy");
    set.policy.drop_singletons = p.at("drop_singletons").get<bool>();
    set.policy.drop_oversized = p.at("drop_oversized").get<bool>();
    set.policy.size_mean = p.at("size_mean").get<double>();
    set.policy.size_std = p.at("size_std").get<double>();
    set.policy.size_threshold = p.at("size_threshold").get<double>();
    const json& s = doc.at("stats");
    ClusterStats& st = set.stats;
    st.input_clusters = s.at("input_clusters").get<std::size_t>();
    st.singletons_dropped = s.at("singletons_dropped").get<std::size_t>();
    st.oversized_dropped = s.at("oversized_dropped").get<std::size_t>();
    st.nonsingleton_clusters = s.at("nonsingleton_clusters").get<std::size_t>();
    st.nonsingleton_mean = s.at("nonsingleton_mean").get<double>();
    st.nonsingleton_min = s.at("nonsingleton_min").get<std::size_t>();
    st.nonsingleton_max = s.at("nonsingleton_max").get<std::size_t>();
    st.total_clusters = s.at("total_clusters").get<std::size_t>();
    st.mean_size = s.at("mean_size").get<double>();
    st.min_size = s.at("min_size").get<std::size_t>();
    st.max_size = s.at("max_size").get<std::size_t>();
    st.flagged_nodes = s.at("flagged_nodes").get<std::size_t>();
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, std::string("malformed cluster set: ") + ex.what());
  }
  std::set<NodeId> seen;
  for (const auto& c : set.clusters) {
    for (NodeId id : c.members) {
      if (!seen.insert(id).second) throw Error(ErrorKind::Consistency, "node " + std::to_string(id) + " is in two clusters");
    }
  }
  return set;
}

}  // namespace sybilnet::sybil
