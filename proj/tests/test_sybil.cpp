#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "sybilnet/error.hpp"
#include "sybilnet/text.hpp"
#include "sybilnet/random.hpp"
#include "sybilnet/sybil/clusters.hpp"
#include "sybilnet/sybil/flat_index.hpp"
#include "sybilnet/sybil/kmeans.hpp"
#include "sybilnet/sybil/reduce.hpp"
#include "sybilnet/sybil/report.hpp"

using namespace sybilnet;
using namespace sybilnet::sybil;
using fixtures::vote;
using num::Tensor;

namespace {

Tensor random_points(Rng& rng, std::size_t n, std::size_t d) {
  Tensor t = Tensor::matrix(n, d);
  for (double& v : t.values()) v = rng.uniform(-1, 1);
  return t;
}

// Full sort of (distance, id) per query, computed directly.
KnnResult naive_knn(const Tensor& data, const std::vector<NodeId>& ids, const Tensor& q, std::size_t k) {
  KnnResult r;
  r.queries = q.rows();
  r.k = k;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    std::vector<std::pair<double, NodeId>> all;
    for (std::size_t j = 0; j < data.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < data.cols(); ++c) {
        const double d = q.at(i, c) - data.at(j, c);
        s += d * d;
      }
      all.emplace_back(s, ids[j]);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t j = 0; j < k; ++j) {
      r.distances.push_back(all[j].first);
      r.ids.push_back(all[j].second);
    }
  }
  return r;
}

std::vector<std::vector<NodeId>> sized_clusters(const std::vector<std::size_t>& sizes) {
  std::vector<std::vector<NodeId>> out;
  NodeId next = 0;
  for (std::size_t s : sizes) {
    std::vector<NodeId> c(s);
    std::iota(c.begin(), c.end(), next);
    next += s;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::size_t> sizes_of(const SybilClusterSet& set) {
  std::vector<std::size_t> s;
  for (const auto& c : set.clusters) s.push_back(c.members.size());
  std::sort(s.begin(), s.end());
  return s;
}

// Ten voters on five proposals, two Known.
VotingGraph ten_node_graph() {
  std::vector<VoteRecord> votes;
  for (int v = 0; v < 5; ++v) {
    for (int p = 0; p <= v; ++p) {
      votes.push_back(vote("0x" + std::to_string(v), "p" + std::to_string(p % 5), 1000 + 10 * (v * 5 + p), 1.0 + v + 0.5 * p));
    }
  }
  std::sort(votes.begin(), votes.end(), vote_order_less);
  return build_voting_graph(votes, {{"0x0", "alice"}, {"0x4", "bob"}});
}

Tensor embedding_rows(std::size_t n, std::initializer_list<std::pair<NodeId, double>> at) {
  Tensor t = Tensor::matrix(n, 1, 100.0);
  for (auto [id, v] : at) t.at(id, 0) = v;
  return t;
}

}  // namespace

TEST_CASE("knn examples") {
  const Tensor line = Tensor::from_rows({{0}, {1}, {10}});
  const FlatIndex index(line);
  const KnnResult r = knn_search(index, Tensor::from_rows({{0.4}}), 2);
  CHECK(r.id(0, 0) == 0);
  CHECK(r.id(0, 1) == 1);
  CHECK(r.distance(0, 0) == doctest::Approx(0.16));
  CHECK(r.distance(0, 1) == doctest::Approx(0.36));

  const FlatIndex single(Tensor::from_rows({{1, 2}}));
  CHECK(single.size() == 1);
  const KnnResult self = knn_search(single, Tensor::from_rows({{1, 2}}), 1);
  CHECK(self.id(0, 0) == 0);
  CHECK(self.distance(0, 0) == 0.0);
}

TEST_CASE("knn ties go to the lower id") {
  const FlatIndex index(Tensor::from_rows({{1}, {-1}, {1}}), {7, 3, 5});
  const KnnResult r = knn_search(index, Tensor::from_rows({{0}}), 3);
  CHECK(r.id(0, 0) == 3);
  CHECK(r.id(0, 1) == 5);
  CHECK(r.id(0, 2) == 7);
}

TEST_CASE("knn errors") {
  const FlatIndex index(Tensor::from_rows({{1, 2}, {3, 4}}));
  CHECK_THROWS_AS((void)knn_search(index, Tensor::from_rows({{1, 2}}), 3), Error);
  CHECK_THROWS_AS((void)knn_search(index, Tensor::from_rows({{1, 2, 3}}), 1), Error);
  CHECK_THROWS_AS(FlatIndex(Tensor::from_rows({{1, std::nan("")}})), Error);
  CHECK_THROWS_AS(FlatIndex(Tensor::from_rows({{1}}), {1, 2}), Error);
}

TEST_CASE("every stored vector finds itself first") {
  Rng rng(31);
  const Tensor data = random_points(rng, 200, 16);
  const FlatIndex index(data);
  const KnnResult r = knn_search(index, data, 1);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    CHECK(r.id(i, 0) == i);
    CHECK(r.distance(i, 0) == 0.0);
  }
}

TEST_CASE("knn equals the naive oracle") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.index(200);
    const std::size_t d = 1 + rng.index(16);
    Tensor data = random_points(rng, n, d);
    // Duplicated rows force distance ties.
    for (std::size_t i = 0; i + 1 < n; i += 7) {
      for (std::size_t c = 0; c < d; ++c) data.at(i + 1, c) = data.at(i, c);
    }
    std::vector<NodeId> ids(n);
    std::iota(ids.begin(), ids.end(), 1000);
    rng.shuffle(ids);
    const Tensor q = random_points(rng, 10, d);
    const std::size_t k = 1 + rng.index(n);
    const KnnResult fast = knn_search(FlatIndex(data, ids), q, k);
    const KnnResult slow = naive_knn(data, ids, q, k);
    CHECK(fast.ids == slow.ids);
    CHECK(fast.distances == slow.distances);
  }
}

TEST_CASE("k-means with k = n is exact") {
  Rng rng(41);
  const Tensor p = random_points(rng, 30, 4);
  const KMeansResult r = kmeans_cluster(p, 30, 50, 1);
  CHECK(r.objective == 0.0);
  CHECK(std::set<std::size_t>(r.assignments.begin(), r.assignments.end()).size() == 30);
}

TEST_CASE("k-means recovers separated blobs") {
  Rng rng(43);
  Tensor p = Tensor::matrix(100, 2);
  for (std::size_t i = 0; i < 100; ++i) {
    const double cx = i < 50 ? -100.0 : 100.0;
    p.at(i, 0) = cx + rng.uniform(-1, 1);
    p.at(i, 1) = rng.uniform(-1, 1);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const KMeansResult r = kmeans_cluster(p, 2, 100, seed);
    for (std::size_t i = 1; i < 100; ++i) CHECK((r.assignments[i] == r.assignments[0]) == (i < 50));
  }
}

TEST_CASE("k-means objective is monotone and the result is a fixed point") {
  Rng rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng.index(150);
    const std::size_t d = 1 + rng.index(8);
    Tensor p = random_points(rng, n, d);
    for (std::size_t i = 0; i < n; i += 5) p.at(i, 0) = 0.0;  // some duplicates
    const std::size_t k = 1 + rng.index(n);
    const KMeansResult r = kmeans_cluster(p, k, 200, rng.next());
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      CHECK(r.objective_history[i] <= r.objective_history[i - 1] * (1 + 1e-12) + 1e-12);
    }
    for (std::size_t a : r.assignments) CHECK(a < k);
    CHECK(r.objective == doctest::Approx(kmeans_objective(p, r.centroids, r.assignments)).epsilon(1e-12));
    if (r.converged) {
      for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t c = 0; c < k; ++c) {
          double s = 0.0;
          for (std::size_t j = 0; j < d; ++j) s += (p.at(i, j) - r.centroids.at(c, j)) * (p.at(i, j) - r.centroids.at(c, j));
          if (s < best) {
            best = s;
            arg = c;
          }
        }
        CHECK(arg == r.assignments[i]);
      }
    }
  }
}

TEST_CASE("k-means is deterministic and validates k") {
  Rng rng(53);
  const Tensor p = random_points(rng, 40, 3);
  const KMeansResult a = kmeans_cluster(p, 5, 100, 9);
  const KMeansResult b = kmeans_cluster(p, 5, 100, 9);
  CHECK(a.assignments == b.assignments);
  CHECK(a.centroids == b.centroids);
  CHECK_THROWS_AS((void)kmeans_cluster(p, 41, 10, 1), Error);
  CHECK_THROWS_AS((void)kmeans_cluster(p, 0, 10, 1), Error);
}

TEST_CASE("cluster filter examples") {
  SUBCASE("{1, 1, 2}") {
    const SybilClusterSet s = normalize_clusters(sized_clusters({1, 1, 2}));
    CHECK(sizes_of(s) == std::vector<std::size_t>{2});
    CHECK(s.stats.singletons_dropped == 2);
  }
  SUBCASE("{2, 2, 2}") {
    const SybilClusterSet s = normalize_clusters(sized_clusters({2, 2, 2}));
    CHECK(sizes_of(s) == std::vector<std::size_t>{2, 2, 2});
    CHECK(s.policy.size_threshold == 2.0);
    CHECK(s.policy.size_std == 0.0);
  }
  SUBCASE("all dropped is valid") {
    const SybilClusterSet s = normalize_clusters(sized_clusters({1, 1}));
    CHECK(s.clusters.empty());
    CHECK(s.stats.total_clusters == 0);
  }
  SUBCASE("overlap is a consistency error") {
    CHECK_THROWS_AS((void)normalize_clusters({{1, 2}, {2, 3}}), Error);
  }
}

TEST_CASE("cluster filter threshold is mean plus one population sd") {
  Rng rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> sizes;
    const std::size_t m = 1 + rng.index(40);
    for (std::size_t i = 0; i < m; ++i) sizes.push_back(1 + rng.index(rng.bernoulli(0.1) ? 200 : 8));
    const SybilClusterSet s = normalize_clusters(sized_clusters(sizes));
    std::vector<double> ns;
    for (std::size_t v : sizes) {
      if (v > 1) ns.push_back(static_cast<double>(v));
    }
    double mean = 0.0, var = 0.0;
    for (double v : ns) mean += v;
    if (!ns.empty()) mean /= static_cast<double>(ns.size());
    for (double v : ns) var += (v - mean) * (v - mean);
    const double sd = ns.empty() ? 0.0 : std::sqrt(var / static_cast<double>(ns.size()));
    std::vector<std::size_t> expected;
    for (double v : ns) {
      if (v <= mean + sd + 1e-9) expected.push_back(static_cast<std::size_t>(v));
    }
    std::sort(expected.begin(), expected.end());
    CHECK(sizes_of(s) == expected);
    if (!ns.empty()) CHECK(s.policy.size_threshold == doctest::Approx(mean + sd));
    for (std::size_t v : sizes_of(s)) {
      CHECK(v >= 2);
      CHECK(static_cast<double>(v) <= s.policy.size_threshold + 1e-9);
    }
  }
}

TEST_CASE("labels follow the majority of nearest Known voters") {
  // Voters: two Known ("alice", "bob") plus unknown ones; embeddings are 1-D.
  std::vector<VoteRecord> votes;
  for (int v = 0; v < 8; ++v) votes.push_back(vote("0x" + std::to_string(v), "p", 1000 + v, 1.0));
  const Registry reg = {{"0x0", "alice"}, {"0x1", "alice2"}, {"0x2", "bob"}};
  const VotingGraph g = build_voting_graph(votes, reg);
  auto id_of = [&](const std::string& addr) {
    for (const auto& v : g.voters) {
      if (v.wallet_addresses[0] == addr) return v.node_id;
    }
    return NodeId{0};
  };
  const NodeId u1 = id_of("0x5"), u2 = id_of("0x6"), u3 = id_of("0x7");

  SUBCASE("majority") {
    // alice at 0, bob at 0.1, alice2 at 50; unknown cluster near 0.
    Tensor e = embedding_rows(g.node_count(), {{id_of("0x0"), 0.0}, {id_of("0x2"), 0.1}, {id_of("0x1"), 0.2},
                                                {u1, 0.0}, {u2, 0.01}});
    SybilClusterSet set = normalize_clusters({{u1, u2}});
    const VotingGraph sim = propagate_labels(g, set, e, 1);
    // Nearest Known: u1 -> alice, u2 -> alice.
    CHECK(set.clusters[0].label == "alice");
    CHECK(sim.voter(u1).label == "alice");
    CHECK(sim.voter(u2).label == "alice");
    CHECK(sim.node_count() == g.node_count());
    CHECK(sim.edges.size() == g.edges.size());
  }
  SUBCASE("tie goes to the smaller name") {
    Tensor e = embedding_rows(g.node_count(), {{id_of("0x0"), 0.0}, {id_of("0x2"), 10.0}, {u1, 0.0}, {u2, 10.0}});
    SybilClusterSet set = normalize_clusters({{u1, u2}});
    (void)propagate_labels(g, set, e, 1);
    CHECK(set.clusters[0].label == "alice");
  }
  SUBCASE("neighbors alice, alice, bob") {
    Tensor e = embedding_rows(g.node_count(), {{id_of("0x0"), 0.0}, {id_of("0x2"), 0.5}, {id_of("0x1"), 90.0},
                                                {u1, 0.0}, {u2, 0.0}, {u3, 0.5}});
    SybilClusterSet set = normalize_clusters({{u1, u2, u3}});
    (void)propagate_labels(g, set, e, 1);
    CHECK(set.clusters[0].label == "alice");
  }
  SUBCASE("no Known voters yields a synthetic label") {
    const VotingGraph anon = build_voting_graph(votes, {});
    SybilClusterSet set = normalize_clusters({{u1, u2}, {u3, id_of("0x4")}});
    (void)propagate_labels(anon, set, Tensor::matrix(anon.node_count(), 1), 3);
    CHECK(set.clusters[0].label == synthetic_cluster_label(0));
    CHECK(set.clusters[1].label == "sybil-cluster-1");
  }
}

TEST_CASE("reduce one cluster of three in a ten-node graph") {
  const VotingGraph g = ten_node_graph();
  REQUIRE(g.node_count() == 10);
  std::vector<NodeId> unknown;
  for (const auto& v : g.voters) {
    if (!v.is_known()) unknown.push_back(v.node_id);
  }
  REQUIRE(unknown.size() == 3);
  SybilClusterSet set = normalize_clusters({unknown});
  const VotingGraph sim = propagate_labels(g, set, Tensor::matrix(g.node_count(), 2), 2);
  const ClusteredGraph r = reduce_graph(sim, set);
  validate(r.graph);
  CHECK(r.graph.node_count() == 8);
  CHECK(r.graph.edges.size() == g.edges.size());
  const NodeId merged = r.merge_map[unknown[0]];
  CHECK(r.merge_map[unknown[1]] == merged);
  CHECK(r.merge_map[unknown[2]] == merged);
  CHECK(r.graph.voter(merged).wallet_addresses.size() == 3);
  CHECK(r.graph.voter(merged).label == set.clusters[0].label);
}

TEST_CASE("reduce with no clusters is the identity") {
  const VotingGraph g = ten_node_graph();
  const ClusteredGraph r = reduce_graph(g, normalize_clusters({}));
  CHECK(r.graph.node_count() == g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) CHECK(r.merge_map[i] == i);
}

TEST_CASE("reduce invariants on random graphs") {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<VoteRecord> votes;
    for (int i = 0; i < 150; ++i) {
      votes.push_back(vote("0x" + std::to_string(rng.index(40)), "p" + std::to_string(rng.index(10)), 1000 + i,
                           rng.uniform(0, 1000)));
    }
    const VotingGraph g = build_voting_graph(votes, {});
    std::vector<NodeId> voter_ids;
    for (const auto& v : g.voters) voter_ids.push_back(v.node_id);
    rng.shuffle(voter_ids);
    std::vector<std::vector<NodeId>> groups;
    std::size_t pos = 0;
    while (pos + 2 <= voter_ids.size() && rng.bernoulli(0.8)) {
      const std::size_t s = std::min<std::size_t>(2 + rng.index(4), voter_ids.size() - pos);
      groups.emplace_back(voter_ids.begin() + pos, voter_ids.begin() + pos + s);
      pos += s;
    }
    ClusterFilterPolicy keep_all;
    keep_all.drop_oversized = false;
    SybilClusterSet set = normalize_clusters(groups, keep_all);
    const VotingGraph sim = propagate_labels(g, set, Tensor::matrix(g.node_count(), 1), 1);
    const ClusteredGraph r = reduce_graph(sim, set);
    std::size_t removed = 0;
    for (const auto& c : set.clusters) removed += c.members.size() - 1;
    CHECK(r.graph.node_count() == g.node_count() - removed);
    CHECK(r.graph.edges.size() == g.edges.size());
    double before = 0.0, after = 0.0, voter_after = 0.0;
    for (const auto& e : g.edges) before += e.voting_power;
    for (const auto& e : r.graph.edges) after += e.voting_power;
    for (const auto& v : r.graph.voters) voter_after += v.total_power;
    CHECK(std::abs(after - before) <= 1e-9 * before);
    CHECK(std::abs(voter_after - before) <= 1e-9 * before);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      CHECK(r.graph.edges[e].voter == r.merge_map[g.edges[e].voter]);
      CHECK(r.graph.edges[e].proposal == r.merge_map[g.edges[e].proposal]);
    }
  }
}

TEST_CASE("reduce rejects proposal members") {
  const VotingGraph g = ten_node_graph();
  SybilClusterSet set = normalize_clusters({{g.voters[1].node_id, g.proposals[0].node_id}});
  CHECK_THROWS_AS((void)reduce_graph(g, set), Error);
}

TEST_CASE("report rows and formatting") {
  CHECK(format_count(89833) == "89,833");
  CHECK(format_count(300000) == "300,000");
  CHECK(format_count(7) == "7");
  CHECK(format_date(1595030400) == "2020-07-18");
  CHECK(format_duration(959LL * 86400) == "2 years and 229 days");
  CHECK(format_duration(86399) == "0 years and 0 days");

  const VotingGraph g = ten_node_graph();
  std::vector<NodeId> unknown;
  for (const auto& v : g.voters) {
    if (!v.is_known()) unknown.push_back(v.node_id);
  }
  DatasetWindow w{1595030400, 1595030400 + 959LL * 86400, g.edges.size(), 5, 5};

  SUBCASE("with one cluster") {
    SybilClusterSet set = normalize_clusters({unknown});
    const VotingGraph sim = propagate_labels(g, set, Tensor::matrix(g.node_count(), 1), 1);
    const ClusteredGraph red = reduce_graph(sim, set);
    const SociometricReport r = sociometric_report(g, sim, red, set, w);
    CHECK(r.nodes_removed == 2);
    CHECK(r.potential_sybils == 3);
    CHECK(r.sybil_clusters == 1);
    CHECK(r.known_voters == 2);
    CHECK(r.unknown_voters == 3);
    CHECK(r.node_reduction_percent == doctest::Approx(20.0));
    const auto rows = report_rows(r);
    REQUIRE(rows.size() == 11);
    const std::vector<std::string> labels = {
        "Date Range",
        "Original Graph",
        "Similarity Graph",
        "Clustered Graph",
        "Number of Known Voters",
        "Number of Unknown Voters",
        "Number of Potential Sybils Identified",
        "Number of Sybil Clusters Formed",
        "Node Reduction After Clustering Sybils",
        "Reduction Numerator: Nodes Removed",
        "Reduction Numerator: Potential Sybils",
    };
    for (std::size_t i = 0; i < labels.size(); ++i) CHECK(rows[i].label == labels[i]);
    CHECK(rows[0].value.find("2020-07-18") != std::string::npos);
    CHECK(rows[0].value.find("2 years and 229 days") != std::string::npos);
    // Percent recomputed from counts agrees to two decimals.
    const double pct = 100.0 * static_cast<double>(r.original.nodes - r.clustered.nodes) / static_cast<double>(r.original.nodes);
    CHECK(rows[8].value.find(format_fixed(pct, 2)) != std::string::npos);

    const SociometricReport back = report_from_json(report_to_json(r));
    CHECK(report_to_text(back) == report_to_text(r));
    const std::string text = report_to_text(r);
    for (const auto& l : labels) CHECK(text.find(l) != std::string::npos);
  }
  SUBCASE("no clusters") {
    SybilClusterSet set = normalize_clusters({});
    const ClusteredGraph red = reduce_graph(g, set);
    const SociometricReport r = sociometric_report(g, g, red, set, w);
    CHECK(r.node_reduction_percent == 0.0);
    CHECK(r.nodes_removed == 0);
  }
}

TEST_CASE("cluster exports") {
  SybilClusterSet set = normalize_clusters({{4, 2}, {7, 9, 8}});
  set.clusters[0].label = "alice";
  set.clusters[1].label = "sybil-cluster-1";
  const std::string csv = cluster_csv(set, {"h", 1});
  CHECK(csv.find("cluster_id,node_id,propagated_label\n0,2,alice\n0,4,alice\n1,7,sybil-cluster-1\n") != std::string::npos);
  const std::string hist = cluster_size_histogram_csv(set, {"h", 1});
  CHECK(hist.find("size,count\n2,1\n3,1\n") != std::string::npos);
  const SybilClusterSet back = cluster_set_from_json(cluster_set_to_json(set));
  CHECK(cluster_set_to_json(back) == cluster_set_to_json(set));
}
