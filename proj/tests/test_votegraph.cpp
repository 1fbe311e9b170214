#include <doctest.h>

#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include "sybilnet/error.hpp"
#include "sybilnet/graph_io.hpp"
#include "sybilnet/random.hpp"
#include "sybilnet/votegraph.hpp"

using namespace sybilnet;

namespace {

VoteRecord vote(std::string voter, std::string proposal, EpochSeconds ts, double power = 1.0) {
  return {std::move(voter), std::move(proposal), "space", power, ts, 1};
}

std::vector<VoteRecord> random_votes(Rng& rng, std::size_t n, std::size_t voters, std::size_t proposals) {
  std::vector<VoteRecord> votes;
  for (std::size_t i = 0; i < n; ++i) {
    votes.push_back(vote("0x" + std::to_string(rng.index(voters)), "p" + std::to_string(rng.index(proposals)),
                         static_cast<EpochSeconds>(1 + i), rng.uniform(0, 100)));
  }
  return votes;
}

// Pair-counting betweenness from all-pairs BFS path counts.
std::vector<double> naive_betweenness(const std::vector<std::vector<NodeId>>& adj) {
  const std::size_t n = adj.size();
  std::vector<std::vector<long long>> dist(n, std::vector<long long>(n, -1));
  std::vector<std::vector<double>> paths(n, std::vector<double>(n, 0.0));
  for (NodeId s = 0; s < n; ++s) {
    dist[s][s] = 0;
    paths[s][s] = 1;
    std::deque<NodeId> q{s};
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop_front();
      for (NodeId w : adj[v]) {
        if (dist[s][w] < 0) {
          dist[s][w] = dist[s][v] + 1;
          q.push_back(w);
        }
        if (dist[s][w] == dist[s][v] + 1) paths[s][w] += paths[s][v];
      }
    }
  }
  std::vector<double> c(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId s = 0; s < n; ++s) {
      for (NodeId t = s + 1; t < n; ++t) {
        if (s == v || t == v || dist[s][t] < 0 || dist[s][v] < 0 || dist[v][t] < 0) continue;
        if (dist[s][v] + dist[v][t] == dist[s][t]) c[v] += paths[s][v] * paths[v][t] / paths[s][t];
      }
    }
  }
  if (n > 2) {
    for (double& x : c) x /= static_cast<double>((n - 1) * (n - 2)) / 2.0;
  }
  return c;
}

}  // namespace

TEST_CASE("one address voting three times") {
  const VotingGraph g = build_voting_graph({vote("0xa", "p1", 1), vote("0xa", "p2", 2), vote("0xa", "p3", 3)}, {});
  REQUIRE(g.voters.size() == 1);
  CHECK_FALSE(g.voters[0].is_known());
  CHECK(g.voters[0].vote_count == 3);
  CHECK(g.proposals.size() == 3);
  CHECK(g.edges.size() == 3);
  CHECK(g.node_count() == 4);
  validate(g);
}

TEST_CASE("addresses registered to one name merge") {
  const Registry reg = {{"0xa", "alice"}, {"0xb", "alice"}};
  const VotingGraph g = build_voting_graph({vote("0xa", "p1", 1), vote("0xb", "p2", 2)}, reg);
  REQUIRE(g.voters.size() == 1);
  CHECK(g.voters[0].known_name == "alice");
  CHECK(g.voters[0].wallet_addresses == std::vector<std::string>{"0xa", "0xb"});
  CHECK(g.label_index.at("alice") == g.voters[0].node_id);
  CHECK(g.voters[0].total_power == 2.0);
}

TEST_CASE("unregistered wallets stay separate") {
  const Registry reg = {{"0xa", "alice"}};
  const VotingGraph g = build_voting_graph({vote("0xa", "p1", 1), vote("0xc", "p1", 2)}, reg);
  CHECK(g.voters.size() == 2);
  CHECK(g.edges.size() == 2);
}

TEST_CASE("empty graph") {
  const VotingGraph g = build_voting_graph({}, {});
  CHECK(g.node_count() == 0);
  CHECK(g.edges.empty());
  const StatsReport s = sociometrics(g);
  CHECK(s.node_count == 0);
  CHECK(s.top_eigenvector.empty());
}

TEST_CASE("conflicting registry is a consistency error") {
  const Registry reg = {{"0xa", "alice"}, {"0xa", "bob"}};
  try {
    (void)build_voting_graph({vote("0xa", "p1", 1)}, reg);
    FAIL("no error");
  } catch (const Error& ex) {
    CHECK(ex.kind() == ErrorKind::Consistency);
  }
}

TEST_CASE("parallel edges are preserved") {
  const VotingGraph g = build_voting_graph({vote("0xa", "p1", 1), vote("0xa", "p1", 2)}, {});
  CHECK(g.edges.size() == 2);
  const StatsReport s = sociometrics(g);
  CHECK(s.edge_count == 2);
  CHECK(s.simple_edge_count == 1);
}

TEST_CASE("density of voter-proposal-voter path") {
  const VotingGraph g = build_voting_graph({vote("0xa", "p", 1), vote("0xb", "p", 2)}, {});
  const StatsReport s = sociometrics(g);
  CHECK(s.density == doctest::Approx(1.0));
  CHECK(s.voter_count == 2);
  CHECK(s.proposal_count == 1);
}

TEST_CASE("star of one proposal and four voters") {
  std::vector<VoteRecord> votes;
  for (int i = 0; i < 4; ++i) votes.push_back(vote("0x" + std::to_string(i), "p", i + 1));
  const VotingGraph g = build_voting_graph(votes, {});
  const StatsReport s = sociometrics(g);
  CHECK(s.degree_histogram.at(1) == 4);
  CHECK(s.degree_histogram.at(4) == 1);
  CHECK(s.degree_histogram.size() == 2);
  // The hub lies on every path between two leaves.
  const NodeId hub = g.proposals[0].node_id;
  CHECK(s.top_betweenness[0].node_id == hub);
  CHECK(s.top_betweenness[0].value == doctest::Approx(1.0));
  CHECK(s.top_eigenvector[0].node_id == hub);
}

TEST_CASE("graph invariants on random builds") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto votes = random_votes(rng, rng.index(120), 25, 12);
    Registry reg;
    for (int i = 0; i < 5; ++i) {
      reg.push_back({"0x" + std::to_string(rng.index(25)), "name" + std::to_string(rng.index(3))});
    }
    std::sort(reg.begin(), reg.end(), [](auto& a, auto& b) { return a.address < b.address; });
    reg.erase(std::unique(reg.begin(), reg.end(), [](auto& a, auto& b) { return a.address == b.address; }),
              reg.end());
    const VotingGraph g = build_voting_graph(votes, reg);
    validate(g);
    CHECK(g.edges.size() == votes.size());
    std::size_t vote_sum = 0;
    for (const auto& v : g.voters) vote_sum += v.vote_count;
    CHECK(vote_sum == g.edges.size());
    const StatsReport s = sociometrics(g);
    std::size_t degree_sum = 0;
    for (const auto& [d, count] : s.degree_histogram) degree_sum += d * count;
    CHECK(degree_sum == 2 * g.edges.size());
    CHECK(s.known_voters + s.unknown_voters == g.voters.size());

    // Deterministic indexing.
    const VotingGraph again = build_voting_graph(votes, reg);
    CHECK(graph_to_json(again) == graph_to_json(g));
  }
}

TEST_CASE("betweenness matches pair counting") {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const VotingGraph g = build_voting_graph(random_votes(rng, 30, 10, 6), {});
    const auto fast = betweenness_centrality(g);
    const auto slow = naive_betweenness(simple_adjacency(g));
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
  }
}

TEST_CASE("eigenvector centrality is a unit eigenvector of A + I") {
  Rng rng(23);
  const VotingGraph g = build_voting_graph(random_votes(rng, 80, 15, 8), {});
  const auto eig = eigenvector_centrality(g);
  CHECK(eig.converged);
  const auto adj = simple_adjacency(g);
  double norm = 0.0;
  for (double v : eig.values) norm += v * v;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0));
  std::vector<double> ax(adj.size());
  double lambda = 0.0;
  for (NodeId v = 0; v < adj.size(); ++v) {
    ax[v] = eig.values[v];
    for (NodeId w : adj[v]) ax[v] += eig.values[w];
    lambda += ax[v] * eig.values[v];
  }
  for (NodeId v = 0; v < adj.size(); ++v) CHECK(std::abs(ax[v] - lambda * eig.values[v]) < 1e-5);
}

TEST_CASE("validate catches broken graphs") {
  VotingGraph g = build_voting_graph({vote("0xa", "p1", 1), vote("0xb", "p1", 2)}, {});
  SUBCASE("voter-voter edge") {
    g.edges[0].proposal = g.voters[1].node_id;
    CHECK_THROWS_AS(validate(g), Error);
  }
  SUBCASE("vote count mismatch") {
    g.voters[0].vote_count = 5;
    CHECK_THROWS_AS(validate(g), Error);
  }
  SUBCASE("empty wallet set") {
    g.voters[0].wallet_addresses.clear();
    CHECK_THROWS_AS(validate(g), Error);
  }
}

TEST_CASE("graph json round trip") {
  Rng rng(29);
  const VotingGraph g = build_voting_graph(random_votes(rng, 60, 10, 5), {{"0x1", "carol"}});
  const VotingGraph back = graph_from_json(graph_to_json(g));
  CHECK(graph_to_json(back) == graph_to_json(g));
  CHECK(back.label_index == g.label_index);
}

TEST_CASE("registry csv round trip") {
  const Registry reg = {{"0xab", "alice.eth"}, {"0xcd", "bob, jr"}};
  std::ostringstream out;
  write_registry(out, reg);
  std::istringstream in(out.str());
  const Registry back = parse_registry(in);
  REQUIRE(back.size() == 2);
  CHECK(back[1].name == "bob, jr");
  CHECK(back[0].address == "0xab");
}
