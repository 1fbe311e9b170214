#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sybilnet/ingest.hpp"

namespace sybilnet {

using NodeId = std::size_t;

struct VoterNode {
  NodeId node_id = 0;
  std::optional<std::string> known_name;  // Known(name) when set, Unknown otherwise
  std::vector<std::string> wallet_addresses;  // sorted, unique
  double total_power = 0.0;
  std::size_t vote_count = 0;
  std::string label;  // propagated cluster label, empty when none

  bool is_known() const noexcept { return known_name.has_value(); }
};

struct ProposalNode {
  NodeId node_id = 0;
  std::string proposal_id;
  std::string space_id;
};

struct VoteEdge {
  NodeId voter = 0;
  NodeId proposal = 0;
  double voting_power = 0.0;
  EpochSeconds timestamp = 0;
  int choice = 0;
};

enum class NodeKind { Voter, Proposal };

struct NodeRef {
  NodeKind kind = NodeKind::Voter;
  std::size_t index = 0;  // into voters or proposals
};

// Bipartite multigraph of voters and proposals. Node ids are dense over both
// partitions; parallel voter-proposal edges are kept.
struct VotingGraph {
  std::vector<VoterNode> voters;
  std::vector<ProposalNode> proposals;
  std::vector<VoteEdge> edges;
  std::map<std::string, NodeId> label_index;  // persistent name -> node id
  std::vector<NodeRef> nodes;                 // node id -> partition slot

  std::size_t node_count() const noexcept { return voters.size() + proposals.size(); }
  const NodeRef& locate(NodeId id) const { return nodes.at(id); }
  bool is_voter(NodeId id) const { return nodes.at(id).kind == NodeKind::Voter; }
  const VoterNode& voter(NodeId id) const;
  VoterNode& voter(NodeId id);
  const ProposalNode& proposal(NodeId id) const;

  // Rebuilds `nodes` and `label_index` from the partition vectors.
  void reindex();
};

// Throws Error(Consistency) on any structural invariant violation.
void validate(const VotingGraph& graph);

struct RegistryEntry {
  std::string address;
  std::string name;
};
using Registry = std::vector<RegistryEntry>;

// CSV `address,name`; addresses are lower-cased.
Registry parse_registry(std::istream& input);
Registry parse_registry_file(const std::string& path);
void write_registry(std::ostream& out, const Registry& registry);

// Merges votes sharing an address, and addresses sharing a registered name,
// into one voter node each. Ids follow first appearance in `votes`.
// Throws Error(Consistency) when the registry gives one address two names.
VotingGraph build_voting_graph(const std::vector<VoteRecord>& votes, const Registry& registry);

struct CentralityEntry {
  NodeId node_id = 0;
  double value = 0.0;
};

struct StatsReport {
  std::size_t node_count = 0;
  std::size_t voter_count = 0;
  std::size_t proposal_count = 0;
  std::size_t edge_count = 0;
  std::size_t simple_edge_count = 0;
  double density = 0.0;
  std::map<std::size_t, std::size_t> degree_histogram;  // degree -> node count
  std::vector<CentralityEntry> top_betweenness;
  std::vector<CentralityEntry> top_eigenvector;
  std::size_t eigenvector_iterations = 0;
  bool eigenvector_converged = true;
  std::size_t known_voters = 0;
  std::size_t unknown_voters = 0;
};

// Exact betweenness (normalized) over the deduplicated undirected graph.
std::vector<double> betweenness_centrality(const VotingGraph& graph);

struct EigenvectorResult {
  std::vector<double> values;
  std::size_t iterations = 0;
  bool converged = true;
};
// Power iteration on (A + I) of the deduplicated graph, L2-normalized.
EigenvectorResult eigenvector_centrality(const VotingGraph& graph, double tolerance = 1e-8,
                                         std::size_t max_iterations = 1000);

StatsReport sociometrics(const VotingGraph& graph, std::size_t top_k = 10);

// Sorted neighbor lists of the simple undirected projection.
std::vector<std::vector<NodeId>> simple_adjacency(const VotingGraph& graph);

}  // namespace sybilnet
