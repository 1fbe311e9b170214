#include "sybilnet/sybil/reduce.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "sybilnet/error.hpp"

namespace sybilnet::sybil {

ClusteredGraph reduce_graph(const VotingGraph& similarity, const SybilClusterSet& clusters) {
  const std::size_t n = similarity.node_count();
  constexpr NodeId kNone = std::numeric_limits<NodeId>::max();
  // Representative (smallest member) of each node's cluster.
  std::vector<NodeId> rep(n, kNone);
  std::vector<std::size_t> cluster_of(n, kNone);
  for (std::size_t ci = 0; ci < clusters.clusters.size(); ++ci) {
    const auto& members = clusters.clusters[ci].members;
    if (members.empty()) continue;
    const NodeId smallest = *std::min_element(members.begin(), members.end());
    for (NodeId id : members) {
      if (id >= n) throw Error(ErrorKind::Consistency, "cluster member " + std::to_string(id) + " is not in the graph");
      if (!similarity.is_voter(id)) {
        throw Error(ErrorKind::Consistency, "cluster member " + std::to_string(id) + " is not a voter");
      }
      if (rep[id] != kNone) throw Error(ErrorKind::Consistency, "node " + std::to_string(id) + " is in two clusters");
      rep[id] = smallest;
      cluster_of[id] = ci;
    }
  }

  ClusteredGraph out;
  out.merge_map.assign(n, kNone);
  NodeId next = 0;
  for (NodeId id = 0; id < n; ++id) {
    if (rep[id] == kNone || rep[id] == id) out.merge_map[id] = next++;
  }
  for (NodeId id = 0; id < n; ++id) {
    if (rep[id] != kNone && rep[id] != id) out.merge_map[id] = out.merge_map[rep[id]];
  }

  VotingGraph& g = out.graph;
  for (NodeId id = 0; id < n; ++id) {
    const NodeRef& ref = similarity.locate(id);
    if (ref.kind == NodeKind::Proposal) {
      ProposalNode p = similarity.proposals[ref.index];
      p.node_id = out.merge_map[id];
      g.proposals.push_back(std::move(p));
      continue;
    }
    const VoterNode& v = similarity.voters[ref.index];
    if (rep[id] == kNone) {
      VoterNode copy = v;
      copy.node_id = out.merge_map[id];
      g.voters.push_back(std::move(copy));
      continue;
    }
    if (rep[id] != id) continue;
    VoterNode merged;
    merged.node_id = out.merge_map[id];
    const SybilCluster& cluster = clusters.clusters[cluster_of[id]];
    merged.label = cluster.label;
    for (NodeId m : cluster.members) {
      const VoterNode& member = similarity.voter(m);
      if (member.is_known()) {
        if (merged.known_name && *merged.known_name != *member.known_name) {
          throw Error(ErrorKind::Consistency, "cluster merges two known identities");
        }
        merged.known_name = member.known_name;
      }
      merged.wallet_addresses.insert(merged.wallet_addresses.end(), member.wallet_addresses.begin(),
                                     member.wallet_addresses.end());
      merged.total_power += member.total_power;
      merged.vote_count += member.vote_count;
    }
    std::sort(merged.wallet_addresses.begin(), merged.wallet_addresses.end());
    merged.wallet_addresses.erase(std::unique(merged.wallet_addresses.begin(), merged.wallet_addresses.end()),
                                  merged.wallet_addresses.end());
    g.voters.push_back(std::move(merged));
  }

  g.edges = similarity.edges;
  for (VoteEdge& e : g.edges) {
    e.voter = out.merge_map[e.voter];
    e.proposal = out.merge_map[e.proposal];
  }
  g.reindex();
  validate(g);
  return out;
}

}  // namespace sybilnet::sybil
