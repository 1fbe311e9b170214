#pragma once

#include <vector>

#include "sybilnet/sybil/clusters.hpp"
#include "sybilnet/votegraph.hpp"

namespace sybilnet::sybil {

struct ClusteredGraph {
  VotingGraph graph;
  std::vector<NodeId> merge_map;  // original node id -> merged node id
};

// Merges every cluster into one voter (wallet union, summed power and vote
// count) sitting at the id slot of its smallest member, then compacts ids and
// retargets every edge. Throws Error(Consistency) when clusters overlap or
// contain proposal nodes.
ClusteredGraph reduce_graph(const VotingGraph& similarity, const SybilClusterSet& clusters);

}  // namespace sybilnet::sybil
