#pragma once

#include <string>

#include <json.hpp>

#include "sybilnet/artifact.hpp"
#include "sybilnet/votegraph.hpp"

namespace sybilnet {

inline constexpr const char* kGraphFormat = "sybilnet.voting_graph";

nlohmann::json graph_to_json(const VotingGraph& graph);
// Rebuilds the node table and validates every invariant.
VotingGraph graph_from_json(const nlohmann::json& doc);

void save_graph(const std::string& path, const VotingGraph& graph, const ArtifactMeta& meta,
                nlohmann::json extra = nlohmann::json::object());

struct LoadedGraph {
  VotingGraph graph;
  ArtifactMeta meta;
  nlohmann::json extra;
};
LoadedGraph load_graph(const std::string& path);

}  // namespace sybilnet
