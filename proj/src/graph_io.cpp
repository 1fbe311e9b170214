#include "sybilnet/graph_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sybilnet/error.hpp"

namespace sybilnet {

using nlohmann::json;

json make_artifact(const std::string& format, const ArtifactMeta& meta, json body) {
  json doc = {{"format", format}, {"version", kArtifactVersion}, {"config_hash", meta.config_hash},
              {"seed", meta.seed}};
  for (auto& [key, value] : body.items()) doc[key] = std::move(value);
  return doc;
}

json read_artifact(const std::string& path, const std::string& format) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::StageDependency, "missing upstream artifact '" + path + "'");
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorKind::Format, "'" + path + "' is not a JSON object");
  if (doc.value("format", std::string()) != format) {
    throw Error(ErrorKind::Format, "'" + path + "' is not a " + format + " artifact");
  }
  if (doc.value("version", 0) != kArtifactVersion) {
    throw Error(ErrorKind::Format, "'" + path + "' has unsupported version");
  }
  return doc;
}

ArtifactMeta artifact_meta(const json& artifact) {
  return {artifact.value("config_hash", std::string()), artifact.value("seed", std::uint64_t{0})};
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

void write_json_file(const std::string& path, const json& doc) { write_text_file(path, doc.dump(1) + "\n"); }

std::string csv_meta_line(const ArtifactMeta& meta) {
  return "# config_hash=" + meta.config_hash + " seed=" + std::to_string(meta.seed) + "\n";
}

json graph_to_json(const VotingGraph& graph) {
  json voters = json::array();
  for (const auto& v : graph.voters) {
    voters.push_back({{"node_id", v.node_id},
                      {"known_name", v.known_name ? json(*v.known_name) : json(nullptr)},
                      {"wallets", v.wallet_addresses},
                      {"total_power", v.total_power},
                      {"vote_count", v.vote_count},
                      {"label", v.label}});
  }
  json proposals = json::array();
  for (const auto& p : graph.proposals) {
    proposals.push_back({{"node_id", p.node_id}, {"proposal_id", p.proposal_id}, {"space_id", p.space_id}});
  }
  json edges = json::array();
  for (const auto& e : graph.edges) {
    edges.push_back(json::array({e.voter, e.proposal, e.voting_power, e.timestamp, e.choice}));
  }
  return {{"voters", std::move(voters)}, {"proposals", std::move(proposals)}, {"edges", std::move(edges)}};
}

VotingGraph graph_from_json(const json& doc) {
  VotingGraph g;
  try {
    for (const auto& v : doc.at("voters")) {
      VoterNode node;
      node.node_id = v.at("node_id").get<NodeId>();
      if (!v.at("known_name").is_null()) node.known_name = v.at("known_name").get<std::string>();
      node.wallet_addresses = v.at("wallets").get<std::vector<std::string>>();
      node.total_power = v.at("total_power").get<double>();
      node.vote_count = v.at("vote_count").get<std::size_t>();
      node.label = v.value("label", std::string());
      g.voters.push_back(std::move(node));
    }
    for (const auto& p : doc.at("proposals")) {
      g.proposals.push_back(
          {p.at("node_id").get<NodeId>(), p.at("proposal_id").get<std::string>(), p.at("space_id").get<std::string>()});
    }
    for (const auto& e : doc.at("edges")) {
      g.edges.push_back({e.at(0).get<NodeId>(), e.at(1).get<NodeId>(), e.at(2).get<double>(),
                         e.at(3).get<EpochSeconds>(), e.at(4).get<int>()});
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, std::string("malformed graph container: ") + ex.what());
  }
  g.reindex();
  validate(g);
  return g;
}

void save_graph(const std::string& path, const VotingGraph& graph, const ArtifactMeta& meta, json extra) {
  json body = graph_to_json(graph);
  for (auto& [key, value] : extra.items()) body[key] = std::move(value);
  write_json_file(path, make_artifact(kGraphFormat, meta, std::move(body)));
}

LoadedGraph load_graph(const std::string& path) {
  json doc = read_artifact(path, kGraphFormat);
  LoadedGraph out;
  out.graph = graph_from_json(doc);
  out.meta = artifact_meta(doc);
  out.extra = json::object();
  for (auto& [key, value] : doc.items()) {
    if (key != "voters" && key != "proposals" && key != "edges" && key != "format" && key != "version" &&
        key != "config_hash" && key != "seed") {
      out.extra[key] = value;
    }
  }
  return out;
}

}  // namespace sybilnet
