#include "sybilnet/sybil/report.hpp"

#include <chrono>
#include <cstdio>
#include <map>

#include "sybilnet/error.hpp"
#include "sybilnet/text.hpp"

namespace sybilnet::sybil {

using nlohmann::json;

namespace {

constexpr EpochSeconds kSecondsPerDay = 86400;

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::string graph_size_text(const GraphSize& g) {
  return format_count(g.nodes) + " nodes, " + format_count(g.edges) + " edges";
}

json graph_size_json(const GraphSize& g) { return {{"nodes", g.nodes}, {"edges", g.edges}}; }

GraphSize graph_size_from(const json& doc) {
  return {doc.at("nodes").get<std::size_t>(), doc.at("edges").get<std::size_t>()};
}

}  // namespace

std::string format_date(EpochSeconds t) {
  using namespace std::chrono;
  const year_month_day d{floor<days>(sys_seconds{seconds{t}})};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::string format_duration(EpochSeconds seconds) {
  const EpochSeconds days = seconds < 0 ? 0 : seconds / kSecondsPerDay;
  return std::to_string(days / 365) + " years and " + std::to_string(days % 365) + " days";
}

std::string format_count(std::size_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

SociometricReport sociometric_report(const VotingGraph& original, const VotingGraph& similarity,
                                     const ClusteredGraph& clustered, const SybilClusterSet& clusters,
                                     const DatasetWindow& window) {
  if (similarity.node_count() != original.node_count() || similarity.edges.size() != original.edges.size()) {
    throw Error(ErrorKind::Consistency, "similarity graph does not match the original graph");
  }
  if (clustered.merge_map.size() != original.node_count() ||
      clustered.graph.edges.size() != original.edges.size()) {
    throw Error(ErrorKind::Consistency, "clustered graph does not match the original graph");
  }
  SociometricReport r;
  r.start_date = window.start_date;
  r.end_date = window.end_date;
  r.original = {original.node_count(), original.edges.size()};
  r.similarity = {similarity.node_count(), similarity.edges.size()};
  r.clustered = {clustered.graph.node_count(), clustered.graph.edges.size()};
  for (const auto& v : original.voters) (v.is_known() ? r.known_voters : r.unknown_voters) += 1;
  r.sybil_clusters = clusters.clusters.size();
  for (const auto& c : clusters.clusters) r.potential_sybils += c.members.size();
  r.nodes_removed = r.original.nodes - r.clustered.nodes;
  r.node_reduction_percent = percent(r.nodes_removed, r.original.nodes);
  r.potential_sybils_percent = percent(r.potential_sybils, r.original.nodes);
  r.clusters_percent_of_unknown = percent(r.sybil_clusters, r.unknown_voters);
  return r;
}

std::vector<ReportRow> report_rows(const SociometricReport& r) {
  return {
      {"Date Range", format_date(r.start_date) + " to " + format_date(r.end_date) + " (" +
                         format_duration(r.end_date - r.start_date) + ")"},
      {"Original Graph", graph_size_text(r.original)},
      {"Similarity Graph", graph_size_text(r.similarity)},
      {"Clustered Graph", graph_size_text(r.clustered)},
      {"Number of Known Voters", format_count(r.known_voters)},
      {"Number of Unknown Voters", format_count(r.unknown_voters)},
      {"Number of Potential Sybils Identified", format_count(r.potential_sybils)},
      {"Number of Sybil Clusters Formed",
       format_count(r.sybil_clusters) + " (" + format_fixed(r.clusters_percent_of_unknown, 2) + "% of Unknown Voters)"},
      {"Node Reduction After Clustering Sybils", format_fixed(r.node_reduction_percent, 2) + "%"},
      {"Reduction Numerator: Nodes Removed", format_count(r.nodes_removed)},
      {"Reduction Numerator: Potential Sybils",
       format_count(r.potential_sybils) + " (" + format_fixed(r.potential_sybils_percent, 2) + "% of nodes)"},
  };
}

json report_to_json(const SociometricReport& r) {
  json rows = json::array();
  for (const auto& row : report_rows(r)) rows.push_back({{"label", row.label}, {"value", row.value}});
  return {{"rows", std::move(rows)},
          {"values",
           {{"start_date", r.start_date},
            {"end_date", r.end_date},
            {"original", graph_size_json(r.original)},
            {"similarity", graph_size_json(r.similarity)},
            {"clustered", graph_size_json(r.clustered)},
            {"known_voters", r.known_voters},
            {"unknown_voters", r.unknown_voters},
            {"potential_sybils", r.potential_sybils},
            {"sybil_clusters", r.sybil_clusters},
            {"nodes_removed", r.nodes_removed},
            {"node_reduction_percent", r.node_reduction_percent},
            {"potential_sybils_percent", r.potential_sybils_percent},
            {"clusters_percent_of_unknown", r.clusters_percent_of_unknown}}}};
}

SociometricReport report_from_json(const json& doc) {
  SociometricReport r;
  try {
    const json& v = doc.at("values");
    r.start_date = v.at("start_date").get<EpochSeconds>();
    r.end_date = v.at("end_date").get<EpochSeconds>();
    r.original = graph_size_from(v.at("original"));
    r.similarity = graph_size_from(v.at("similarity"));
    r.clustered = graph_size_from(v.at("clustered"));
    r.known_voters = v.at("known_voters").get<std::size_t>();
    r.unknown_voters = v.at("unknown_voters").get<std::size_t>();
    r.potential_sybils = v.at("potential_sybils").get<std::size_t>();
    r.sybil_clusters = v.at("sybil_clusters").get<std::size_t>();
    r.nodes_removed = v.at("nodes_removed").get<std::size_t>();
    r.node_reduction_percent = v.at("node_reduction_percent").get<double>();
    r.potential_sybils_percent = v.at("potential_sybils_percent").get<double>();
    r.clusters_percent_of_unknown = v.at("clusters_percent_of_unknown").get<double>();
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, std::string("malformed report: ") + ex.what());
  }
  return r;
}

std::string report_to_text(const SociometricReport& r) {
  const auto rows = report_rows(r);
  std::size_t label_width = std::string("Metric").size();
  std::size_t value_width = std::string("Value").size();
  for (const auto& row : rows) {
    label_width = std::max(label_width, row.label.size());
    value_width = std::max(value_width, row.value.size());
  }
  auto line = [&](const std::string& label, const std::string& value) {
    return label + std::string(label_width - label.size() + 2, ' ') + std::string(value_width - value.size(), ' ') +
           value + "\n";
  };
  const std::string rule(label_width + 2 + value_width, '-');
  std::string out = rule + "\n" + line("Metric", "Value") + rule + "\n";
  for (const auto& row : rows) out += line(row.label, row.value);
  out += rule + "\n";
  return out;
}

std::string cluster_csv(const SybilClusterSet& clusters, const ArtifactMeta& meta) {
  std::string out = csv_meta_line(meta) + "cluster_id,node_id,propagated_label\n";
  for (std::size_t ci = 0; ci < clusters.clusters.size(); ++ci) {
    for (NodeId id : clusters.clusters[ci].members) {
      out += std::to_string(ci) + "," + std::to_string(id) + "," + csv_field(clusters.clusters[ci].label) + "\n";
    }
  }
  return out;
}

std::string cluster_size_histogram_csv(const SybilClusterSet& clusters, const ArtifactMeta& meta) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto& c : clusters.clusters) ++counts[c.members.size()];
  std::string out = csv_meta_line(meta) + "size,count\n";
  for (const auto& [size, count] : counts) out += std::to_string(size) + "," + std::to_string(count) + "\n";
  return out;
}

}  // namespace sybilnet::sybil
