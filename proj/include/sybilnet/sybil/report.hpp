#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "sybilnet/artifact.hpp"
#include "sybilnet/ingest.hpp"
#include "sybilnet/sybil/clusters.hpp"
#include "sybilnet/sybil/reduce.hpp"

namespace sybilnet::sybil {

struct GraphSize {
  std::size_t nodes = 0;
  std::size_t edges = 0;
};

struct SociometricReport {
  EpochSeconds start_date = 0;
  EpochSeconds end_date = 0;
  GraphSize original;
  GraphSize similarity;
  GraphSize clustered;
  std::size_t known_voters = 0;
  std::size_t unknown_voters = 0;
  std::size_t potential_sybils = 0;
  std::size_t sybil_clusters = 0;
  std::size_t nodes_removed = 0;         // original nodes - clustered nodes
  double node_reduction_percent = 0.0;   // nodes_removed over original nodes
  double potential_sybils_percent = 0.0;  // potential sybils over original nodes
  double clusters_percent_of_unknown = 0.0;
};

// Throws Error(Consistency) when the graphs cannot come from one run.
SociometricReport sociometric_report(const VotingGraph& original, const VotingGraph& similarity,
                                     const ClusteredGraph& clustered, const SybilClusterSet& clusters,
                                     const DatasetWindow& window);

struct ReportRow {
  std::string label;
  std::string value;
};

// The nine summary quantities followed by the two reduction numerators.
std::vector<ReportRow> report_rows(const SociometricReport& report);

nlohmann::json report_to_json(const SociometricReport& report);
SociometricReport report_from_json(const nlohmann::json& doc);
std::string report_to_text(const SociometricReport& report);

// `cluster_id,node_id,propagated_label`, one line per member.
std::string cluster_csv(const SybilClusterSet& clusters, const ArtifactMeta& meta);
// `size,count` over the surviving clusters.
std::string cluster_size_histogram_csv(const SybilClusterSet& clusters, const ArtifactMeta& meta);

std::string format_date(EpochSeconds t);
// "<y> years and <d> days" of whole elapsed days.
std::string format_duration(EpochSeconds seconds);
// Thousands separators: 89833 -> "89,833".
std::string format_count(std::size_t v);

}  // namespace sybilnet::sybil
