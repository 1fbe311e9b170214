#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "sybilnet/artifact.hpp"
#include "sybilnet/embedder/features.hpp"
#include "sybilnet/ingest.hpp"
#include "sybilnet/synth.hpp"

namespace sybilnet::pipeline {

struct PathsConfig {
  std::string votes;
  std::string proposals;  // optional; no duration filter when empty
  std::string registry;   // optional
  std::string truth;      // optional; enables the eval stage in `pipeline`
  std::string out_dir = "out";
};

struct IngestConfig {
  EpochSeconds min_duration = kDefaultMinDuration;
  EpochSeconds max_duration = kDefaultMaxDuration;
  EpochSeconds window_start = 0;
  EpochSeconds window_end = std::numeric_limits<EpochSeconds>::max();
};

struct ClusterConfig {
  std::size_t k = 0;       // explicit cluster count; 0 means ceil(k_ratio * unknown voters)
  double k_ratio = 0.01;
  std::size_t max_iters = 100;
  std::size_t label_neighbors = 5;
  bool drop_singletons = true;
  bool drop_oversized = true;
};

struct PipelineConfig {
  PathsConfig paths;
  IngestConfig ingest;
  embed::TrainConfig train;
  bool grid_search = false;
  ClusterConfig cluster;
  synth::SynthConfig synth;
  std::uint64_t seed = 7;  // drives training, clustering and synthesis
};

// Keys absent from `doc` keep the values in `base`; unknown keys are a usage error.
PipelineConfig config_from_json(const nlohmann::json& doc, PipelineConfig base = {});
PipelineConfig load_config(const std::string& path);
nlohmann::json config_to_json(const PipelineConfig& config);

// Copies the top-level seed into the stage configs and validates everything.
// Throws Error(Usage).
PipelineConfig finalize(PipelineConfig config);

// FNV-1a over the canonical effective config, without the output directory.
std::string config_hash(const PipelineConfig& config);
ArtifactMeta artifact_meta_for(const PipelineConfig& config);

std::size_t resolve_k(const ClusterConfig& cluster, std::size_t unknown_voters);

namespace files {
inline constexpr const char* kGraph = "graph.json";
inline constexpr const char* kProposalDurations = "proposal_durations.csv";
inline constexpr const char* kStats = "stats.json";
inline constexpr const char* kDegreeHistogram = "degree_histogram.csv";
inline constexpr const char* kCheckpoint = "checkpoint.json";
inline constexpr const char* kLossCurve = "loss_curve.csv";
inline constexpr const char* kGridSearch = "grid_search.csv";
inline constexpr const char* kEmbeddings = "embeddings.json";
inline constexpr const char* kClusters = "clusters.json";
inline constexpr const char* kClusterCsv = "clusters.csv";
inline constexpr const char* kClusterSizes = "cluster_sizes.csv";
inline constexpr const char* kSimilarityGraph = "similarity_graph.json";
inline constexpr const char* kClusteredGraph = "clustered_graph.json";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kEval = "eval.json";
inline constexpr const char* kSynthVotes = "votes.csv";
inline constexpr const char* kSynthProposals = "proposals.csv";
inline constexpr const char* kSynthRegistry = "registry.csv";
inline constexpr const char* kSynthTruth = "truth.csv";
}  // namespace files

std::string out_path(const PipelineConfig& config, const std::string& name);

// Each stage reads its inputs from the output directory, writes its
// artifacts there and returns a short JSON summary.
nlohmann::json run_ingest(const PipelineConfig& config);
nlohmann::json run_stats(const PipelineConfig& config);
nlohmann::json run_train(const PipelineConfig& config);
nlohmann::json run_embed(const PipelineConfig& config);
nlohmann::json run_cluster(const PipelineConfig& config);
nlohmann::json run_reduce(const PipelineConfig& config);
nlohmann::json run_report(const PipelineConfig& config);
nlohmann::json run_synth(const PipelineConfig& config);
nlohmann::json run_eval(const PipelineConfig& config);
// ingest, stats, train, embed, cluster, reduce, report, then eval when a
// truth file is configured.
nlohmann::json run_pipeline(const PipelineConfig& config);

}  // namespace sybilnet::pipeline
