#include "sybilnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sybilnet/embedder/checkpoint.hpp"
#include "sybilnet/embedder/train.hpp"
#include "sybilnet/error.hpp"
#include "sybilnet/graph_io.hpp"
#include "sybilnet/sybil/kmeans.hpp"
#include "sybilnet/sybil/reduce.hpp"
#include "sybilnet/sybil/report.hpp"
#include "sybilnet/text.hpp"

namespace sybilnet::pipeline {

using nlohmann::json;

namespace {

constexpr const char* kClustersFormat = "sybilnet.clusters";
constexpr const char* kReportFormat = "sybilnet.report";
constexpr const char* kStatsFormat = "sybilnet.stats";
constexpr const char* kEvalFormat = "sybilnet.eval";
constexpr std::size_t kBaselineRounds = 20;

void check_keys(const json& doc, const json& reference, const std::string& section) {
  if (!doc.is_object()) throw Error(ErrorKind::Usage, "config section '" + section + "' must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!reference.contains(key)) throw Error(ErrorKind::Usage, "unknown config key '" + section + key + "'");
  }
}

json synth_to_json(const synth::SynthConfig& s) {
  return {{"honest_voters", s.honest_voters},
          {"sybil_entities", s.sybil_entities},
          {"wallets_per_sybil", {s.wallets_per_sybil.min, s.wallets_per_sybil.max}},
          {"proposals", s.proposals},
          {"votes_per_voter", {s.votes_per_voter.min, s.votes_per_voter.max}},
          {"behavior_noise", s.behavior_noise},
          {"known_fraction", s.known_fraction},
          {"spaces", s.spaces},
          {"start", s.start},
          {"span_days", s.span_days}};
}

synth::CountRange range_from(const json& doc, synth::CountRange r) {
  if (doc.is_number_unsigned()) return {doc.get<std::size_t>(), doc.get<std::size_t>()};
  const auto pair = doc.get<std::vector<std::size_t>>();
  if (pair.size() != 2) throw Error(ErrorKind::Usage, "ranges are written as [min, max]");
  r.min = pair[0];
  r.max = pair[1];
  return r;
}

synth::SynthConfig synth_from_json(const json& doc, synth::SynthConfig s) {
  s.honest_voters = doc.value("honest_voters", s.honest_voters);
  s.sybil_entities = doc.value("sybil_entities", s.sybil_entities);
  if (doc.contains("wallets_per_sybil")) s.wallets_per_sybil = range_from(doc.at("wallets_per_sybil"), s.wallets_per_sybil);
  s.proposals = doc.value("proposals", s.proposals);
  if (doc.contains("votes_per_voter")) s.votes_per_voter = range_from(doc.at("votes_per_voter"), s.votes_per_voter);
  s.behavior_noise = doc.value("behavior_noise", s.behavior_noise);
  s.known_fraction = doc.value("known_fraction", s.known_fraction);
  s.spaces = doc.value("spaces", s.spaces);
  s.start = doc.value("start", s.start);
  s.span_days = doc.value("span_days", s.span_days);
  return s;
}

json train_section(const PipelineConfig& c) {
  json t = embed::train_config_to_json(c.train);
  t.erase("seed");
  t["grid_search"] = c.grid_search;
  return t;
}

json window_json(const DatasetWindow& w) {
  return {{"start_date", w.start_date},
          {"end_date", w.end_date},
          {"vote_count", w.vote_count},
          {"proposal_count", w.proposal_count},
          {"voter_count", w.voter_count}};
}

DatasetWindow window_from(const json& doc) {
  try {
    return {doc.at("start_date").get<EpochSeconds>(), doc.at("end_date").get<EpochSeconds>(),
            doc.at("vote_count").get<std::size_t>(), doc.at("proposal_count").get<std::size_t>(),
            doc.at("voter_count").get<std::size_t>()};
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, std::string("malformed dataset window: ") + ex.what());
  }
}

void ensure_out_dir(const PipelineConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.paths.out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + c.paths.out_dir + "': " + ec.message());
}

void require_input(const std::string& path, const std::string& what) {
  if (path.empty()) throw Error(ErrorKind::Usage, "no " + what + " path configured");
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::Io, what + " file '" + path + "' does not exist");
}

void require_meta(const ArtifactMeta& have, const ArtifactMeta& want, const std::string& path) {
  if (have != want) {
    throw Error(ErrorKind::Consistency, "artifact '" + path + "' was written with config hash " + have.config_hash +
                                            " seed " + std::to_string(have.seed) + ", expected " + want.config_hash +
                                            " seed " + std::to_string(want.seed));
  }
}

json stats_json(const StatsReport& s) {
  auto entries = [](const std::vector<CentralityEntry>& v) {
    json out = json::array();
    for (const auto& e : v) out.push_back({{"node_id", e.node_id}, {"value", e.value}});
    return out;
  };
  json hist = json::array();
  for (const auto& [degree, count] : s.degree_histogram) hist.push_back({degree, count});
  return {{"node_count", s.node_count},
          {"voter_count", s.voter_count},
          {"proposal_count", s.proposal_count},
          {"edge_count", s.edge_count},
          {"simple_edge_count", s.simple_edge_count},
          {"density", s.density},
          {"degree_histogram", std::move(hist)},
          {"top_betweenness", entries(s.top_betweenness)},
          {"top_eigenvector", entries(s.top_eigenvector)},
          {"eigenvector_iterations", s.eigenvector_iterations},
          {"eigenvector_converged", s.eigenvector_converged},
          {"known_voters", s.known_voters},
          {"unknown_voters", s.unknown_voters}};
}

struct ClusterArtifact {
  sybil::SybilClusterSet clusters;
  ArtifactMeta meta;
};

ClusterArtifact load_clusters(const std::string& path) {
  json doc = read_artifact(path, kClustersFormat);
  return {sybil::cluster_set_from_json(doc), artifact_meta(doc)};
}

sybil::ClusteredGraph load_clustered(const std::string& path, ArtifactMeta& meta) {
  LoadedGraph loaded = load_graph(path);
  meta = loaded.meta;
  sybil::ClusteredGraph out;
  out.graph = std::move(loaded.graph);
  try {
    out.merge_map = loaded.extra.at("merge_map").get<std::vector<NodeId>>();
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, "clustered graph '" + path + "' has no merge map: " + ex.what());
  }
  for (NodeId id : out.merge_map) {
    if (id >= out.graph.node_count()) throw Error(ErrorKind::Consistency, "merge map points outside the clustered graph");
  }
  return out;
}

}  // namespace

PipelineConfig config_from_json(const json& doc, PipelineConfig c) {
  const json reference = config_to_json(PipelineConfig{});
  check_keys(doc, reference, "");
  try {
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("paths")) {
      const json& p = doc.at("paths");
      check_keys(p, reference.at("paths"), "paths.");
      c.paths.votes = p.value("votes", c.paths.votes);
      c.paths.proposals = p.value("proposals", c.paths.proposals);
      c.paths.registry = p.value("registry", c.paths.registry);
      c.paths.truth = p.value("truth", c.paths.truth);
      c.paths.out_dir = p.value("out_dir", c.paths.out_dir);
    }
    if (doc.contains("ingest")) {
      const json& i = doc.at("ingest");
      check_keys(i, reference.at("ingest"), "ingest.");
      c.ingest.min_duration = i.value("min_duration", c.ingest.min_duration);
      c.ingest.max_duration = i.value("max_duration", c.ingest.max_duration);
      c.ingest.window_start = i.value("window_start", c.ingest.window_start);
      c.ingest.window_end = i.value("window_end", c.ingest.window_end);
    }
    if (doc.contains("train")) {
      const json& t = doc.at("train");
      check_keys(t, reference.at("train"), "train.");
      if (t.contains("grid")) check_keys(t.at("grid"), reference.at("train").at("grid"), "train.grid.");
      c.train = embed::train_config_from_json(t, c.train);
      c.grid_search = t.value("grid_search", c.grid_search);
    }
    if (doc.contains("cluster")) {
      const json& k = doc.at("cluster");
      check_keys(k, reference.at("cluster"), "cluster.");
      c.cluster.k = k.value("k", c.cluster.k);
      c.cluster.k_ratio = k.value("k_ratio", c.cluster.k_ratio);
      c.cluster.max_iters = k.value("max_iters", c.cluster.max_iters);
      c.cluster.label_neighbors = k.value("label_neighbors", c.cluster.label_neighbors);
      c.cluster.drop_singletons = k.value("drop_singletons", c.cluster.drop_singletons);
      c.cluster.drop_oversized = k.value("drop_oversized", c.cluster.drop_oversized);
    }
    if (doc.contains("synth")) {
      check_keys(doc.at("synth"), reference.at("synth"), "synth.");
      c.synth = synth_from_json(doc.at("synth"), c.synth);
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Usage, std::string("invalid config value: ") + ex.what());
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Usage, "cannot open config file '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorKind::Usage, "config file '" + path + "' is not valid JSON");
  return config_from_json(doc);
}

json config_to_json(const PipelineConfig& c) {
  return {{"seed", c.seed},
          {"paths",
           {{"votes", c.paths.votes},
            {"proposals", c.paths.proposals},
            {"registry", c.paths.registry},
            {"truth", c.paths.truth},
            {"out_dir", c.paths.out_dir}}},
          {"ingest",
           {{"min_duration", c.ingest.min_duration},
            {"max_duration", c.ingest.max_duration},
            {"window_start", c.ingest.window_start},
            {"window_end", c.ingest.window_end}}},
          {"train", train_section(c)},
          {"cluster",
           {{"k", c.cluster.k},
            {"k_ratio", c.cluster.k_ratio},
            {"max_iters", c.cluster.max_iters},
            {"label_neighbors", c.cluster.label_neighbors},
            {"drop_singletons", c.cluster.drop_singletons},
            {"drop_oversized", c.cluster.drop_oversized}}},
          {"synth", synth_to_json(c.synth)}};
}

PipelineConfig finalize(PipelineConfig c) {
  c.train.seed = c.seed;
  c.synth.seed = c.seed;
  embed::validate(c.train);
  synth::validate(c.synth);
  if (c.ingest.min_duration > c.ingest.max_duration) throw Error(ErrorKind::Usage, "min_duration exceeds max_duration");
  if (c.ingest.window_start > c.ingest.window_end) throw Error(ErrorKind::Usage, "window_start is after window_end");
  if (c.cluster.k == 0 && !(c.cluster.k_ratio > 0.0 && c.cluster.k_ratio <= 1.0)) {
    throw Error(ErrorKind::Usage, "cluster.k_ratio must lie in (0, 1]");
  }
  if (c.cluster.max_iters == 0) throw Error(ErrorKind::Usage, "cluster.max_iters must be at least 1");
  if (c.paths.out_dir.empty()) throw Error(ErrorKind::Usage, "paths.out_dir is empty");
  return c;
}

std::string config_hash(const PipelineConfig& config) {
  json doc = config_to_json(config);
  doc["paths"].erase("out_dir");
  return hex64(fnv1a(doc.dump()));
}

ArtifactMeta artifact_meta_for(const PipelineConfig& config) { return {config_hash(config), config.seed}; }

std::size_t resolve_k(const ClusterConfig& cluster, std::size_t unknown_voters) {
  if (cluster.k > 0) return cluster.k;
  // The slack keeps products such as 0.01 * 700 from rounding up past an integer.
  const double k = std::ceil(cluster.k_ratio * static_cast<double>(unknown_voters) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 1.0)), 1, std::max<std::size_t>(unknown_voters, 1));
}

std::string out_path(const PipelineConfig& config, const std::string& name) {
  return (std::filesystem::path(config.paths.out_dir) / name).string();
}

json run_ingest(const PipelineConfig& c) {
  require_input(c.paths.votes, "votes");
  ensure_out_dir(c);
  const ArtifactMeta meta = artifact_meta_for(c);
  ParseResult<VoteRecord> parsed = parse_votes_file(c.paths.votes, format_from_path(c.paths.votes));
  std::vector<VoteRecord> votes = std::move(parsed.records);

  json summary = {{"votes_parsed", votes.size()}, {"vote_diagnostics", parsed.diagnostics.size()}};
  std::string durations = csv_meta_line(meta) + "proposal,duration_seconds,kept\n";
  if (!c.paths.proposals.empty()) {
    require_input(c.paths.proposals, "proposals");
    ParseResult<ProposalRecord> proposals = parse_proposals_file(c.paths.proposals);
    ProposalFilterResult filtered = filter_proposals(proposals.records, c.ingest.min_duration, c.ingest.max_duration);
    std::set<std::string> kept;
    for (const auto& p : filtered.kept) kept.insert(p.proposal_id);
    for (const auto& p : proposals.records) {
      durations += csv_field(p.proposal_id) + "," + std::to_string(p.duration()) + "," +
                   (kept.count(p.proposal_id) ? "1" : "0") + "\n";
    }
    const std::size_t before = votes.size();
    votes = restrict_to_proposals(votes, filtered.kept);
    summary["proposals_kept"] = filtered.kept.size();
    summary["proposals_rejected"] = filtered.rejected;
    summary["proposal_diagnostics"] = proposals.diagnostics.size();
    summary["votes_dropped_by_proposal_filter"] = before - votes.size();
  }
  WindowResult windowed = window_and_sort(votes, c.ingest.window_start, c.ingest.window_end);
  DatasetWindow window = windowed.window;
  if (!windowed.votes.empty()) {
    window.start_date = windowed.votes.front().timestamp;
    window.end_date = windowed.votes.back().timestamp;
  } else {
    window.start_date = window.end_date = 0;
  }
  Registry registry;
  if (!c.paths.registry.empty()) {
    require_input(c.paths.registry, "registry");
    registry = parse_registry_file(c.paths.registry);
  }
  VotingGraph graph = build_voting_graph(windowed.votes, registry);
  summary["votes_in_window"] = windowed.votes.size();
  summary["nodes"] = graph.node_count();
  summary["edges"] = graph.edges.size();
  save_graph(out_path(c, files::kGraph), graph, meta, {{"window", window_json(window)}, {"ingest", summary}});
  write_text_file(out_path(c, files::kProposalDurations), durations);
  return summary;
}

json run_stats(const PipelineConfig& c) {
  const ArtifactMeta meta = artifact_meta_for(c);
  LoadedGraph loaded = load_graph(out_path(c, files::kGraph));
  const StatsReport stats = sociometrics(loaded.graph);
  json body = stats_json(stats);
  write_json_file(out_path(c, files::kStats), make_artifact(kStatsFormat, meta, body));
  std::string hist = csv_meta_line(meta) + "degree,count\n";
  for (const auto& [degree, count] : stats.degree_histogram) {
    hist += std::to_string(degree) + "," + std::to_string(count) + "\n";
  }
  write_text_file(out_path(c, files::kDegreeHistogram), hist);
  return {{"nodes", stats.node_count}, {"edges", stats.edge_count}, {"density", stats.density},
          {"known_voters", stats.known_voters}, {"unknown_voters", stats.unknown_voters}};
}

json run_train(const PipelineConfig& c) {
  const ArtifactMeta meta = artifact_meta_for(c);
  LoadedGraph loaded = load_graph(out_path(c, files::kGraph));
  embed::TrainConfig train = c.train;
  json summary = json::object();
  if (c.grid_search) {
    const embed::GridSearchResult grid = embed::grid_search(loaded.graph, train);
    std::string table = csv_meta_line(meta) + "embedding_dim,learning_rate,heads,validation_mse\n";
    for (const auto& row : grid.table) {
      table += std::to_string(row.embedding_dim) + "," + format_double(row.learning_rate) + "," +
               std::to_string(row.heads) + "," + format_double(row.validation_mse) + "\n";
    }
    write_text_file(out_path(c, files::kGridSearch), table);
    train = grid.best;
    summary["grid_rows"] = grid.table.size();
  }
  const embed::TrainResult result = embed::train(loaded.graph, train);
  embed::save_checkpoint(out_path(c, files::kCheckpoint),
                         {result.params, train, result.best_epoch, result.best_validation_mse, meta});
  write_text_file(out_path(c, files::kLossCurve), embed::loss_curve_csv(result.loss_curve, meta));
  summary["best_epoch"] = result.best_epoch;
  summary["best_validation_mse"] = result.best_validation_mse;
  summary["final_train_mse"] = result.loss_curve.empty() ? 0.0 : result.loss_curve.back().train_mse;
  return summary;
}

json run_embed(const PipelineConfig& c) {
  const ArtifactMeta meta = artifact_meta_for(c);
  LoadedGraph loaded = load_graph(out_path(c, files::kGraph));
  const embed::Checkpoint checkpoint = embed::load_checkpoint(out_path(c, files::kCheckpoint));
  const embed::FeatureSet features = embed::engineer_features(loaded.graph, checkpoint.config);
  const embed::EmbeddingMatrix embeddings = embed::embed_all(checkpoint.params, features, checkpoint.config);
  embed::save_embeddings(out_path(c, files::kEmbeddings), embeddings, meta);
  return {{"nodes", embeddings.values.rows()},
          {"dimensions", embeddings.values.cols()},
          {"dead_dimensions", embeddings.dead_dimensions}};
}

json run_cluster(const PipelineConfig& c) {
  const ArtifactMeta meta = artifact_meta_for(c);
  LoadedGraph loaded = load_graph(out_path(c, files::kGraph));
  const embed::LoadedEmbeddings emb = embed::load_embeddings(out_path(c, files::kEmbeddings));
  const VotingGraph& graph = loaded.graph;
  const num::Tensor& vectors = emb.embeddings.values;
  if (vectors.rows() != graph.node_count()) {
    throw Error(ErrorKind::Consistency, "embeddings have " + std::to_string(vectors.rows()) + " rows for " +
                                            std::to_string(graph.node_count()) + " nodes");
  }
  std::vector<NodeId> unknown;
  for (const auto& v : graph.voters) {
    if (!v.is_known()) unknown.push_back(v.node_id);
  }
  std::sort(unknown.begin(), unknown.end());

  json kmeans_json = nullptr;
  sybil::ClusterFilterPolicy policy;
  policy.drop_singletons = c.cluster.drop_singletons;
  policy.drop_oversized = c.cluster.drop_oversized;
  sybil::SybilClusterSet clusters = sybil::normalize_clusters(std::vector<std::vector<NodeId>>{}, policy);
  const std::size_t k = unknown.empty() ? 0 : resolve_k(c.cluster, unknown.size());
  if (!unknown.empty()) {
    num::Tensor points = num::Tensor::matrix(unknown.size(), vectors.cols());
    for (std::size_t r = 0; r < unknown.size(); ++r) {
      for (std::size_t col = 0; col < vectors.cols(); ++col) points.at(r, col) = vectors.at(unknown[r], col);
    }
    const sybil::KMeansResult km = sybil::kmeans_cluster(points, k, c.cluster.max_iters, c.seed);
    clusters = sybil::normalize_clusters(km, unknown, policy);
    kmeans_json = {{"k", km.k},
                   {"iterations_run", km.iterations_run},
                   {"converged", km.converged},
                   {"objective", km.objective},
                   {"objective_history", km.objective_history}};
  }
  const VotingGraph similarity = sybil::propagate_labels(graph, clusters, vectors, c.cluster.label_neighbors);

  json body = sybil::cluster_set_to_json(clusters);
  body["kmeans"] = kmeans_json;
  write_json_file(out_path(c, files::kClusters), make_artifact(kClustersFormat, meta, body));
  save_graph(out_path(c, files::kSimilarityGraph), similarity, meta);
  write_text_file(out_path(c, files::kClusterCsv), sybil::cluster_csv(clusters, meta));
  write_text_file(out_path(c, files::kClusterSizes), sybil::cluster_size_histogram_csv(clusters, meta));
  return {{"k", k},
          {"clusters", clusters.stats.total_clusters},
          {"flagged_nodes", clusters.stats.flagged_nodes},
          {"singletons_dropped", clusters.stats.singletons_dropped},
          {"oversized_dropped", clusters.stats.oversized_dropped},
          {"size_threshold", clusters.policy.size_threshold}};
}

json run_reduce(const PipelineConfig& c) {
  const ArtifactMeta meta = artifact_meta_for(c);
  LoadedGraph similarity = load_graph(out_path(c, files::kSimilarityGraph));
  const ClusterArtifact clusters = load_clusters(out_path(c, files::kClusters));
  const sybil::ClusteredGraph reduced = sybil::reduce_graph(similarity.graph, clusters.clusters);
  save_graph(out_path(c, files::kClusteredGraph), reduced.graph, meta, {{"merge_map", reduced.merge_map}});
  return {{"nodes_before", similarity.graph.node_count()},
          {"nodes_after", reduced.graph.node_count()},
          {"edges", reduced.graph.edges.size()}};
}

json run_report(const PipelineConfig& c) {
  const ArtifactMeta meta = artifact_meta_for(c);
  const std::string graph_path = out_path(c, files::kGraph);
  const std::string similarity_path = out_path(c, files::kSimilarityGraph);
  const std::string clustered_path = out_path(c, files::kClusteredGraph);
  const std::string clusters_path = out_path(c, files::kClusters);
  LoadedGraph original = load_graph(graph_path);
  LoadedGraph similarity = load_graph(similarity_path);
  ArtifactMeta clustered_meta;
  const sybil::ClusteredGraph clustered = load_clustered(clustered_path, clustered_meta);
  const ClusterArtifact clusters = load_clusters(clusters_path);
  require_meta(original.meta, meta, graph_path);
  require_meta(similarity.meta, meta, similarity_path);
  require_meta(clustered_meta, meta, clustered_path);
  require_meta(clusters.meta, meta, clusters_path);

  const DatasetWindow window = window_from(original.extra.value("window", json::object()));
  const sybil::SociometricReport report =
      sybil::sociometric_report(original.graph, similarity.graph, clustered, clusters.clusters, window);
  write_json_file(out_path(c, files::kReportJson), make_artifact(kReportFormat, meta, sybil::report_to_json(report)));
  write_text_file(out_path(c, files::kReportText), sybil::report_to_text(report));
  return {{"text", sybil::report_to_text(report)}};
}

json run_synth(const PipelineConfig& c) {
  ensure_out_dir(c);
  const synth::SynthDataset data = synth::generate_dataset(c.synth);
  auto write = [&](const char* name, auto&& fn) {
    std::ostringstream out;
    fn(out);
    write_text_file(out_path(c, name), out.str());
  };
  write(files::kSynthVotes, [&](std::ostream& o) { write_votes(o, data.votes, RecordFormat::Csv); });
  write(files::kSynthProposals, [&](std::ostream& o) { write_proposals(o, data.proposals); });
  write(files::kSynthRegistry, [&](std::ostream& o) { write_registry(o, data.registry); });
  write(files::kSynthTruth, [&](std::ostream& o) { synth::write_truth(o, data.truth); });
  return {{"votes", data.votes.size()},
          {"proposals", data.proposals.size()},
          {"registered", data.registry.size()},
          {"wallets", data.truth.wallet_entity.size()},
          {"sybil_wallets", data.truth.sybil_wallet_count()}};
}

json run_eval(const PipelineConfig& c) {
  const ArtifactMeta meta = artifact_meta_for(c);
  require_input(c.paths.truth, "truth");
  const synth::GroundTruth truth = synth::parse_truth_file(c.paths.truth);
  LoadedGraph similarity = load_graph(out_path(c, files::kSimilarityGraph));
  const ClusterArtifact clusters = load_clusters(out_path(c, files::kClusters));
  const auto predicted = synth::wallet_clusters(clusters.clusters, similarity.graph);
  const synth::RecoveryScores s = synth::evaluate_recovery(predicted, truth);
  const double baseline = synth::random_baseline_ari(predicted, truth, kBaselineRounds, c.seed);
  json body = {{"precision", s.precision},
               {"recall", s.recall},
               {"f1", s.f1},
               {"ari", s.ari},
               {"random_baseline_ari", baseline},
               {"ari_margin", s.ari - baseline},
               {"sybil_wallets", s.sybil_wallets},
               {"true_pairs", s.true_pairs},
               {"predicted_pairs", s.predicted_pairs},
               {"correct_pairs", s.correct_pairs}};
  write_json_file(out_path(c, files::kEval), make_artifact(kEvalFormat, meta, body));
  return body;
}

json run_pipeline(const PipelineConfig& c) {
  json summary = {{"ingest", run_ingest(c)}, {"stats", run_stats(c)},     {"train", run_train(c)},
                  {"embed", run_embed(c)},   {"cluster", run_cluster(c)}, {"reduce", run_reduce(c)},
                  {"report", run_report(c)}};
  if (!c.paths.truth.empty()) summary["eval"] = run_eval(c);
  return summary;
}

}  // namespace sybilnet::pipeline
