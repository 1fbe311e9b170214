#include "sybilnet/cli.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "sybilnet/error.hpp"
#include "sybilnet/pipeline.hpp"

namespace sybilnet {

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> k;
  std::optional<std::size_t> epochs;
  std::optional<EpochSeconds> min_duration;
  std::optional<EpochSeconds> max_duration;
  std::optional<std::string> votes;
  std::optional<std::string> proposals;
  std::optional<std::string> registry;
  std::optional<std::string> truth;
};

void add_common_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "JSON config file");
  cmd.add_option("--seed", o.seed, "Seed for training, clustering and synthesis");
  cmd.add_option("--out", o.out_dir, "Output directory for artifacts");
  cmd.add_option("--k", o.k, "Number of k-means clusters");
  cmd.add_option("--epochs", o.epochs, "Training epochs");
  cmd.add_option("--min-duration", o.min_duration, "Shortest proposal kept, in seconds");
  cmd.add_option("--max-duration", o.max_duration, "Longest proposal kept, in seconds");
  cmd.add_option("--votes", o.votes, "Vote records (CSV or JSON lines)");
  cmd.add_option("--proposals", o.proposals, "Proposal CSV");
  cmd.add_option("--registry", o.registry, "Registry CSV address,name");
  cmd.add_option("--truth", o.truth, "Ground truth CSV wallet,entity_id,type");
}

pipeline::PipelineConfig effective_config(const Overrides& o) {
  pipeline::PipelineConfig c = o.config_path.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.paths.out_dir = *o.out_dir;
  if (o.k) c.cluster.k = *o.k;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.min_duration) c.ingest.min_duration = *o.min_duration;
  if (o.max_duration) c.ingest.max_duration = *o.max_duration;
  if (o.votes) c.paths.votes = *o.votes;
  if (o.proposals) c.paths.proposals = *o.proposals;
  if (o.registry) c.paths.registry = *o.registry;
  if (o.truth) c.paths.truth = *o.truth;
  return pipeline::finalize(std::move(c));
}

void print_summary(std::ostream& out, const std::string& stage, const nlohmann::json& summary) {
  if (stage == "report") {
    out << summary.at("text").get<std::string>();
    return;
  }
  if (stage == "pipeline" && summary.contains("report")) {
    nlohmann::json rest = summary;
    const std::string text = rest["report"]["text"].get<std::string>();
    rest.erase("report");
    out << rest.dump(2) << "\n" << text;
    return;
  }
  out << summary.dump(2) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using Stage = std::function<nlohmann::json(const pipeline::PipelineConfig&)>;
  const std::vector<std::pair<std::string, std::pair<Stage, std::string>>> stages = {
      {"ingest", {pipeline::run_ingest, "Parse, filter and window votes, then build the voting graph"}},
      {"stats", {pipeline::run_stats, "Sociometrics of the voting graph"}},
      {"train", {pipeline::run_train, "Train the graph embedder"}},
      {"embed", {pipeline::run_embed, "Embed every node with the trained model"}},
      {"cluster", {pipeline::run_cluster, "Cluster unknown voters and propagate labels"}},
      {"reduce", {pipeline::run_reduce, "Merge clusters into the reduced graph"}},
      {"report", {pipeline::run_report, "Write the sociometric summary"}},
      {"synth", {pipeline::run_synth, "Generate a synthetic dataset with planted sybils"}},
      {"eval", {pipeline::run_eval, "Score clusters against ground truth"}},
      {"pipeline", {pipeline::run_pipeline, "Run every stage in order"}},
  };

  CLI::App app{"Sybil identification for anonymous voting networks", "sybilnet"};
  app.require_subcommand(1);
  Overrides overrides;
  std::map<std::string, CLI::App*> commands;
  for (const auto& [name, entry] : stages) {
    CLI::App* cmd = app.add_subcommand(name, entry.second);
    add_common_options(*cmd, overrides);
    commands[name] = cmd;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "error: usage error: " << ex.what() << "\n";
    return exit_code(ErrorKind::Usage);
  }

  for (const auto& [name, entry] : stages) {
    if (!commands[name]->parsed()) continue;
    try {
      const pipeline::PipelineConfig config = effective_config(overrides);
      print_summary(out, name, entry.first(config));
      return 0;
    } catch (const Error& ex) {
      err << "error: " << ex.what() << "\n";
      return exit_code(ex.kind());
    } catch (const std::exception& ex) {
      err << "error: internal error: " << ex.what() << "\n";
      return 1;
    }
  }
  return exit_code(ErrorKind::Usage);
}

}  // namespace sybilnet
