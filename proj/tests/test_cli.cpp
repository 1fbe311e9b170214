#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sybilnet/cli.hpp"
#include "sybilnet/error.hpp"
#include "sybilnet/pipeline.hpp"

using namespace sybilnet;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A fresh directory with a small synthetic setup and config file.
std::string setup(const std::string& name) {
  const fs::path dir = fs::path(TEST_TMP_DIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string out = (dir / "out").string();
  nlohmann::json cfg = {
      {"seed", 5},
      {"paths",
       {{"votes", out + "/votes.csv"},
        {"proposals", out + "/proposals.csv"},
        {"registry", out + "/registry.csv"},
        {"truth", out + "/truth.csv"},
        {"out_dir", out}}},
      {"train", {{"epochs", 4}, {"embedding_dim", 4}, {"hidden", 6}, {"lstm_hidden", 3}, {"seq_len", 4},
                 {"heads", 2}, {"head_dim", 3}}},
      {"cluster", {{"k_ratio", 0.3}}},
      {"synth", {{"honest_voters", 40}, {"sybil_entities", 4}, {"proposals", 25}}},
  };
  std::ofstream((dir / "config.json").string()) << cfg.dump(1);
  return (dir / "config.json").string();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) files[entry.path().filename().string()] = slurp(entry.path());
  return files;
}

}  // namespace

TEST_CASE("exit codes per error kind") {
  CHECK(exit_code(ErrorKind::Usage) == 2);
  CHECK(exit_code(ErrorKind::StageDependency) == 3);
  CHECK(exit_code(ErrorKind::Io) == 4);
  CHECK(exit_code(ErrorKind::Format) == 5);
  CHECK(exit_code(ErrorKind::Consistency) == 6);
  CHECK(exit_code(ErrorKind::Parameter) == 8);
}

TEST_CASE("usage errors") {
  CHECK(cli({}).status == 2);
  CHECK(cli({"frobnicate"}).status == 2);
  CHECK(cli({"ingest", "--seed", "abc"}).status == 2);
  const Run help = cli({"--help"});
  CHECK(help.status == 0);
  CHECK(help.out.find("pipeline") != std::string::npos);
  const Run missing = cli({"ingest", "--config", "/nonexistent/cfg.json"});
  CHECK(missing.status == 2);
  CHECK(missing.err.rfind("error: ", 0) == 0);
}

TEST_CASE("unknown config keys are rejected") {
  CHECK_THROWS_AS((void)pipeline::config_from_json({{"sede", 3}}), Error);
  CHECK_THROWS_AS((void)pipeline::config_from_json({{"train", {{"epoch", 3}}}}), Error);
  const pipeline::PipelineConfig c = pipeline::config_from_json({{"cluster", {{"k", 12}}}});
  CHECK(c.cluster.k == 12);
  CHECK(c.train.epochs == 200);
}

TEST_CASE("config hash ignores the output directory only") {
  pipeline::PipelineConfig a;
  pipeline::PipelineConfig b = a;
  b.paths.out_dir = "elsewhere";
  CHECK(pipeline::config_hash(a) == pipeline::config_hash(b));
  b.seed = 8;
  CHECK(pipeline::config_hash(a) != pipeline::config_hash(b));
  const pipeline::PipelineConfig round = pipeline::config_from_json(pipeline::config_to_json(a));
  CHECK(pipeline::config_hash(round) == pipeline::config_hash(a));
}

TEST_CASE("default k is one cluster per hundred unknown voters") {
  pipeline::ClusterConfig c;
  CHECK(pipeline::resolve_k(c, 69150) == 692);
  CHECK(pipeline::resolve_k(c, 100) == 1);
  CHECK(pipeline::resolve_k(c, 5) == 1);
  c.k = 50;
  CHECK(pipeline::resolve_k(c, 10) == 50);
}

TEST_CASE("stages report missing upstream artifacts") {
  const std::string cfg = setup("missing");
  const Run r = cli({"report", "--config", cfg});
  CHECK(r.status == 3);
  CHECK(r.err.find("graph.json") != std::string::npos);
  // Raw inputs are not stage artifacts.
  const Run ingest = cli({"ingest", "--config", cfg});
  CHECK(ingest.status == 4);
}

TEST_CASE("pipeline end to end, reproducibly") {
  const std::string cfg = setup("e2e");
  const fs::path out = fs::path(cfg).parent_path() / "out";
  REQUIRE(cli({"synth", "--config", cfg}).status == 0);
  const Run first = cli({"pipeline", "--config", cfg});
  REQUIRE(first.status == 0);
  for (const char* f : {"report.json", "report.txt", "clusters.csv", "loss_curve.csv", "checkpoint.json", "eval.json",
                        "graph.json", "similarity_graph.json", "clustered_graph.json", "cluster_sizes.csv"}) {
    CHECK(fs::exists(out / f));
  }
  CHECK(first.out.find("Node Reduction After Clustering Sybils") != std::string::npos);
  CHECK(slurp(out / "loss_curve.csv").rfind("# config_hash=", 0) == 0);
  const auto before = snapshot(out);
  REQUIRE(cli({"pipeline", "--config", cfg}).status == 0);
  CHECK(snapshot(out) == before);

  // Single stages reproduce their artifacts too.
  REQUIRE(cli({"cluster", "--config", cfg}).status == 0);
  REQUIRE(cli({"report", "--config", cfg}).status == 0);
  CHECK(snapshot(out) == before);

  SUBCASE("report refuses artifacts from another config") {
    const Run r = cli({"report", "--config", cfg, "--seed", "6"});
    CHECK(r.status == 6);
  }
  SUBCASE("flags override the file") {
    REQUIRE(cli({"train", "--config", cfg, "--epochs", "2", "--out", (out.parent_path() / "alt").string()}).status == 3);
    REQUIRE(cli({"ingest", "--config", cfg, "--epochs", "2", "--out", (out.parent_path() / "alt").string()}).status == 0);
    REQUIRE(cli({"train", "--config", cfg, "--epochs", "2", "--out", (out.parent_path() / "alt").string()}).status == 0);
    std::istringstream curve(slurp(out.parent_path() / "alt" / "loss_curve.csv"));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(curve, line)) ++lines;
    CHECK(lines == 4);
  }
}

TEST_CASE("report with zero clusters shows no reduction") {
  const std::string cfg = setup("zero");
  REQUIRE(cli({"synth", "--config", cfg}).status == 0);
  REQUIRE(cli({"ingest", "--config", cfg}).status == 0);
  const nlohmann::json graph = nlohmann::json::parse(slurp(fs::path(cfg).parent_path() / "out" / "graph.json"));
  std::size_t unknown = 0;
  for (const auto& v : graph.at("voters")) unknown += v.at("known_name").is_null() ? 1 : 0;
  CHECK(cli({"pipeline", "--config", cfg, "--k", std::to_string(unknown + 1)}).status == 8);
  // k equal to the number of unknown voters leaves only singletons.
  const Run r = cli({"pipeline", "--config", cfg, "--k", std::to_string(unknown)});
  REQUIRE(r.status == 0);
  CHECK(r.out.find("0.00%") != std::string::npos);
  const nlohmann::json report = nlohmann::json::parse(slurp(fs::path(cfg).parent_path() / "out" / "report.json"));
  CHECK(report.at("values").at("sybil_clusters") == 0);
  CHECK(report.at("values").at("node_reduction_percent") == 0.0);
}
