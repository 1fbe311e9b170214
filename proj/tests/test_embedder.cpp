#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "sybilnet/embedder/checkpoint.hpp"
#include "sybilnet/embedder/train.hpp"
#include "sybilnet/error.hpp"
#include "sybilnet/random.hpp"

using namespace sybilnet;
using namespace sybilnet::embed;
using fixtures::vote;

namespace {

// Moves every node to id perm[old].
VotingGraph permuted(const VotingGraph& g, const std::vector<NodeId>& perm) {
  VotingGraph out = g;
  for (auto& v : out.voters) v.node_id = perm[v.node_id];
  for (auto& p : out.proposals) p.node_id = perm[p.node_id];
  for (auto& e : out.edges) {
    e.voter = perm[e.voter];
    e.proposal = perm[e.proposal];
  }
  out.reindex();
  validate(out);
  return out;
}

VotingGraph random_graph(std::uint64_t seed, std::size_t votes, std::size_t voters, std::size_t proposals) {
  Rng rng(seed);
  std::vector<VoteRecord> v;
  for (std::size_t i = 0; i < votes; ++i) {
    v.push_back(vote("0x" + std::to_string(rng.index(voters)), "p" + std::to_string(rng.index(proposals)),
                     static_cast<EpochSeconds>(1000 + 3600 * i + rng.index(3600)), rng.uniform(0, 50),
                     static_cast<int>(rng.index(3)), "s" + std::to_string(rng.index(3))));
  }
  std::sort(v.begin(), v.end(), vote_order_less);
  return build_voting_graph(v, {{"0x1", "one.eth"}});
}

}  // namespace

TEST_CASE("features of a one-vote voter") {
  TrainConfig c = fixtures::tiny_config();
  const VotingGraph g = build_voting_graph({vote("0xa", "p", 1000, 3.0, 2)}, {});
  const FeatureSet fs = engineer_features(g, c);
  const NodeId voter = g.voters[0].node_id;
  const NodeId prop = g.proposals[0].node_id;
  CHECK(fs.raw_features.at(voter, kLogDegree) == doctest::Approx(std::log(2.0)));
  CHECK(fs.raw_features.at(voter, kMeanGapDays) == 0.0);
  CHECK(fs.raw_features.at(voter, kSpanDays) == 0.0);
  CHECK(fs.raw_features.at(voter, kDistinctSpaces) == 1.0);
  CHECK(fs.raw_features.at(prop, kIsProposal) == 1.0);
  const std::size_t T = c.seq_len;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t s = 0; s < kStepFeatureCount; ++s) {
      CHECK(fs.temporal_sequences.at(voter, t * kStepFeatureCount + s) == 0.0);
    }
  }
  const std::size_t last = (T - 1) * kStepFeatureCount;
  CHECK(fs.temporal_sequences.at(voter, last + 0) == 0.0);
  CHECK(fs.temporal_sequences.at(voter, last + 1) == doctest::Approx(std::log1p(3.0)));
  CHECK(fs.temporal_sequences.at(voter, last + 2) == 2.0);
  for (std::size_t i = 0; i < fs.temporal_sequences.cols(); ++i) CHECK(fs.temporal_sequences.at(prop, i) == 0.0);
}

TEST_CASE("feature set shape and split invariants") {
  const TrainConfig c = fixtures::tiny_config();
  const VotingGraph g = random_graph(3, 200, 40, 15);
  const FeatureSet fs = engineer_features(g, c);
  CHECK(fs.node_count() == g.node_count());
  CHECK(fs.edge_index.size() == g.edges.size());
  CHECK(fs.edge_power.size() == g.edges.size());
  CHECK(fs.temporal_sequences.cols() == c.seq_len * kStepFeatureCount);

  std::set<NodeId> seen;
  std::size_t total = 0;
  for (const auto* part : {&fs.train_nodes, &fs.validation_nodes, &fs.test_nodes}) {
    for (NodeId id : *part) {
      CHECK(g.is_voter(id));
      seen.insert(id);
    }
    total += part->size();
  }
  CHECK(total == g.voters.size());
  CHECK(seen.size() == g.voters.size());
  CHECK(fs.train_nodes.size() == static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(g.voters.size()))));

  for (std::size_t col = 0; col < kNodeFeatureCount; ++col) {
    double mean = 0.0;
    for (std::size_t r = 0; r < fs.node_count(); ++r) mean += fs.node_features.at(r, col);
    CHECK(std::abs(mean / static_cast<double>(fs.node_count())) < 1e-12);
  }
}

TEST_CASE("identical histories give identical feature rows") {
  const std::vector<VoteRecord> votes = {vote("0xa", "p1", 1000, 2.0), vote("0xb", "p1", 1000, 2.0),
                                         vote("0xa", "p2", 5000, 1.0), vote("0xb", "p2", 5000, 1.0),
                                         vote("0xc", "p2", 7000, 9.0)};
  const VotingGraph g = build_voting_graph(votes, {});
  const TrainConfig c = fixtures::tiny_config();
  const FeatureSet fs = engineer_features(g, c);
  const NodeId a = g.voters[0].node_id;
  const NodeId b = g.voters[1].node_id;
  for (std::size_t col = 0; col < kNodeFeatureCount; ++col) CHECK(fs.node_features.at(a, col) == fs.node_features.at(b, col));
  for (std::size_t col = 0; col < fs.temporal_sequences.cols(); ++col) {
    CHECK(fs.temporal_sequences.at(a, col) == fs.temporal_sequences.at(b, col));
  }
  const ForwardResult out = forward(init_params(c), prepare_inputs(fs), c);
  for (std::size_t col = 0; col < c.embedding_dim; ++col) CHECK(out.embedding.at(a, col) == out.embedding.at(b, col));
}

TEST_CASE("zero parameters give zero output") {
  const TrainConfig c = fixtures::tiny_config();
  const VotingGraph g = build_voting_graph({vote("0xa", "p", 1000, 0.0)}, {});
  const FeatureSet fs = engineer_features(g, c);
  for (double v : fs.node_features.values()) CHECK(std::isfinite(v));
  const ForwardResult out = forward(zero_params(c), prepare_inputs(fs), c);
  for (double v : out.embedding.values()) CHECK(v == 0.0);
  for (double v : out.reconstruction.values()) CHECK(v == 0.0);
}

TEST_CASE("full model gradients match central differences") {
  const TrainConfig c = fixtures::tiny_config();
  const VotingGraph g = fixtures::small_graph();
  REQUIRE(g.node_count() <= 10);
  const FeatureSet fs = engineer_features(g, c);
  const auto checks = fixtures::model_gradcheck(fs, c, 1e-4);
  CHECK(checks.size() == init_params(c).blocks().size());
  for (const auto& check : checks) {
    CAPTURE(check.name);
    CAPTURE(check.report.max_relative_error);
    CHECK(check.report.passed);
  }
}

TEST_CASE("mean aggregation rows average to one") {
  const VotingGraph g = random_graph(7, 60, 12, 6);
  const FeatureSet fs = engineer_features(g, fixtures::tiny_config());
  const GraphInputs in = prepare_inputs(fs);
  // A constant signal passes through unchanged.
  num::Tensor v = num::Tensor::matrix(g.node_count(), 3);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    v.at(r, 0) = 1.5;
    v.at(r, 1) = -2.0;
    v.at(r, 2) = 0.25;
  }
  const num::Tensor agg = num::matmul(in.mean_adjacency, v);
  for (std::size_t r = 0; r < agg.rows(); ++r) {
    CHECK(agg.at(r, 0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(agg.at(r, 1) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(agg.at(r, 2) == doctest::Approx(0.25).epsilon(1e-14));
  }
}

TEST_CASE("attention coefficients sum to one and respect the edge index") {
  const TrainConfig c = fixtures::tiny_config();
  const VotingGraph g = random_graph(9, 60, 12, 6);
  const FeatureSet fs = engineer_features(g, c);
  const GraphInputs in = prepare_inputs(fs);
  const ModelParams p = init_params(c);
  const auto adj = simple_adjacency(g);
  for (std::size_t h = 0; h < c.heads; ++h) {
    const num::Tensor w = attention_weights(p, in, c, h);
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t col = 0; col < w.cols(); ++col) {
        sum += w.at(r, col);
        const bool linked = col == r || std::binary_search(adj[r].begin(), adj[r].end(), col);
        if (!linked) CHECK(w.at(r, col) == 0.0);
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("isolated node gets a finite embedding attending only to itself") {
  const TrainConfig c = fixtures::tiny_config();
  VotingGraph g = random_graph(11, 30, 6, 4);
  ProposalNode lonely{g.node_count(), "lonely", "s0"};
  g.proposals.push_back(lonely);
  g.reindex();
  validate(g);
  const FeatureSet fs = engineer_features(g, c);
  const GraphInputs in = prepare_inputs(fs);
  CHECK(in.mean_adjacency.at(lonely.node_id, lonely.node_id) == 1.0);
  const num::Tensor w = attention_weights(init_params(c), in, c, 0);
  CHECK(w.at(lonely.node_id, lonely.node_id) == 1.0);
  const EmbeddingMatrix e = embed_all(init_params(c), fs, c);
  for (std::size_t col = 0; col < e.values.cols(); ++col) CHECK(std::isfinite(e.values.at(lonely.node_id, col)));
}

TEST_CASE("relabeling nodes permutes embedding rows") {
  const TrainConfig c = fixtures::tiny_config();
  const VotingGraph g = random_graph(13, 80, 15, 7);
  std::vector<NodeId> perm(g.node_count());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(99);
  rng.shuffle(perm);
  const VotingGraph h = permuted(g, perm);
  const ModelParams p = init_params(c);
  const ForwardResult a = forward(p, prepare_inputs(engineer_features(g, c)), c);
  const ForwardResult b = forward(p, prepare_inputs(engineer_features(h, c)), c);
  for (NodeId id = 0; id < g.node_count(); ++id) {
    for (std::size_t col = 0; col < c.embedding_dim; ++col) {
      CHECK(b.embedding.at(perm[id], col) == doctest::Approx(a.embedding.at(id, col)).epsilon(1e-9));
    }
  }
}

TEST_CASE("training on constant targets drives the loss to zero") {
  TrainConfig c = fixtures::tiny_config();
  c.epochs = 200;
  const VotingGraph g = random_graph(15, 40, 14, 6);
  REQUIRE(g.node_count() == 20);
  FeatureSet fs = engineer_features(g, c);
  for (double& v : fs.node_features.values()) v = 0.7;
  const TrainResult r = train(fs, c);
  REQUIRE(r.loss_curve.size() == 200);
  CHECK(r.loss_curve.back().train_mse < 1e-3);
}

TEST_CASE("loss curve and best-epoch selection") {
  TrainConfig c = fixtures::tiny_config();
  c.epochs = 30;
  const VotingGraph g = random_graph(17, 80, 15, 7);
  const TrainResult a = train(g, c);
  REQUIRE(a.loss_curve.size() == 30);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  for (const auto& row : a.loss_curve) {
    CHECK(std::isfinite(row.train_mse));
    CHECK(std::isfinite(row.validation_mse));
    if (row.validation_mse < best) {
      best = row.validation_mse;
      best_epoch = row.epoch;
    }
  }
  CHECK(a.best_epoch == best_epoch);
  CHECK(a.best_validation_mse == best);
  // The snapshot reproduces the recorded validation loss.
  const FeatureSet fs = engineer_features(g, c);
  const ForwardResult fr = forward(a.params, prepare_inputs(fs), c);
  CHECK(reconstruction_mse(fr.reconstruction, fs.node_features, fs.validation_nodes) == doctest::Approx(best).epsilon(1e-12));

  const TrainResult b = train(g, c);
  REQUIRE(b.loss_curve.size() == a.loss_curve.size());
  for (std::size_t i = 0; i < a.loss_curve.size(); ++i) {
    CHECK(a.loss_curve[i].train_mse == b.loss_curve[i].train_mse);
    CHECK(a.loss_curve[i].validation_mse == b.loss_curve[i].validation_mse);
  }
}

TEST_CASE("training loss decreases on a random graph") {
  TrainConfig c = fixtures::tiny_config();
  c.epochs = 60;
  const TrainResult r = train(random_graph(19, 120, 20, 8), c);
  CHECK(r.loss_curve.back().train_mse < r.loss_curve.front().train_mse);
}

TEST_CASE("overflowing learning rate is reported as divergence") {
  TrainConfig c = fixtures::tiny_config();
  c.learning_rate = 1e305;
  c.epochs = 10;
  try {
    (void)train(random_graph(21, 60, 10, 5), c);
    FAIL("no error");
  } catch (const Error& ex) {
    CHECK(ex.kind() == ErrorKind::Diverged);
    CHECK(std::string(ex.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("grid search") {
  TrainConfig c = fixtures::tiny_config();
  c.epochs = 8;
  const VotingGraph g = random_graph(23, 60, 10, 5);
  SUBCASE("singleton grid returns its point") {
    c.grid = {{5}, {2e-3}, {3}};
    const GridSearchResult r = grid_search(g, c);
    REQUIRE(r.table.size() == 1);
    CHECK(r.best.embedding_dim == 5);
    CHECK(r.best.learning_rate == 2e-3);
    CHECK(r.best.heads == 3);
  }
  SUBCASE("diverged run is recorded and skipped") {
    c.grid = {{3}, {1e305, 1e-3}, {2}};
    const GridSearchResult r = grid_search(g, c);
    REQUIRE(r.table.size() == 2);
    CHECK(std::isinf(r.table[0].validation_mse));
    CHECK(std::isfinite(r.table[1].validation_mse));
    CHECK(r.best.learning_rate == 1e-3);
  }
  SUBCASE("table is the cartesian product") {
    c.grid = {{2, 3}, {1e-2, 1e-3, 1e-4}, {1, 2}};
    const GridSearchResult r = grid_search(g, c);
    CHECK(r.table.size() == 12);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : r.table) best = std::min(best, row.validation_mse);
    bool found = false;
    for (const auto& row : r.table) {
      if (row.validation_mse == best && row.embedding_dim == r.best.embedding_dim &&
          row.learning_rate == r.best.learning_rate && row.heads == r.best.heads) {
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("embeddings are centered with dead dimensions reported") {
  const TrainConfig c = fixtures::tiny_config();
  const VotingGraph g = random_graph(25, 80, 15, 6);
  const EmbeddingMatrix e = embed_all(init_params(c), engineer_features(g, c), c);
  for (std::size_t col = 0; col < e.values.cols(); ++col) {
    double mean = 0.0;
    for (std::size_t r = 0; r < e.values.rows(); ++r) mean += e.values.at(r, col);
    CHECK(std::abs(mean / static_cast<double>(e.values.rows())) < 1e-8);
  }

  num::Tensor raw = num::Tensor::from_rows({{1, 5, 2}, {3, 5, 2}, {5, 5, 2}});
  const EmbeddingMatrix partial = center_embeddings(raw, 1e-6);
  CHECK(partial.dead_dimensions == std::vector<std::size_t>{1, 2});
  CHECK(partial.column_mean[0] == 3.0);
  CHECK(partial.values.at(0, 0) == -2.0);

  try {
    (void)center_embeddings(num::Tensor::matrix(4, 3, 1.0), 1e-6);
    FAIL("no error");
  } catch (const Error& ex) {
    CHECK(ex.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.train_fraction = 0.5;
  CHECK_THROWS_AS(validate(c), Error);
  c = TrainConfig{};
  c.heads = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = TrainConfig{};
  c.grid.learning_rate.clear();
  CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("checkpoint and embedding files round trip") {
  const TrainConfig c = fixtures::tiny_config();
  const std::string dir = std::string(TEST_TMP_DIR) + "/embedder";
  std::filesystem::create_directories(dir);
  const ModelParams p = init_params(c);
  const Checkpoint ck{p, c, 3, 0.25, {"abc", 9}};
  save_checkpoint(dir + "/ck.json", ck);
  const Checkpoint back = load_checkpoint(dir + "/ck.json");
  CHECK(back.best_epoch == 3);
  CHECK(back.meta == ck.meta);
  CHECK(back.config.heads == c.heads);
  const auto want = p.blocks();
  const auto have = back.params.blocks();
  REQUIRE(want.size() == have.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(*want[i].second == *have[i].second);

  const EmbeddingMatrix e = embed_all(p, engineer_features(fixtures::small_graph(), c), c);
  save_embeddings(dir + "/e.json", e, ck.meta);
  const LoadedEmbeddings le = load_embeddings(dir + "/e.json");
  CHECK(le.embeddings.values == e.values);
  CHECK(le.embeddings.dead_dimensions == e.dead_dimensions);
}
