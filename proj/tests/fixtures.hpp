#pragma once

#include <string>
#include <vector>

#include "sybilnet/embedder/model.hpp"
#include "sybilnet/numcore/gradcheck.hpp"
#include "sybilnet/votegraph.hpp"

namespace fixtures {

using namespace sybilnet;

inline VoteRecord vote(std::string voter, std::string proposal, EpochSeconds ts, double power, int choice = 1,
                       std::string space = "dao") {
  return {std::move(voter), std::move(proposal), std::move(space), power, ts, choice};
}

// Four voters (one Known), three proposals, one parallel edge.
inline VotingGraph small_graph() {
  const std::vector<VoteRecord> votes = {
      vote("0xa", "p1", 1000, 5.0, 1),          vote("0xb", "p1", 1500, 1.0, 2, "other"),
      vote("0xa", "p2", 90000, 3.0, 0),         vote("0xc", "p2", 100000, 12.0, 1),
      vote("0xd", "p3", 200000, 0.5, 3, "other"), vote("0xa", "p3", 250000, 2.0, 1),
      vote("0xc", "p3", 260000, 7.0, 2),        vote("0xc", "p3", 300000, 7.0, 0),
  };
  return build_voting_graph(votes, {{"0xb", "bob.eth"}});
}

inline embed::TrainConfig tiny_config() {
  embed::TrainConfig c;
  c.embedding_dim = 3;
  c.hidden = 4;
  c.lstm_hidden = 3;
  c.seq_len = 4;
  c.heads = 2;
  c.head_dim = 3;
  c.epochs = 20;
  c.seed = 5;
  return c;
}

struct BlockCheck {
  std::string name;
  num::GradCheckReport report;
};

// Central-difference check of the reconstruction loss over train rows,
// one parameter block at a time.
inline std::vector<BlockCheck> model_gradcheck(const embed::FeatureSet& features, const embed::TrainConfig& config,
                                               double tolerance) {
  const embed::GraphInputs inputs = embed::prepare_inputs(features);
  embed::ModelParams params = embed::init_params(config);
  const auto blocks = params.blocks();
  std::vector<BlockCheck> out;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto f = [&](num::Tape& tape, num::Var p) {
      embed::ParamVars pv;
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        pv.vars.push_back(i == b ? p : tape.constant(*blocks[i].second));
      }
      const embed::ForwardVars fv = embed::forward(tape, pv, inputs, config);
      num::Tensor sel = num::Tensor::matrix(features.train_nodes.size(), features.node_count());
      num::Tensor target = num::Tensor::matrix(features.train_nodes.size(), features.node_features.cols());
      for (std::size_t r = 0; r < features.train_nodes.size(); ++r) {
        sel.at(r, features.train_nodes[r]) = 1.0;
        for (std::size_t c = 0; c < target.cols(); ++c) {
          target.at(r, c) = features.node_features.at(features.train_nodes[r], c);
        }
      }
      return num::mse_loss(num::matmul(tape.constant(sel), fv.reconstruction), tape.constant(target));
    };
    out.push_back({blocks[b].first, num::finite_diff_check(f, *blocks[b].second, tolerance)});
  }
  return out;
}

}  // namespace fixtures
