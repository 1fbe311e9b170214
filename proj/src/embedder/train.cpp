#include "sybilnet/embedder/train.hpp"

#include <cmath>
#include <limits>
#include <tuple>

#include "sybilnet/error.hpp"
#include "sybilnet/numcore/adam.hpp"

namespace sybilnet::embed {

using num::Tensor;
using num::Var;

namespace {

// k x n matrix picking the rows `nodes` out of an n-row tensor.
Tensor row_selector(const std::vector<NodeId>& nodes, std::size_t n) {
  Tensor sel = Tensor::matrix(nodes.size(), n);
  for (std::size_t i = 0; i < nodes.size(); ++i) sel.at(i, nodes[i]) = 1.0;
  return sel;
}

std::vector<Tensor> copy_blocks(const ModelParams& params) {
  std::vector<Tensor> out;
  for (const auto& [name, t] : params.blocks()) out.push_back(*t);
  return out;
}

}  // namespace

double reconstruction_mse(const Tensor& reconstruction, const Tensor& targets, const std::vector<NodeId>& nodes) {
  if (reconstruction.shape() != targets.shape()) {
    throw Error(ErrorKind::Shape, "reconstruction " + reconstruction.shape_string() + " vs targets " +
                                      targets.shape_string());
  }
  if (nodes.empty()) return num::mse(reconstruction, targets);
  const std::size_t cols = targets.cols();
  double s = 0.0;
  for (NodeId id : nodes) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = reconstruction.at(id, c) - targets.at(id, c);
      s += d * d;
    }
  }
  return s / static_cast<double>(nodes.size() * cols);
}

TrainResult train(const FeatureSet& features, const TrainConfig& config) {
  validate(config);
  const std::size_t n = features.node_count();
  const GraphInputs inputs = prepare_inputs(features);
  // Training voters, or every node on degenerate splits.
  std::vector<NodeId> loss_nodes = features.train_nodes;
  if (loss_nodes.empty()) {
    for (NodeId i = 0; i < n; ++i) loss_nodes.push_back(i);
  }
  const Tensor selector = row_selector(loss_nodes, n);
  const Tensor selected_targets = num::matmul(selector, inputs.targets);
  const std::vector<NodeId>& select_nodes =
      features.validation_nodes.empty() ? loss_nodes : features.validation_nodes;

  TrainResult result;
  ModelParams params = init_params(config);
  std::vector<Tensor> blocks = copy_blocks(params);
  num::AdamState adam = num::make_adam_state(blocks, {config.learning_rate, 0.9, 0.999, 1e-8});
  result.best_validation_mse = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    try {
      num::Tape tape;
      ParamVars pv;
      for (const Tensor& b : blocks) pv.vars.push_back(tape.parameter(b));
      ForwardVars fv = forward(tape, pv, inputs, config);
      Var picked = num::matmul(tape.constant(selector), fv.reconstruction);
      Var loss = num::mse_loss(picked, tape.constant(selected_targets));

      EpochLoss row;
      row.epoch = epoch;
      row.train_mse = loss.value()[0];
      row.validation_mse = reconstruction_mse(fv.reconstruction.value(), inputs.targets, select_nodes);
      if (!std::isfinite(row.train_mse) || !std::isfinite(row.validation_mse)) {
        throw Error(ErrorKind::Numeric, "non-finite loss");
      }
      result.loss_curve.push_back(row);
      if (row.validation_mse < result.best_validation_mse) {
        result.best_validation_mse = row.validation_mse;
        result.best_epoch = epoch;
        auto dst = params.blocks();
        for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].second = blocks[i];
      }

      num::Gradients grads = backward(tape, loss);
      std::vector<Tensor> g;
      g.reserve(blocks.size());
      for (Var v : pv.vars) g.push_back(grads[v]);
      num::adam_step(adam, blocks, g);
    } catch (const Error& ex) {
      if (ex.kind() != ErrorKind::Numeric) throw;
      throw Error(ErrorKind::Diverged, "training diverged at epoch " + std::to_string(epoch) + " (" + ex.what() + ")");
    }
  }
  result.params = std::move(params);
  return result;
}

TrainResult train(const VotingGraph& graph, const TrainConfig& config) {
  validate(config);
  return train(engineer_features(graph, config), config);
}

GridSearchResult grid_search(const VotingGraph& graph, const TrainConfig& config) {
  validate(config);
  GridSearchResult result;
  const FeatureSet features = engineer_features(graph, config);
  std::size_t index = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (std::size_t dim : config.grid.embedding_dim) {
    for (double lr : config.grid.learning_rate) {
      for (std::size_t heads : config.grid.heads) {
        TrainConfig trial = config;
        trial.embedding_dim = dim;
        trial.learning_rate = lr;
        trial.heads = heads;
        trial.seed = config.seed ^ index;
        ++index;
        GridRow row{dim, lr, heads, std::numeric_limits<double>::infinity()};
        try {
          row.validation_mse = train(features, trial).best_validation_mse;
        } catch (const Error& ex) {
          if (ex.kind() != ErrorKind::Diverged) throw;
        }
        result.table.push_back(row);
        const auto key = std::make_tuple(dim, lr, heads);
        const bool better =
            !have_best || row.validation_mse < best_loss ||
            (row.validation_mse == best_loss &&
             key < std::make_tuple(result.best.embedding_dim, result.best.learning_rate, result.best.heads));
        if (better) {
          have_best = true;
          best_loss = row.validation_mse;
          result.best = trial;
          result.best.seed = config.seed;
        }
      }
    }
  }
  return result;
}

EmbeddingMatrix center_embeddings(Tensor raw, double variability_floor) {
  EmbeddingMatrix out;
  const std::size_t n = raw.rows();
  const std::size_t d = raw.cols();
  out.column_mean.assign(d, 0.0);
  out.column_std.assign(d, 0.0);
  if (n > 0) {
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += raw.at(r, c);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        raw.at(r, c) -= mean;
        var += raw.at(r, c) * raw.at(r, c);
      }
      out.column_mean[c] = mean;
      out.column_std[c] = std::sqrt(var / static_cast<double>(n));
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    if (out.column_std[c] <= variability_floor) out.dead_dimensions.push_back(c);
  }
  if (d > 0 && out.dead_dimensions.size() == d) {
    throw Error(ErrorKind::Degenerate, "every embedding dimension has standard deviation at or below " +
                                           std::to_string(variability_floor));
  }
  out.values = std::move(raw);
  return out;
}

EmbeddingMatrix embed_all(const ModelParams& params, const FeatureSet& features, const TrainConfig& config) {
  const GraphInputs inputs = prepare_inputs(features);
  ForwardResult fr = forward(params, inputs, config);
  return center_embeddings(std::move(fr.embedding), config.variability_floor);
}

}  // namespace sybilnet::embed
