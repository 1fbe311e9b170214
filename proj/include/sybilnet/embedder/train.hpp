#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sybilnet/embedder/model.hpp"

namespace sybilnet::embed {

struct EpochLoss {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
};

struct TrainResult {
  ModelParams params;  // snapshot at the best validation epoch
  std::vector<EpochLoss> loss_curve;
  std::size_t best_epoch = 0;
  double best_validation_mse = 0.0;
};

// Full-batch Adam on the reconstruction MSE of training voters. Throws
// Error(Diverged) naming the epoch when the loss or a gradient stops being
// finite.
TrainResult train(const FeatureSet& features, const TrainConfig& config);
TrainResult train(const VotingGraph& graph, const TrainConfig& config);

// Reconstruction MSE over `nodes` (all rows when empty).
double reconstruction_mse(const num::Tensor& reconstruction, const num::Tensor& targets,
                          const std::vector<NodeId>& nodes);

struct GridRow {
  std::size_t embedding_dim = 0;
  double learning_rate = 0.0;
  std::size_t heads = 0;
  double validation_mse = 0.0;  // +inf when the run diverged
};

struct GridSearchResult {
  TrainConfig best;
  std::vector<GridRow> table;
};

GridSearchResult grid_search(const VotingGraph& graph, const TrainConfig& config);

struct EmbeddingMatrix {
  num::Tensor values;                // n x d, zero-centered columns
  std::vector<double> column_mean;   // before centering
  std::vector<double> column_std;
  std::vector<std::size_t> dead_dimensions;  // std at or under the floor
};

// Embeds every node and centers the columns. Dead dimensions are reported;
// if all are dead the result is Error(Degenerate).
EmbeddingMatrix embed_all(const ModelParams& params, const FeatureSet& features, const TrainConfig& config);

// Centering and the variability check, exposed for tests.
EmbeddingMatrix center_embeddings(num::Tensor raw, double variability_floor);

}  // namespace sybilnet::embed
