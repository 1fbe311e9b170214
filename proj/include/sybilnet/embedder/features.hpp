#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "sybilnet/numcore/tensor.hpp"
#include "sybilnet/votegraph.hpp"

namespace sybilnet::embed {

struct GridAxes {
  std::vector<std::size_t> embedding_dim{16, 32};
  std::vector<double> learning_rate{1e-2, 1e-3};
  std::vector<std::size_t> heads{2, 4};
};

struct TrainConfig {
  std::size_t embedding_dim = 32;
  std::size_t hidden = 64;
  std::size_t lstm_hidden = 16;
  std::size_t seq_len = 32;
  std::size_t heads = 4;
  std::size_t head_dim = 16;
  double learning_rate = 1e-2;
  std::size_t epochs = 200;
  double train_fraction = 0.70;
  double validation_fraction = 0.15;
  double test_fraction = 0.15;
  std::uint64_t seed = 7;
  double variability_floor = 1e-6;
  GridAxes grid;
};

// Throws Error(Usage) when fractions do not sum to 1 or a size is zero.
void validate(const TrainConfig& config);

inline constexpr std::size_t kNodeFeatureCount = 8;
inline constexpr std::size_t kStepFeatureCount = 3;  // (gap days, log1p power, choice)

// Column order of FeatureSet::raw_features and node_features.
enum FeatureColumn : std::size_t {
  kLogDegree = 0,
  kLogPower,
  kLogVoteCount,
  kSpanDays,
  kMeanGapDays,
  kDistinctSpaces,
  kIsProposal,
  kIsKnown,
};

struct FeatureSet {
  num::Tensor raw_features;   // n x 8, before standardization
  num::Tensor node_features;  // n x 8, z-scored per column
  std::vector<std::pair<NodeId, NodeId>> edge_index;  // (voter, proposal), one per vote
  std::vector<double> edge_power;
  num::Tensor edge_power_aggregate;  // n x 1, mean log1p(power) over incident edges, z-scored
  num::Tensor temporal_sequences;    // n x (T * 3), oldest step first, zero-padded at the front
  std::size_t seq_len = 0;
  std::vector<NodeId> train_nodes;
  std::vector<NodeId> validation_nodes;
  std::vector<NodeId> test_nodes;

  std::size_t node_count() const noexcept { return node_features.rows(); }
};

FeatureSet engineer_features(const VotingGraph& graph, const TrainConfig& config);

}  // namespace sybilnet::embed
