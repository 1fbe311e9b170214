#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sybilnet/embedder/features.hpp"
#include "sybilnet/numcore/tape.hpp"

namespace sybilnet::embed {

struct GatHead {
  num::Tensor projection;  // (hidden + lstm_hidden) x head_dim
  num::Tensor attn_src;    // 1 x head_dim
  num::Tensor attn_dst;    // 1 x head_dim
};

struct ModelParams {
  // Layer 1: node features plus aggregate edge power -> hidden.
  num::Tensor fc_weight, fc_bias;
  // Layer 2: two-layer MLP, then mean aggregation over neighbors.
  num::Tensor mlp_weight1, mlp_bias1, mlp_weight2, mlp_bias2;
  // Layer 3: LSTM, gate blocks ordered input, forget, output, cell.
  num::Tensor lstm_input_weight, lstm_hidden_weight, lstm_bias;
  // Layer 4: multi-head attention over the edge index, then projection to d.
  std::vector<GatHead> gat_heads;
  num::Tensor gat_out_weight, gat_out_bias;
  // Linear decoder back to node-feature space.
  num::Tensor decoder_weight, decoder_bias;

  // Every parameter tensor with a stable name, in a fixed order.
  std::vector<std::pair<std::string, num::Tensor*>> blocks();
  std::vector<std::pair<std::string, const num::Tensor*>> blocks() const;
};

// Glorot-uniform weights and zero biases, drawn from `config.seed`.
ModelParams init_params(const TrainConfig& config);
ModelParams zero_params(const TrainConfig& config);

// Throws Error(Shape) when the tensors do not fit `config`.
void check_params(const ModelParams& params, const TrainConfig& config);

// Dense graph operators derived once from a FeatureSet.
struct GraphInputs {
  num::Tensor layer1_input;     // n x (8 + 1)
  num::Tensor mean_adjacency;   // n x n, rows average self and multigraph neighbors
  num::Tensor attention_bias;   // n x n, log multiplicity on edges and self loops, -1e300 elsewhere
  num::Tensor sequences;        // n x (T * 3)
  num::Tensor targets;          // n x 8
  std::size_t seq_len = 0;
};

inline constexpr double kMaskedLogit = -1e300;

GraphInputs prepare_inputs(const FeatureSet& features);

struct ForwardVars {
  num::Var embedding;       // n x d, before centering
  num::Var reconstruction;  // n x 8
};

// Parameter variables, in the order of ModelParams::blocks().
struct ParamVars {
  std::vector<num::Var> vars;
};

ParamVars bind_params(num::Tape& tape, const ModelParams& params, bool trainable);

ForwardVars forward(num::Tape& tape, const ParamVars& params, const GraphInputs& inputs,
                    const TrainConfig& config);

struct ForwardResult {
  num::Tensor embedding;
  num::Tensor reconstruction;
};

ForwardResult forward(const ModelParams& params, const GraphInputs& inputs, const TrainConfig& config);

// Row-normalized attention weights of one head, for inspection and tests.
num::Tensor attention_weights(const ModelParams& params, const GraphInputs& inputs, const TrainConfig& config,
                              std::size_t head);

}  // namespace sybilnet::embed
