#include "sybilnet/embedder/model.hpp"

#include <cmath>

#include "sybilnet/error.hpp"
#include "sybilnet/random.hpp"

namespace sybilnet::embed {

using num::Tensor;
using num::Transpose;
using num::Var;

std::vector<std::pair<std::string, Tensor*>> ModelParams::blocks() {
  std::vector<std::pair<std::string, Tensor*>> out = {
      {"fc_weight", &fc_weight},
      {"fc_bias", &fc_bias},
      {"mlp_weight1", &mlp_weight1},
      {"mlp_bias1", &mlp_bias1},
      {"mlp_weight2", &mlp_weight2},
      {"mlp_bias2", &mlp_bias2},
      {"lstm_input_weight", &lstm_input_weight},
      {"lstm_hidden_weight", &lstm_hidden_weight},
      {"lstm_bias", &lstm_bias},
  };
  for (std::size_t h = 0; h < gat_heads.size(); ++h) {
    const std::string prefix = "gat_head" + std::to_string(h) + "_";
    out.emplace_back(prefix + "projection", &gat_heads[h].projection);
    out.emplace_back(prefix + "attn_src", &gat_heads[h].attn_src);
    out.emplace_back(prefix + "attn_dst", &gat_heads[h].attn_dst);
  }
  out.emplace_back("gat_out_weight", &gat_out_weight);
  out.emplace_back("gat_out_bias", &gat_out_bias);
  out.emplace_back("decoder_weight", &decoder_weight);
  out.emplace_back("decoder_bias", &decoder_bias);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::blocks() const {
  auto mutable_blocks = const_cast<ModelParams*>(this)->blocks();
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mutable_blocks.size());
  for (auto& [name, t] : mutable_blocks) out.emplace_back(std::move(name), t);
  return out;
}

namespace {

struct Shapes {
  std::size_t f, h, l, s, d, heads, hd;
};

Shapes shapes_of(const TrainConfig& c) {
  return {kNodeFeatureCount, c.hidden, c.lstm_hidden, kStepFeatureCount, c.embedding_dim, c.heads, c.head_dim};
}

ModelParams shaped_params(const TrainConfig& config) {
  const Shapes s = shapes_of(config);
  ModelParams p;
  p.fc_weight = Tensor::matrix(s.f + 1, s.h);
  p.fc_bias = Tensor::matrix(1, s.h);
  p.mlp_weight1 = Tensor::matrix(s.h, s.h);
  p.mlp_bias1 = Tensor::matrix(1, s.h);
  p.mlp_weight2 = Tensor::matrix(s.h, s.h);
  p.mlp_bias2 = Tensor::matrix(1, s.h);
  p.lstm_input_weight = Tensor::matrix(s.s, 4 * s.l);
  p.lstm_hidden_weight = Tensor::matrix(s.l, 4 * s.l);
  p.lstm_bias = Tensor::matrix(1, 4 * s.l);
  for (std::size_t k = 0; k < s.heads; ++k) {
    p.gat_heads.push_back({Tensor::matrix(s.h + s.l, s.hd), Tensor::matrix(1, s.hd), Tensor::matrix(1, s.hd)});
  }
  p.gat_out_weight = Tensor::matrix(s.heads * s.hd, s.d);
  p.gat_out_bias = Tensor::matrix(1, s.d);
  p.decoder_weight = Tensor::matrix(s.d, s.f);
  p.decoder_bias = Tensor::matrix(1, s.f);
  return p;
}

void glorot(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
}

}  // namespace

ModelParams zero_params(const TrainConfig& config) { return shaped_params(config); }

ModelParams init_params(const TrainConfig& config) {
  ModelParams p = shaped_params(config);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& [name, t] : p.blocks()) {
    if (name.find("bias") != std::string::npos) continue;
    const bool attention_vector = name.find("attn_") != std::string::npos;
    // Attention vectors map head_dim -> 1 score.
    glorot(*t, attention_vector ? t->cols() : t->rows(), attention_vector ? 1 : t->cols(), rng);
  }
  return p;
}

void check_params(const ModelParams& params, const TrainConfig& config) {
  const ModelParams expected = shaped_params(config);
  auto want = expected.blocks();
  auto have = params.blocks();
  if (want.size() != have.size()) {
    throw Error(ErrorKind::Shape, "model has " + std::to_string(have.size()) + " parameter blocks, config expects " +
                                      std::to_string(want.size()));
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].second->shape() != have[i].second->shape()) {
      throw Error(ErrorKind::Shape, "parameter " + have[i].first + " has shape " + have[i].second->shape_string() +
                                        ", expected " + want[i].second->shape_string());
    }
  }
}

GraphInputs prepare_inputs(const FeatureSet& features) {
  const std::size_t n = features.node_count();
  GraphInputs in;
  in.layer1_input = num::concat(std::vector<const Tensor*>{&features.node_features, &features.edge_power_aggregate});
  in.sequences = features.temporal_sequences;
  in.targets = features.node_features;
  in.seq_len = features.seq_len;

  // Multiplicity-weighted adjacency with a self loop on every node.
  Tensor counts = Tensor::matrix(n, n);
  for (NodeId i = 0; i < n; ++i) counts.at(i, i) = 1.0;
  for (const auto& [a, b] : features.edge_index) {
    counts.at(a, b) += 1.0;
    counts.at(b, a) += 1.0;
  }
  in.mean_adjacency = Tensor::matrix(n, n);
  in.attention_bias = Tensor::matrix(n, n, kMaskedLogit);
  for (NodeId i = 0; i < n; ++i) {
    double row = 0.0;
    for (NodeId j = 0; j < n; ++j) row += counts.at(i, j);
    for (NodeId j = 0; j < n; ++j) {
      const double c = counts.at(i, j);
      if (c == 0.0) continue;
      in.mean_adjacency.at(i, j) = c / row;
      in.attention_bias.at(i, j) = std::log(c);
    }
  }
  return in;
}

ParamVars bind_params(num::Tape& tape, const ModelParams& params, bool trainable) {
  ParamVars pv;
  for (const auto& [name, t] : params.blocks()) {
    pv.vars.push_back(trainable ? tape.parameter(*t) : tape.constant(*t));
  }
  return pv;
}

namespace {

// Outputs of one attention head: the normalized weights and aggregated values.
struct HeadVars {
  Var weights;
  Var output;
};

HeadVars attention_head(Var features, Var projection, Var attn_src, Var attn_dst, Var bias) {
  Var z = num::matmul(features, projection);                                   // n x hd
  Var dst = num::matmul(z, attn_dst, Transpose::No, Transpose::Yes);           // n x 1
  Var src = num::matmul(attn_src, z, Transpose::No, Transpose::Yes);           // 1 x n
  Var logits = num::add(num::tanh(num::add(dst, src)), bias);                  // n x n
  Var weights = num::softmax(logits);
  return {weights, num::matmul(weights, z)};
}

Var lstm_final_hidden(num::Tape& tape, Var sequences, Var w_in, Var w_hidden, Var bias, std::size_t n,
                      std::size_t seq_len, std::size_t width) {
  Var h = tape.constant(Tensor::matrix(n, width));
  Var c = tape.constant(Tensor::matrix(n, width));
  for (std::size_t t = 0; t < seq_len; ++t) {
    Var x = num::slice(sequences, t * kStepFeatureCount, (t + 1) * kStepFeatureCount);
    Var z = num::add(num::add(num::matmul(x, w_in), num::matmul(h, w_hidden)), bias);
    Var input_gate = num::sigmoid(num::slice(z, 0, width));
    Var forget_gate = num::sigmoid(num::slice(z, width, 2 * width));
    Var output_gate = num::sigmoid(num::slice(z, 2 * width, 3 * width));
    Var candidate = num::tanh(num::slice(z, 3 * width, 4 * width));
    c = num::add(num::multiply(forget_gate, c), num::multiply(input_gate, candidate));
    h = num::multiply(output_gate, num::tanh(c));
  }
  return h;
}

void check_arity(const ParamVars& params, const GraphInputs& inputs, const TrainConfig& config) {
  const std::size_t expected = 9 + 3 * config.heads + 4;
  if (params.vars.size() != expected) {
    throw Error(ErrorKind::Shape, "forward: expected " + std::to_string(expected) + " parameter blocks, got " +
                                      std::to_string(params.vars.size()));
  }
  if (inputs.seq_len != config.seq_len) throw Error(ErrorKind::Shape, "forward: sequence length mismatch");
}

// Layers 1-3; the result feeds the attention heads.
Var encode_nodes(num::Tape& tape, const std::vector<Var>& p, const GraphInputs& inputs, const TrainConfig& config) {
  const std::size_t n = inputs.layer1_input.rows();
  // Layer 1: per-node affine map of features and aggregate edge power.
  Var h1 = num::add(num::matmul(tape.constant(inputs.layer1_input), p[0]), p[1]);
  // Layer 2: MLP with relu, then self-inclusive mean over neighbors.
  Var m = num::add(num::matmul(num::relu(num::add(num::matmul(h1, p[2]), p[3])), p[4]), p[5]);
  Var h2 = num::matmul(tape.constant(inputs.mean_adjacency), m);
  // Layer 3: LSTM over each node's event sequence, appended to layer 2.
  Var h_seq = lstm_final_hidden(tape, tape.constant(inputs.sequences), p[6], p[7], p[8], n, config.seq_len,
                                config.lstm_hidden);
  return num::concat({h2, h_seq});
}

}  // namespace

ForwardVars forward(num::Tape& tape, const ParamVars& params, const GraphInputs& inputs, const TrainConfig& config) {
  check_arity(params, inputs, config);
  const auto& p = params.vars;
  Var h3 = encode_nodes(tape, p, inputs, config);
  Var bias = tape.constant(inputs.attention_bias);
  // Layer 4: attention heads over the edge index, concatenated and projected.
  std::vector<Var> heads;
  for (std::size_t k = 0; k < config.heads; ++k) {
    const std::size_t base = 9 + 3 * k;
    heads.push_back(attention_head(h3, p[base], p[base + 1], p[base + 2], bias).output);
  }
  const std::size_t tail = 9 + 3 * config.heads;
  Var joined = heads.size() == 1 ? heads.front() : num::concat(heads);
  Var embedding = num::add(num::matmul(joined, p[tail]), p[tail + 1]);
  Var reconstruction = num::add(num::matmul(embedding, p[tail + 2]), p[tail + 3]);
  return {embedding, reconstruction};
}

ForwardResult forward(const ModelParams& params, const GraphInputs& inputs, const TrainConfig& config) {
  check_params(params, config);
  num::Tape tape;
  ParamVars pv = bind_params(tape, params, false);
  ForwardVars out = forward(tape, pv, inputs, config);
  return {out.embedding.value(), out.reconstruction.value()};
}

Tensor attention_weights(const ModelParams& params, const GraphInputs& inputs, const TrainConfig& config,
                         std::size_t head) {
  check_params(params, config);
  if (head >= config.heads) throw Error(ErrorKind::Parameter, "attention head out of range");
  num::Tape tape;
  ParamVars pv = bind_params(tape, params, false);
  check_arity(pv, inputs, config);
  const auto& p = pv.vars;
  Var h3 = encode_nodes(tape, p, inputs, config);
  const std::size_t base = 9 + 3 * head;
  return attention_head(h3, p[base], p[base + 1], p[base + 2], tape.constant(inputs.attention_bias)).weights.value();
}

}  // namespace sybilnet::embed
