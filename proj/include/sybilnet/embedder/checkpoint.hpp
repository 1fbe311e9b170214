#pragma once

#include <string>

#include <json.hpp>

#include "sybilnet/artifact.hpp"
#include "sybilnet/embedder/train.hpp"

namespace sybilnet::embed {

inline constexpr const char* kCheckpointFormat = "sybilnet.checkpoint";
inline constexpr const char* kEmbeddingFormat = "sybilnet.embeddings";

nlohmann::json tensor_to_json(const num::Tensor& t);
num::Tensor tensor_from_json(const nlohmann::json& doc);

nlohmann::json train_config_to_json(const TrainConfig& config);
// Keys absent from `doc` keep the values in `base`.
TrainConfig train_config_from_json(const nlohmann::json& doc, TrainConfig base = {});

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  std::size_t best_epoch = 0;
  double best_validation_mse = 0.0;
  ArtifactMeta meta;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
// Validates parameter shapes against the stored config.
Checkpoint load_checkpoint(const std::string& path);

// CSV `epoch,train_mse,val_mse` preceded by the provenance comment line.
std::string loss_curve_csv(const std::vector<EpochLoss>& curve, const ArtifactMeta& meta);

void save_embeddings(const std::string& path, const EmbeddingMatrix& embeddings, const ArtifactMeta& meta);
struct LoadedEmbeddings {
  EmbeddingMatrix embeddings;
  ArtifactMeta meta;
};
LoadedEmbeddings load_embeddings(const std::string& path);

}  // namespace sybilnet::embed
