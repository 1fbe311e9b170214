#include "sybilnet/embedder/checkpoint.hpp"

#include "sybilnet/error.hpp"
#include "sybilnet/text.hpp"

namespace sybilnet::embed {

using nlohmann::json;
using num::Tensor;

json tensor_to_json(const Tensor& t) {
  return {{"shape", t.shape()}, {"data", std::vector<double>(t.values().begin(), t.values().end())}};
}

Tensor tensor_from_json(const json& doc) {
  try {
    return Tensor(doc.at("shape").get<std::vector<std::size_t>>(), doc.at("data").get<std::vector<double>>());
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, std::string("malformed tensor: ") + ex.what());
  }
}

json train_config_to_json(const TrainConfig& c) {
  return {{"embedding_dim", c.embedding_dim},
          {"hidden", c.hidden},
          {"lstm_hidden", c.lstm_hidden},
          {"seq_len", c.seq_len},
          {"heads", c.heads},
          {"head_dim", c.head_dim},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"train_fraction", c.train_fraction},
          {"validation_fraction", c.validation_fraction},
          {"test_fraction", c.test_fraction},
          {"seed", c.seed},
          {"variability_floor", c.variability_floor},
          {"grid",
           {{"embedding_dim", c.grid.embedding_dim},
            {"learning_rate", c.grid.learning_rate},
            {"heads", c.grid.heads}}}};
}

TrainConfig train_config_from_json(const json& doc, TrainConfig c) {
  try {
    c.embedding_dim = doc.value("embedding_dim", c.embedding_dim);
    c.hidden = doc.value("hidden", c.hidden);
    c.lstm_hidden = doc.value("lstm_hidden", c.lstm_hidden);
    c.seq_len = doc.value("seq_len", c.seq_len);
    c.heads = doc.value("heads", c.heads);
    c.head_dim = doc.value("head_dim", c.head_dim);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.epochs = doc.value("epochs", c.epochs);
    c.train_fraction = doc.value("train_fraction", c.train_fraction);
    c.validation_fraction = doc.value("validation_fraction", c.validation_fraction);
    c.test_fraction = doc.value("test_fraction", c.test_fraction);
    c.seed = doc.value("seed", c.seed);
    c.variability_floor = doc.value("variability_floor", c.variability_floor);
    if (doc.contains("grid")) {
      const json& g = doc.at("grid");
      c.grid.embedding_dim = g.value("embedding_dim", c.grid.embedding_dim);
      c.grid.learning_rate = g.value("learning_rate", c.grid.learning_rate);
      c.grid.heads = g.value("heads", c.grid.heads);
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Usage, std::string("invalid train config: ") + ex.what());
  }
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  json params = json::object();
  for (const auto& [name, t] : cp.params.blocks()) params[name] = tensor_to_json(*t);
  json body = {{"train_config", train_config_to_json(cp.config)},
               {"best_epoch", cp.best_epoch},
               {"best_validation_mse", cp.best_validation_mse},
               {"params", std::move(params)}};
  write_json_file(path, make_artifact(kCheckpointFormat, cp.meta, std::move(body)));
}

Checkpoint load_checkpoint(const std::string& path) {
  json doc = read_artifact(path, kCheckpointFormat);
  Checkpoint cp;
  cp.meta = artifact_meta(doc);
  try {
    cp.config = train_config_from_json(doc.at("train_config"));
    cp.best_epoch = doc.at("best_epoch").get<std::size_t>();
    cp.best_validation_mse = doc.at("best_validation_mse").get<double>();
    cp.params = zero_params(cp.config);
    const json& params = doc.at("params");
    for (auto& [name, t] : cp.params.blocks()) *t = tensor_from_json(params.at(name));
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, "malformed checkpoint '" + path + "': " + ex.what());
  }
  check_params(cp.params, cp.config);
  return cp;
}

std::string loss_curve_csv(const std::vector<EpochLoss>& curve, const ArtifactMeta& meta) {
  std::string out = csv_meta_line(meta);
  out += "epoch,train_mse,val_mse\n";
  for (const auto& row : curve) {
    out += std::to_string(row.epoch) + "," + format_double(row.train_mse) + "," + format_double(row.validation_mse) +
           "\n";
  }
  return out;
}

void save_embeddings(const std::string& path, const EmbeddingMatrix& e, const ArtifactMeta& meta) {
  json body = {{"values", tensor_to_json(e.values)},
               {"column_mean", e.column_mean},
               {"column_std", e.column_std},
               {"dead_dimensions", e.dead_dimensions}};
  write_json_file(path, make_artifact(kEmbeddingFormat, meta, std::move(body)));
}

LoadedEmbeddings load_embeddings(const std::string& path) {
  json doc = read_artifact(path, kEmbeddingFormat);
  LoadedEmbeddings out;
  out.meta = artifact_meta(doc);
  try {
    out.embeddings.values = tensor_from_json(doc.at("values"));
    out.embeddings.column_mean = doc.at("column_mean").get<std::vector<double>>();
    out.embeddings.column_std = doc.at("column_std").get<std::vector<double>>();
    out.embeddings.dead_dimensions = doc.at("dead_dimensions").get<std::vector<std::size_t>>();
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, "malformed embeddings '" + path + "': " + ex.what());
  }
  if (!out.embeddings.values.all_finite()) throw Error(ErrorKind::Format, "embeddings contain non-finite values");
  return out;
}

}  // namespace sybilnet::embed
