#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace sybilnet {

// Provenance carried by every artifact written by a pipeline stage.
struct ArtifactMeta {
  std::string config_hash;
  std::uint64_t seed = 0;

  friend bool operator==(const ArtifactMeta&, const ArtifactMeta&) = default;
};

inline constexpr int kArtifactVersion = 1;

// Wraps `body` in {"format", "version", "config_hash", "seed", ...body}.
nlohmann::json make_artifact(const std::string& format, const ArtifactMeta& meta, nlohmann::json body);

// Reads a JSON artifact; a missing file is a stage dependency error, a wrong
// format tag or version a format error.
nlohmann::json read_artifact(const std::string& path, const std::string& format);
ArtifactMeta artifact_meta(const nlohmann::json& artifact);

void write_text_file(const std::string& path, const std::string& contents);
void write_json_file(const std::string& path, const nlohmann::json& doc);

// First line prepended to CSV artifacts.
std::string csv_meta_line(const ArtifactMeta& meta);

}  // namespace sybilnet
