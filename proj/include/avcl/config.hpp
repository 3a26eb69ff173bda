#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "avcl/audio.hpp"
#include "avcl/data.hpp"
#include "avcl/model.hpp"
#include "avcl/probe.hpp"
#include "avcl/train.hpp"
#include "json.hpp"

namespace avcl::config {

struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or "corpus"
  data::SyntheticSpec synthetic;
  std::string corpus_dir;
  std::string manifest;
  data::AudioPooling pooling = data::AudioPooling::kMean;
};

struct AblateConfig {
  // Subset of {"amfm", "cgra", "selfcl", "lambda_sweep"}.
  std::vector<std::string> axes;
  int seeds = 3;
};

struct Paths {
  std::string out_dir = "out";
  std::string checkpoint;
};

// Everything a run needs. The JSON form has one object per section: data,
// stft, model, loss, train, probe, ablate, paths. Keys not listed here are
// rejected; absent keys keep their defaults.
struct RunConfig {
  DataConfig data;
  audio::StftParams stft;
  model::ModelConfig model;  // visual_dim, audio_dim and amfm_enabled are derived
  train::TrainConfig train;
  probe::ProbeConfig probe;
  AblateConfig ablate;
  Paths paths;

  void validate() const;
  // Applies one seed to data generation, initialization, shuffling and the probe.
  void set_seed(std::uint64_t seed);
  // Model shape for inputs of `visual_dim` features.
  model::ModelConfig model_config(std::size_t visual_dim) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const model::ModelConfig& cfg);
model::ModelConfig model_config_from_json(const nlohmann::json& j);

// 16 hex digits of FNV-1a over the canonical JSON, excluding `paths`.
std::string config_hash(const RunConfig& cfg);
std::string fnv1a_hex(const std::string& text);

}  // namespace avcl::config
