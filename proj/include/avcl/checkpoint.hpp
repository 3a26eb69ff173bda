#pragma once

#include <filesystem>
#include <string>

#include "avcl/model.hpp"
#include "json.hpp"

namespace avcl::checkpoint {

// A checkpoint is a directory holding
//   params.bin     every parameter tensor, back to back, in named_parameters() order
//   manifest.json  {"format", "model", "config_hash", "config", "tensors": [{name, shape}]}
// Both files are written through temp files and renamed into place, the
// manifest last.
void save(const std::filesystem::path& dir, const model::AvclModel& model,
          const nlohmann::json& run_config, const std::string& config_hash);

struct Loaded {
  model::AvclModel model;
  std::string config_hash;
  nlohmann::json run_config;
};

// Throws CheckpointError for missing, truncated or inconsistent files.
Loaded load(const std::filesystem::path& dir);

// Throws CheckpointError listing expected and found shapes when `found` does
// not have the architecture of `expected`.
void check_compatible(const model::ModelConfig& expected, const model::AvclModel& found);

}  // namespace avcl::checkpoint
