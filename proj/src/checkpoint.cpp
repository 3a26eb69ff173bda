#include "avcl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "avcl/config.hpp"
#include "avcl/error.hpp"
#include "avcl/serialize.hpp"

namespace avcl::checkpoint {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "avcl-checkpoint-1";

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void save(const fs::path& dir, const model::AvclModel& model, const json& run_config,
          const std::string& config_hash) {
  fs::create_directories(dir);
  const auto named = model.named_parameters();
  std::vector<Tensor> tensors;
  json entries = json::array();
  for (const auto& nt : named) {
    tensors.push_back(nt.tensor);
    entries.push_back({{"name", nt.name}, {"shape", nt.tensor.shape()}});
  }
  save_tensors(dir / "params.bin", tensors);
  const json manifest{{"format", kFormat},
                      {"model", config::to_json(model.config())},
                      {"config_hash", config_hash},
                      {"config", run_config},
                      {"tensors", entries}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

Loaded load(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw CheckpointError("no checkpoint at " + dir.string() + " (manifest.json missing)");
  }
  json manifest;
  model::ModelConfig cfg;
  std::vector<std::pair<std::string, Shape>> entries;
  try {
    manifest = json::parse(read_text(manifest_path));
    if (manifest.at("format") != kFormat) {
      throw CheckpointError("unsupported checkpoint format " + manifest.at("format").dump());
    }
    cfg = config::model_config_from_json(manifest.at("model"));
    for (const auto& e : manifest.at("tensors")) {
      entries.emplace_back(e.at("name").get<std::string>(), e.at("shape").get<Shape>());
    }
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("corrupt manifest " + manifest_path.string() + ": " + e.what());
  }

  std::vector<Tensor> tensors;
  try {
    tensors = load_tensors(dir / "params.bin", entries.size());
  } catch (const std::exception& e) {
    throw CheckpointError("corrupt parameters in " + dir.string() + ": " + e.what());
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (tensors[i].shape() != entries[i].second) {
      throw CheckpointError("tensor " + entries[i].first + ": manifest says " +
                            shape_str(entries[i].second) + ", params.bin holds " +
                            shape_str(tensors[i].shape()));
    }
  }

  // named_parameters() order: visual layers, audio layers, fusion.
  std::size_t k = 0;
  auto take = [&]() { return tensors[k++].detach(true); };
  auto take_encoder = [&]() {
    model::EncoderParams p;
    for (std::size_t l = 0; l < cfg.encoder_layers; ++l) {
      auto w = take();
      auto b = take();
      p.layers.push_back({w, b});
    }
    return p;
  };
  const std::size_t expected = 4 * cfg.encoder_layers + (cfg.amfm_enabled ? 4 : 0);
  if (tensors.size() != expected) {
    throw CheckpointError("checkpoint holds " + std::to_string(tensors.size()) +
                          " tensors, model config needs " + std::to_string(expected));
  }
  auto visual = take_encoder();
  auto audio = take_encoder();
  std::optional<model::AmfmParams> fusion;
  if (cfg.amfm_enabled) {
    auto w_s = take();
    auto b_s = take();
    auto w_e = take();
    auto b_e = take();
    fusion = model::AmfmParams{w_s, b_s, w_e, b_e};
  }
  try {
    return Loaded{model::AvclModel(cfg, std::move(visual), std::move(audio), std::move(fusion)),
                  manifest.value("config_hash", ""), manifest.value("config", json::object())};
  } catch (const Error& e) {
    throw CheckpointError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

void check_compatible(const model::ModelConfig& expected, const model::AvclModel& found) {
  const model::AvclModel ref(expected, 0);
  const auto want = ref.named_parameters();
  const auto have = found.named_parameters();
  std::string diff;
  const std::size_t n = std::max(want.size(), have.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string name = i < want.size() ? want[i].name : have[i].name;
    const std::string w = i < want.size() ? shape_str(want[i].tensor.shape()) : "(none)";
    const std::string h = i < have.size() ? shape_str(have[i].tensor.shape()) : "(none)";
    if (w != h || (i < want.size() && i < have.size() && want[i].name != have[i].name)) {
      diff += "\n  " + name + ": expected " + w + ", found " + h;
    }
  }
  if (!diff.empty()) throw CheckpointError("checkpoint does not match the config:" + diff);
}

}  // namespace avcl::checkpoint
