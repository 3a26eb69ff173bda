#include "avcl/config.hpp"

#include <concepts>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "avcl/error.hpp"

namespace avcl::config {

using nlohmann::json;

namespace {

const std::set<std::string> kAxes{"amfm", "cgra", "selfcl", "lambda_sweep"};

// Reads typed fields out of one JSON object and remembers which keys were
// consumed, so leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_)) return;
    obj_ = &root.at(name_);
    if (!obj_->is_object()) throw ConfigError("'" + name_ + "' must be an object");
  }

  void get(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(key, "true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      out = v->get<int>();
    }
  }
  template <std::unsigned_integral U>
  void get(const char* key, U& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
      out = v->get<U>();
    }
  }
  void get(const char* key, std::vector<std::string>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) fail(key, "an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [k, _] : obj_->items()) {
      if (!used_.count(k)) throw ConfigError("unknown key '" + name_ + "." + k + "'");
    }
  }

 private:
  const json* find(const char* key) {
    if (!obj_ || !obj_->contains(key)) return nullptr;
    used_.insert(key);
    return &obj_->at(key);
  }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError("field '" + name_ + "." + key + "' must be " + what);
  }

  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> used_;
};

std::string pooling_name(data::AudioPooling p) {
  return p == data::AudioPooling::kMean ? "mean" : "flatten";
}

std::string gate_name(model::GateFn g) { return g == model::GateFn::kRelu ? "relu" : "sigmoid"; }

model::GateFn parse_gate(const std::string& s) {
  if (s == "relu") return model::GateFn::kRelu;
  if (s == "sigmoid") return model::GateFn::kSigmoid;
  throw ConfigError("field 'model.gate' must be \"relu\" or \"sigmoid\", got \"" + s + "\"");
}

// "line L, column C" for a byte offset into `text`.
std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

void RunConfig::validate() const {
  if (data.source != "synthetic" && data.source != "corpus") {
    throw ConfigError("field 'data.source' must be \"synthetic\" or \"corpus\"");
  }
  if (data.source == "synthetic") data.synthetic.validate();
  if (data.source == "corpus" && data.manifest.empty()) {
    throw ConfigError("field 'data.manifest' is required when data.source is \"corpus\"");
  }
  stft.validate();
  model_config(data.synthetic.visual_dim).validate();
  train.validate();
  probe.validate();
  for (const auto& a : ablate.axes) {
    if (!kAxes.count(a)) {
      throw ConfigError("ablate.axes: unknown axis '" + a +
                        "' (expected amfm, cgra, selfcl or lambda_sweep)");
    }
  }
  if (ablate.seeds < 1) throw ConfigError("field 'ablate.seeds' must be >= 1");
}

void RunConfig::set_seed(std::uint64_t seed) {
  data.synthetic.seed = seed;
  train.seed = seed;
  probe.seed = seed;
}

model::ModelConfig RunConfig::model_config(std::size_t visual_dim) const {
  auto m = model;
  m.visual_dim = visual_dim;
  m.audio_dim = data::audio_feature_dim(stft, data.pooling);
  m.amfm_enabled = train.amfm_enabled;
  return m;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + position(text, e.byte > 0 ? e.byte - 1 : 0) +
                      ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> sections{"data",  "stft",  "model",  "loss",
                                              "train", "probe", "ablate", "paths"};
  for (const auto& [k, _] : root.items()) {
    if (!sections.count(k)) throw ConfigError("unknown section '" + k + "'");
  }

  RunConfig cfg;
  {
    Section s(root, "data");
    auto& syn = cfg.data.synthetic;
    s.get("source", cfg.data.source);
    s.get("n_classes", syn.n_classes);
    s.get("per_class", syn.per_class);
    s.get("visual_dim", syn.visual_dim);
    s.get("audio_seconds", syn.audio_seconds);
    s.get("noise_sigma", syn.noise_sigma);
    s.get("seed", syn.seed);
    s.get("template_scale", syn.template_scale);
    s.get("tone_amplitude", syn.tone_amplitude);
    s.get("corpus_dir", cfg.data.corpus_dir);
    s.get("manifest", cfg.data.manifest);
    std::string pooling = pooling_name(cfg.data.pooling);
    s.get("pooling", pooling);
    if (pooling == "mean") {
      cfg.data.pooling = data::AudioPooling::kMean;
    } else if (pooling == "flatten") {
      cfg.data.pooling = data::AudioPooling::kFlatten;
    } else {
      throw ConfigError("field 'data.pooling' must be \"mean\" or \"flatten\"");
    }
    s.finish();
  }
  {
    Section s(root, "stft");
    s.get("window_ms", cfg.stft.window_ms);
    s.get("hop_ms", cfg.stft.hop_ms);
    s.get("n_bands", cfg.stft.n_bands);
    s.get("target_frames", cfg.stft.target_frames);
    std::string window = "hann";
    s.get("window", window);
    if (window != "hann") throw ConfigError("field 'stft.window' must be \"hann\"");
    s.get("log_compress", cfg.stft.log_compress);
    s.finish();
  }
  {
    Section s(root, "model");
    s.get("hidden_dim", cfg.model.hidden_dim);
    s.get("embed_dim", cfg.model.embed_dim);
    s.get("encoder_layers", cfg.model.encoder_layers);
    std::string gate = gate_name(cfg.model.gate);
    s.get("gate", gate);
    cfg.model.gate = parse_gate(gate);
    s.finish();
  }
  {
    Section s(root, "loss");
    auto& l = cfg.train.loss;
    s.get("lambda_offdiag", l.lambda_offdiag);
    s.get("lambda_cor", l.lambda_cor);
    s.get("lambda_self", l.lambda_self);
    s.get("tau", l.tau);
    s.get("center", l.center);
    s.finish();
  }
  {
    Section s(root, "train");
    auto& t = cfg.train;
    s.get("lr", t.lr);
    s.get("momentum", t.momentum);
    s.get("weight_decay", t.weight_decay);
    s.get("batch_size", t.batch_size);
    s.get("epochs", t.epochs);
    s.get("seed", t.seed);
    s.get("grad_clip", t.grad_clip);
    s.get("amfm_enabled", t.amfm_enabled);
    s.get("cgra_enabled", t.cgra_enabled);
    s.get("selfcl_enabled", t.selfcl_enabled);
    s.finish();
  }
  {
    Section s(root, "probe");
    auto& p = cfg.probe;
    std::string mode = p.mode == probe::ProbeMode::kLinear ? "linear" : "finetune";
    s.get("mode", mode);
    if (mode == "linear") {
      p.mode = probe::ProbeMode::kLinear;
    } else if (mode == "finetune") {
      p.mode = probe::ProbeMode::kFinetune;
    } else {
      throw ConfigError("field 'probe.mode' must be \"linear\" or \"finetune\"");
    }
    s.get("epochs", p.epochs);
    s.get("lr", p.lr);
    s.get("momentum", p.momentum);
    s.get("weight_decay", p.weight_decay);
    s.get("batch_size", p.batch_size);
    s.get("seed", p.seed);
    s.get("normalize", p.normalize);
    s.finish();
  }
  {
    Section s(root, "ablate");
    s.get("axes", cfg.ablate.axes);
    s.get("seeds", cfg.ablate.seeds);
    s.finish();
  }
  {
    Section s(root, "paths");
    s.get("out_dir", cfg.paths.out_dir);
    s.get("checkpoint", cfg.paths.checkpoint);
    s.finish();
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const model::ModelConfig& m) {
  return {{"visual_dim", m.visual_dim},         {"audio_dim", m.audio_dim},
          {"hidden_dim", m.hidden_dim},         {"embed_dim", m.embed_dim},
          {"encoder_layers", m.encoder_layers}, {"amfm_enabled", m.amfm_enabled},
          {"gate", gate_name(m.gate)}};
}

model::ModelConfig model_config_from_json(const json& j) {
  try {
    model::ModelConfig m;
    m.visual_dim = j.at("visual_dim").get<std::size_t>();
    m.audio_dim = j.at("audio_dim").get<std::size_t>();
    m.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    m.embed_dim = j.at("embed_dim").get<std::size_t>();
    m.encoder_layers = j.at("encoder_layers").get<std::size_t>();
    m.amfm_enabled = j.at("amfm_enabled").get<bool>();
    m.gate = parse_gate(j.at("gate").get<std::string>());
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

json to_json(const RunConfig& c) {
  const auto& syn = c.data.synthetic;
  const auto& l = c.train.loss;
  const auto& t = c.train;
  const auto& p = c.probe;
  return {
      {"data",
       {{"source", c.data.source},
        {"n_classes", syn.n_classes},
        {"per_class", syn.per_class},
        {"visual_dim", syn.visual_dim},
        {"audio_seconds", syn.audio_seconds},
        {"noise_sigma", syn.noise_sigma},
        {"seed", syn.seed},
        {"template_scale", syn.template_scale},
        {"tone_amplitude", syn.tone_amplitude},
        {"corpus_dir", c.data.corpus_dir},
        {"manifest", c.data.manifest},
        {"pooling", pooling_name(c.data.pooling)}}},
      {"stft",
       {{"window_ms", c.stft.window_ms},
        {"hop_ms", c.stft.hop_ms},
        {"n_bands", c.stft.n_bands},
        {"target_frames", c.stft.target_frames},
        {"window", "hann"},
        {"log_compress", c.stft.log_compress}}},
      {"model",
       {{"hidden_dim", c.model.hidden_dim},
        {"embed_dim", c.model.embed_dim},
        {"encoder_layers", c.model.encoder_layers},
        {"gate", gate_name(c.model.gate)}}},
      {"loss",
       {{"lambda_offdiag", l.lambda_offdiag},
        {"lambda_cor", l.lambda_cor},
        {"lambda_self", l.lambda_self},
        {"tau", l.tau},
        {"center", l.center}}},
      {"train",
       {{"lr", t.lr},
        {"momentum", t.momentum},
        {"weight_decay", t.weight_decay},
        {"batch_size", t.batch_size},
        {"epochs", t.epochs},
        {"seed", t.seed},
        {"grad_clip", t.grad_clip},
        {"amfm_enabled", t.amfm_enabled},
        {"cgra_enabled", t.cgra_enabled},
        {"selfcl_enabled", t.selfcl_enabled}}},
      {"probe",
       {{"mode", p.mode == probe::ProbeMode::kLinear ? "linear" : "finetune"},
        {"epochs", p.epochs},
        {"lr", p.lr},
        {"momentum", p.momentum},
        {"weight_decay", p.weight_decay},
        {"batch_size", p.batch_size},
        {"seed", p.seed},
        {"normalize", p.normalize}}},
      {"ablate", {{"axes", c.ablate.axes}, {"seeds", c.ablate.seeds}}},
      {"paths", {{"out_dir", c.paths.out_dir}, {"checkpoint", c.paths.checkpoint}}},
  };
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& cfg) {
  auto j = to_json(cfg);
  j.erase("paths");
  return fnv1a_hex(j.dump());
}

}  // namespace avcl::config
