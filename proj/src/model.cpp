#include "avcl/model.hpp"

#include <cmath>

#include "avcl/error.hpp"

namespace avcl::model {

namespace {

Tensor uniform(Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> d(shape_numel(shape));
  for (auto& v : d) v = dist(rng);
  return Tensor::from_data(std::move(shape), std::move(d), true);
}

Linear init_linear(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear l;
  l.weight = uniform({out, in}, bound, rng);
  l.bias = uniform({out}, bound, rng);
  return l;
}

Tensor copy_param(const Tensor& t) { return t.detach(true); }

}  // namespace

Tensor linear(const Tensor& x, const Linear& layer) {
  const std::size_t out = layer.weight.rows();
  if (x.rank() != 2 || x.cols() != layer.weight.cols()) {
    throw DimensionError("linear: input " + shape_str(x.shape()) +
                         " does not match weight " + shape_str(layer.weight.shape()));
  }
  const Tensor ones = Tensor::ones({x.rows(), 1});
  return matmul(x, transpose(layer.weight)) +
         matmul(ones, reshape(layer.bias, {1, out}));
}

std::size_t EncoderParams::in_dim() const {
  return layers.empty() ? 0 : layers.front().weight.cols();
}

std::size_t EncoderParams::embed_dim() const {
  return layers.empty() ? 0 : layers.back().weight.rows();
}

std::vector<Tensor> EncoderParams::tensors() const {
  std::vector<Tensor> out;
  for (const auto& l : layers) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

EncoderParams init_encoder(std::span<const std::size_t> dims, std::mt19937_64& rng) {
  if (dims.size() < 2) throw ConfigError("encoder needs at least one layer");
  EncoderParams p;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    p.layers.push_back(init_linear(dims[i], dims[i + 1], rng));
  }
  return p;
}

Tensor encode(const Tensor& x, const EncoderParams& p) {
  if (p.layers.empty()) throw ContractError("encode: encoder has no layers");
  if (x.rank() != 2 || x.cols() != p.in_dim()) {
    throw DimensionError("encode: input " + shape_str(x.shape()) + " but encoder expects " +
                         std::to_string(p.in_dim()) + " features");
  }
  Tensor h = x;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    h = linear(h, p.layers[i]);
    if (i + 1 < p.layers.size()) h = relu(h);
  }
  return h;
}

AmfmParams init_amfm(std::size_t channels, std::mt19937_64& rng) {
  const auto s = init_linear(2 * channels, channels, rng);
  auto e = init_linear(channels, channels, rng);
  // Start with the ReLU gates open; a gate that is closed for a whole batch
  // zeroes a feature column and the correlation is undefined.
  for (auto& b : e.bias.mutable_data()) b += kExcitationBiasInit;
  return {s.weight, s.bias, e.weight, e.bias};
}

Fused amfm_forward(const Tensor& v, const Tensor& a, const AmfmParams& p,
                   GateFn gate) {
  if (v.rank() != 2 || a.rank() != 2) {
    throw DimensionError("amfm: features must be [batch x channels]");
  }
  if (v.shape() != a.shape()) {
    throw ContractError("amfm: visual " + shape_str(v.shape()) + " and audio " +
                        shape_str(a.shape()) +
                        " features differ; one excitation must gate both");
  }
  const std::size_t c = v.cols();
  if (p.w_s.shape() != Shape{c, 2 * c} || p.w_e.shape() != Shape{c, c}) {
    throw DimensionError("amfm: parameters do not match " + std::to_string(c) + " channels");
  }
  Fused out;
  out.joint = linear(concat(v, a, 1), {p.w_s, p.b_s});
  out.excitation = linear(out.joint, {p.w_e, p.b_e});
  const Tensor g = gate == GateFn::kRelu ? relu(out.excitation) : sigmoid(out.excitation);
  out.f_v = g * v;
  out.f_a = g * a;
  return out;
}

void ModelConfig::validate() const {
  if (visual_dim == 0 || audio_dim == 0 || hidden_dim == 0 || embed_dim == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (encoder_layers < 1) throw ConfigError("encoder_layers must be >= 1");
}

std::vector<std::size_t> encoder_dims(std::size_t in, const ModelConfig& cfg) {
  std::vector<std::size_t> dims{in};
  for (std::size_t i = 0; i + 1 < cfg.encoder_layers; ++i) dims.push_back(cfg.hidden_dim);
  dims.push_back(cfg.embed_dim);
  return dims;
}

AvclModel::AvclModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(seed);
  visual_ = init_encoder(encoder_dims(cfg_.visual_dim, cfg_), rng);
  audio_ = init_encoder(encoder_dims(cfg_.audio_dim, cfg_), rng);
  if (cfg_.amfm_enabled) amfm_ = init_amfm(cfg_.embed_dim, rng);
}

AvclModel::AvclModel(const ModelConfig& cfg, EncoderParams visual,
                     EncoderParams audio, std::optional<AmfmParams> amfm)
    : cfg_(cfg), visual_(std::move(visual)), audio_(std::move(audio)), amfm_(std::move(amfm)) {
  cfg_.validate();
  check_shapes();
}

void AvclModel::check_shapes() const {
  auto expect = [](const EncoderParams& p, const std::vector<std::size_t>& dims,
                   const char* which) {
    if (p.layers.size() + 1 != dims.size()) {
      throw DimensionError(std::string(which) + " encoder has " +
                           std::to_string(p.layers.size()) + " layers, expected " +
                           std::to_string(dims.size() - 1));
    }
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
      const Shape w{dims[i + 1], dims[i]};
      const Shape b{dims[i + 1]};
      if (p.layers[i].weight.shape() != w || p.layers[i].bias.shape() != b) {
        throw DimensionError(std::string(which) + " layer " + std::to_string(i) +
                             ": expected weight " + shape_str(w) + ", found " +
                             shape_str(p.layers[i].weight.shape()));
      }
    }
  };
  expect(visual_, encoder_dims(cfg_.visual_dim, cfg_), "visual");
  expect(audio_, encoder_dims(cfg_.audio_dim, cfg_), "audio");
  if (cfg_.amfm_enabled != amfm_.has_value()) {
    throw DimensionError("fusion parameters present/absent mismatch with amfm_enabled");
  }
  if (amfm_) {
    const std::size_t c = cfg_.embed_dim;
    if (amfm_->w_s.shape() != Shape{c, 2 * c} || amfm_->b_s.shape() != Shape{c} ||
        amfm_->w_e.shape() != Shape{c, c} || amfm_->b_e.shape() != Shape{c}) {
      throw DimensionError("fusion parameters do not match embed_dim " + std::to_string(c));
    }
  }
}

Embeddings AvclModel::forward(const Tensor& visual_in, const Tensor& audio_in) const {
  Embeddings e;
  e.v = encode(visual_in, visual_);
  e.a = encode(audio_in, audio_);
  if (amfm_) {
    auto fused = amfm_forward(e.v, e.a, *amfm_, cfg_.gate);
    e.f_v = fused.f_v;
    e.f_a = fused.f_a;
  } else {
    e.f_v = e.v;
    e.f_a = e.a;
  }
  return e;
}

std::vector<NamedTensor> AvclModel::named_parameters() const {
  std::vector<NamedTensor> out;
  auto add_encoder = [&out](const EncoderParams& p, const std::string& prefix) {
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
      out.push_back({prefix + ".layer" + std::to_string(i) + ".weight", p.layers[i].weight});
      out.push_back({prefix + ".layer" + std::to_string(i) + ".bias", p.layers[i].bias});
    }
  };
  add_encoder(visual_, "visual");
  add_encoder(audio_, "audio");
  if (amfm_) {
    out.push_back({"amfm.w_s", amfm_->w_s});
    out.push_back({"amfm.b_s", amfm_->b_s});
    out.push_back({"amfm.w_e", amfm_->w_e});
    out.push_back({"amfm.b_e", amfm_->b_e});
  }
  return out;
}

std::vector<Tensor> AvclModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& nt : named_parameters()) out.push_back(nt.tensor);
  return out;
}

AvclModel AvclModel::clone() const {
  auto copy_enc = [](const EncoderParams& p) {
    EncoderParams c;
    for (const auto& l : p.layers) c.layers.push_back({copy_param(l.weight), copy_param(l.bias)});
    return c;
  };
  std::optional<AmfmParams> f;
  if (amfm_) {
    f = AmfmParams{copy_param(amfm_->w_s), copy_param(amfm_->b_s), copy_param(amfm_->w_e),
                   copy_param(amfm_->b_e)};
  }
  return AvclModel(cfg_, copy_enc(visual_), copy_enc(audio_), std::move(f));
}

}  // namespace avcl::model
