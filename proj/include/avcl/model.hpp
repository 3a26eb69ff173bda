#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "avcl/tensor.hpp"

namespace avcl::model {

struct Linear {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]
};

// x [batch x in] -> x W^T + b. The bias is spread over rows with an outer
// product against a ones column, since ops only broadcast scalars.
Tensor linear(const Tensor& x, const Linear& layer);

// Perceptron with ReLU between layers and a linear output.
struct EncoderParams {
  std::vector<Linear> layers;

  std::size_t in_dim() const;
  std::size_t embed_dim() const;
  std::vector<Tensor> tensors() const;
};

// `dims` = {in, hidden..., out}. Weights and biases ~ U(-1/sqrt(in), 1/sqrt(in)).
EncoderParams init_encoder(std::span<const std::size_t> dims, std::mt19937_64& rng);

Tensor encode(const Tensor& x, const EncoderParams& p);

// Fusion parameters. The joint width c_u is half of dim(v) + dim(a), which
// equals c because both embeddings share one width.
struct AmfmParams {
  Tensor w_s;  // [c_u x 2c]
  Tensor b_s;  // [c_u]
  Tensor w_e;  // [c x c_u]
  Tensor b_e;  // [c]

  std::size_t channels() const { return w_e.rows(); }
  std::vector<Tensor> tensors() const { return {w_s, b_s, w_e, b_e}; }
};

// Offset added to the initial excitation bias b_e.
inline constexpr double kExcitationBiasInit = 1.0;

AmfmParams init_amfm(std::size_t channels, std::mt19937_64& rng);

enum class GateFn { kRelu, kSigmoid };

struct Fused {
  Tensor f_v;
  Tensor f_a;
  Tensor joint;       // Z_u
  Tensor excitation;  // E
};

// Z_u = [v, a] W_s^T + b_s;  E = Z_u W_e^T + b_e;  f_v = gate(E) * v;
// f_a = gate(E) * a. One excitation gates both modalities.
Fused amfm_forward(const Tensor& v, const Tensor& a, const AmfmParams& p,
                   GateFn gate = GateFn::kRelu);

struct ModelConfig {
  std::size_t visual_dim = 32;
  std::size_t audio_dim = 256;
  std::size_t hidden_dim = 128;
  std::size_t embed_dim = 64;
  std::size_t encoder_layers = 3;
  bool amfm_enabled = true;
  GateFn gate = GateFn::kRelu;

  void validate() const;
};

struct Embeddings {
  Tensor v;    // visual encoder output
  Tensor a;    // audio encoder output
  Tensor f_v;  // fused (or v when fusion is off)
  Tensor f_a;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Two encoders with disjoint parameters plus optional fusion.
class AvclModel {
 public:
  AvclModel(const ModelConfig& cfg, std::uint64_t seed);
  // Rebuilds a model around existing tensors (checkpoint load). Shapes must
  // match `cfg`.
  AvclModel(const ModelConfig& cfg, EncoderParams visual, EncoderParams audio,
            std::optional<AmfmParams> amfm);

  const ModelConfig& config() const { return cfg_; }
  const EncoderParams& visual() const { return visual_; }
  const EncoderParams& audio() const { return audio_; }
  const std::optional<AmfmParams>& amfm() const { return amfm_; }

  Embeddings forward(const Tensor& visual_in, const Tensor& audio_in) const;

  // Checkpoint order: visual layers, audio layers, fusion.
  std::vector<NamedTensor> named_parameters() const;
  std::vector<Tensor> parameters() const;

  // Deep copy; the clone shares no tensors with this model.
  AvclModel clone() const;

 private:
  void check_shapes() const;

  ModelConfig cfg_;
  EncoderParams visual_;
  EncoderParams audio_;
  std::optional<AmfmParams> amfm_;
};

std::vector<std::size_t> encoder_dims(std::size_t in, const ModelConfig& cfg);

}  // namespace avcl::model
