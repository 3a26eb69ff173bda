#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "avcl/checkpoint.hpp"
#include "avcl/error.hpp"
#include "avcl/grad_check.hpp"
#include "avcl/model.hpp"

using namespace avcl;
using namespace avcl::model;
namespace fs = std::filesystem;

namespace {

Tensor randn(Shape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(shape_numel(s));
  for (auto& x : v) x = g(rng);
  return Tensor::from_data(std::move(s), std::move(v));
}

ModelConfig small_config(bool amfm = true) {
  ModelConfig c;
  c.visual_dim = 5;
  c.audio_dim = 7;
  c.hidden_dim = 6;
  c.embed_dim = 4;
  c.amfm_enabled = amfm;
  return c;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(double)) == 0;
}

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("avcl_model_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Encoder, ZeroParametersGiveZeroEmbedding) {
  EncoderParams p;
  p.layers.push_back({Tensor::zeros({3, 4}), Tensor::zeros({3})});
  p.layers.push_back({Tensor::zeros({2, 3}), Tensor::zeros({2})});
  const auto y = encode(randn({5, 4}, 1), p);
  EXPECT_EQ(y.shape(), (Shape{5, 2}));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Encoder, IdentityLayerIsIdentity) {
  EncoderParams p;
  p.layers.push_back({Tensor::identity(3), Tensor::zeros({3})});
  const auto x = randn({4, 3}, 2);
  EXPECT_TRUE(bit_equal(encode(x, p), x));
}

TEST(Encoder, WrongInputWidthIsDimensionError) {
  std::mt19937_64 rng(0);
  const std::size_t dims[] = {4, 3};
  const auto p = init_encoder(dims, rng);
  EXPECT_THROW(encode(Tensor::ones({2, 5}), p), DimensionError);
}

TEST(Encoder, InitIsUniformWithinFanIn) {
  std::mt19937_64 rng(3);
  const std::size_t dims[] = {16, 8, 2};
  const auto p = init_encoder(dims, rng);
  ASSERT_EQ(p.layers.size(), 2u);
  EXPECT_EQ(p.layers[0].weight.shape(), (Shape{8, 16}));
  for (double w : p.layers[0].weight.data()) EXPECT_LE(std::abs(w), 0.25);
  for (double w : p.layers[1].weight.data()) EXPECT_LE(std::abs(w), 1.0 / std::sqrt(8.0));
}

TEST(Model, SameSeedIsBitIdentical) {
  const AvclModel a(small_config(), 11), b(small_config(), 11);
  const auto x = randn({3, 5}, 4), y = randn({3, 7}, 5);
  const auto ea = a.forward(x, y), eb = b.forward(x, y);
  EXPECT_TRUE(bit_equal(ea.f_v, eb.f_v));
  EXPECT_TRUE(bit_equal(ea.f_a, eb.f_a));
}

TEST(Model, EncodersDoNotShareParameters) {
  const AvclModel m(small_config(), 1);
  const auto x = randn({3, 5}, 4), y = randn({3, 7}, 5);
  const auto before = m.forward(x, y).a;
  Tensor w0 = m.visual().layers[0].weight;
  for (auto& w : w0.mutable_data()) w += 1.0;
  EXPECT_TRUE(bit_equal(m.forward(x, y).a, before));
  for (const auto& v : m.visual().tensors())
    for (const auto& a : m.audio().tensors()) EXPECT_NE(v.data().data(), a.data().data());
}

TEST(Model, CloneSharesNothing) {
  const AvclModel m(small_config(), 1);
  const auto c = m.clone();
  const auto pm = m.parameters(), pc = c.parameters();
  ASSERT_EQ(pm.size(), pc.size());
  for (std::size_t i = 0; i < pm.size(); ++i) {
    EXPECT_TRUE(bit_equal(pm[i], pc[i]));
    EXPECT_NE(pm[i].data().data(), pc[i].data().data());
  }
}

TEST(Model, FusionOffPassesEmbeddingsThrough) {
  const AvclModel m(small_config(false), 2);
  EXPECT_FALSE(m.amfm().has_value());
  const auto e = m.forward(randn({3, 5}, 4), randn({3, 7}, 5));
  EXPECT_TRUE(bit_equal(e.f_v, e.v));
  EXPECT_TRUE(bit_equal(e.f_a, e.a));
}

TEST(Amfm, AllOnesExcitationIsIdentity) {
  std::mt19937_64 rng(1);
  auto p = init_amfm(3, rng);
  p.w_e = Tensor::zeros({3, 3});
  p.b_e = Tensor::ones({3});
  const auto v = randn({4, 3}, 6), a = randn({4, 3}, 7);
  const auto f = amfm_forward(v, a, p);
  EXPECT_TRUE(bit_equal(f.f_v, v));
  EXPECT_TRUE(bit_equal(f.f_a, a));
}

TEST(Amfm, NegativeExcitationKillsEverything) {
  std::mt19937_64 rng(1);
  auto p = init_amfm(3, rng);
  p.w_e = Tensor::zeros({3, 3});
  p.b_e = Tensor::full({3}, -1.0);
  const auto f = amfm_forward(randn({4, 3}, 6), randn({4, 3}, 7), p);
  for (double x : f.f_v.data()) EXPECT_EQ(x, 0.0);
  for (double x : f.f_a.data()) EXPECT_EQ(x, 0.0);
}

TEST(Amfm, HandComputedExample) {
  AmfmParams p{Tensor::from_data({2, 4}, {0.5, 0, 0.5, 0, 0, 0.5, 0, 0.5}), Tensor::zeros({2}),
               Tensor::identity(2), Tensor::zeros({2})};
  const auto f = amfm_forward(Tensor::from_data({1, 2}, {1, 2}),
                              Tensor::from_data({1, 2}, {3, 4}), p);
  EXPECT_EQ(f.joint.at(0), 2.0);
  EXPECT_EQ(f.joint.at(1), 3.0);
  EXPECT_EQ(f.f_v.at(0), 2.0);
  EXPECT_EQ(f.f_v.at(1), 6.0);
  EXPECT_EQ(f.f_a.at(0), 6.0);
  EXPECT_EQ(f.f_a.at(1), 12.0);
}

TEST(Amfm, ZeroGateZeroesBothOutputs) {
  std::mt19937_64 rng(9);
  const auto p = init_amfm(5, rng);
  const auto v = randn({8, 5}, 10), a = randn({8, 5}, 11);
  const auto f = amfm_forward(v, a, p);
  EXPECT_EQ(f.f_v.shape(), v.shape());
  for (std::size_t i = 0; i < f.excitation.numel(); ++i) {
    if (f.excitation.at(i) <= 0.0) {
      EXPECT_EQ(f.f_v.at(i), 0.0);
      EXPECT_EQ(f.f_a.at(i), 0.0);
    }
  }
}

TEST(Amfm, MismatchedModalitiesIsContractError) {
  std::mt19937_64 rng(1);
  const auto p = init_amfm(3, rng);
  EXPECT_THROW(amfm_forward(Tensor::ones({2, 3}), Tensor::ones({3, 3}), p), ContractError);
}

TEST(Amfm, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  const auto p = init_amfm(3, rng);
  const Tensor in[] = {randn({4, 3}, 1), randn({4, 3}, 2), p.w_s, p.b_s, p.w_e, p.b_e};
  const auto r = grad_check(
      [](std::span<const Tensor> t) {
        const auto f = amfm_forward(t[0], t[1], {t[2], t[3], t[4], t[5]});
        return sum(f.f_v) + sum(f.f_a);
      },
      in);
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = fresh_dir("roundtrip");
  const AvclModel m(small_config(), 21);
  checkpoint::save(dir, m, nlohmann::json{{"k", 1}}, "abc123");
  const auto l = checkpoint::load(dir);
  EXPECT_EQ(l.config_hash, "abc123");
  EXPECT_EQ(l.run_config["k"], 1);
  const auto a = m.named_parameters(), b = l.model.named_parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_TRUE(bit_equal(a[i].tensor, b[i].tensor)) << a[i].name;
  }
}

TEST(Checkpoint, CorruptionIsCheckpointError) {
  const auto dir = fresh_dir("corrupt");
  checkpoint::save(dir, AvclModel(small_config(), 1), nlohmann::json::object(), "h");
  fs::resize_file(dir / "params.bin", fs::file_size(dir / "params.bin") - 8);
  EXPECT_THROW(checkpoint::load(dir), CheckpointError);
  std::ofstream(dir / "manifest.json") << "{not json";
  EXPECT_THROW(checkpoint::load(dir), CheckpointError);
  EXPECT_THROW(checkpoint::load(fresh_dir("missing")), CheckpointError);
}

TEST(Checkpoint, IncompatibleShapesAreListed) {
  auto other = small_config();
  other.embed_dim = 8;
  try {
    checkpoint::check_compatible(other, AvclModel(small_config(), 1));
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("expected"), std::string::npos) << msg;
    EXPECT_NE(msg.find("found"), std::string::npos) << msg;
  }
  EXPECT_NO_THROW(checkpoint::check_compatible(small_config(), AvclModel(small_config(), 2)));
}
