#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "avcl/data.hpp"
#include "avcl/error.hpp"
#include "avcl/serialize.hpp"
#include "avcl/wav.hpp"

using namespace avcl;
using namespace avcl::data;
namespace fs = std::filesystem;

namespace {

SyntheticSpec quick_spec(std::uint64_t seed = 3) {
  SyntheticSpec s;
  s.per_class = 20;
  s.audio_seconds = 0.2;
  s.seed = seed;
  return s;
}

bool same_sample(const PairedSample& a, const PairedSample& b) {
  return a.id == b.id && a.label == b.label && a.audio.samples == b.audio.samples &&
         std::equal(a.visual.data().begin(), a.visual.data().end(), b.visual.data().begin(),
                    b.visual.data().end());
}

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("avcl_data_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<double> flat(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST(Synthetic, SameSeedIsBitIdentical) {
  const auto a = generate(quick_spec()), b = generate(quick_spec());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_TRUE(same_sample(a.train[i], b.train[i]));
  for (std::size_t i = 0; i < a.test.size(); ++i) EXPECT_TRUE(same_sample(a.test[i], b.test[i]));
  const auto c = generate(quick_spec(4));
  EXPECT_NE(flat(a.train[0].visual), flat(c.train[0].visual));
}

TEST(Synthetic, ZeroNoiseMakesClassVisualsIdentical) {
  auto s = quick_spec();
  s.noise_sigma = 0.0;
  const auto d = generate(s);
  std::vector<std::vector<double>> first(static_cast<std::size_t>(d.n_classes));
  for (const auto* part : {&d.train, &d.val, &d.test}) {
    for (const auto& x : *part) {
      auto& ref = first[static_cast<std::size_t>(x.label)];
      if (ref.empty()) ref = flat(x.visual);
      EXPECT_EQ(flat(x.visual), ref);
    }
  }
}

TEST(Synthetic, NearestCentroidSeparatesRawVisuals) {
  const auto d = generate(SyntheticSpec{});
  const std::size_t dim = d.train[0].visual.numel();
  std::vector<std::vector<double>> centroid(4, std::vector<double>(dim, 0.0));
  std::vector<int> count(4, 0);
  for (const auto& x : d.train) {
    for (std::size_t j = 0; j < dim; ++j) centroid[x.label][j] += x.visual.at(j);
    ++count[x.label];
  }
  for (int k = 0; k < 4; ++k)
    for (auto& c : centroid[k]) c /= count[k];
  int right = 0;
  for (const auto& x : d.test) {
    int best = 0;
    double best_d = INFINITY;
    for (int k = 0; k < 4; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double e = x.visual.at(j) - centroid[k][j];
        s += e * e;
      }
      if (s < best_d) best_d = s, best = k;
    }
    right += best == x.label;
  }
  EXPECT_GT(static_cast<double>(right) / d.test.size(), 0.95);
}

TEST(Synthetic, SplitsAreDisjointAndBalanced) {
  for (int per_class : {10, 17, 64}) {
    auto s = quick_spec();
    s.per_class = per_class;
    s.n_classes = 3;
    const auto d = generate(s);
    EXPECT_EQ(d.size(), static_cast<std::size_t>(3 * per_class));
    std::set<std::string> ids;
    for (const auto* part : {&d.train, &d.val, &d.test}) {
      std::vector<int> per_label(3, 0);
      for (const auto& x : *part) {
        EXPECT_TRUE(ids.insert(x.id).second) << x.id;
        ++per_label[x.label];
      }
      EXPECT_EQ(per_label[0], per_label[1]);
      EXPECT_EQ(per_label[1], per_label[2]);
    }
    EXPECT_GT(d.val.size(), 0u);
    EXPECT_GT(d.test.size(), 0u);
  }
}

TEST(Synthetic, ClassFrequenciesAreUniqueOnTheGrid) {
  auto s = quick_spec();
  s.n_classes = 19;
  std::set<double> seen;
  for (const auto& pair : class_frequencies(s)) {
    for (double f : pair) {
      EXPECT_TRUE(seen.insert(f).second) << f;
      EXPECT_GE(f, kMinToneHz);
      EXPECT_LE(f, kMaxToneHz);
      EXPECT_EQ(std::fmod(f, kToneStepHz), 0.0);
    }
  }
  s.n_classes = 20;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Synthetic, AudioIsAtTargetRateAndBounded) {
  const auto d = generate(quick_spec());
  for (const auto& x : d.train) {
    EXPECT_EQ(x.audio.sample_rate, audio::kTargetRate);
    EXPECT_EQ(x.audio.samples.size(), 4800u);
    for (double v : x.audio.samples) EXPECT_LE(std::abs(v), 1.0);
  }
}

TEST(Batches, CountOrderAndCoverage) {
  auto s = quick_spec();
  s.per_class = 16;
  s.n_classes = 4;
  auto d = generate(s);
  // 64 samples total, all in one list.
  std::vector<PairedSample> all = d.train;
  all.insert(all.end(), d.val.begin(), d.val.end());
  all.insert(all.end(), d.test.begin(), d.test.end());
  ASSERT_EQ(all.size(), 64u);
  const auto prepared = prepare(all, audio::StftParams{});
  const auto e0 = batches(prepared, 16, 7, 0, AudioPooling::kMean);
  const auto e1 = batches(prepared, 16, 7, 1, AudioPooling::kMean);
  ASSERT_EQ(e0.size(), 4u);
  std::vector<std::size_t> i0, i1;
  for (const auto& b : e0) i0.insert(i0.end(), b.indices.begin(), b.indices.end());
  for (const auto& b : e1) i1.insert(i1.end(), b.indices.begin(), b.indices.end());
  EXPECT_NE(i0, i1);
  EXPECT_EQ(std::set<std::size_t>(i0.begin(), i0.end()).size(), i0.size());
  const auto again = batches(prepared, 16, 7, 0, AudioPooling::kMean);
  for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(again[b].indices, e0[b].indices);
  EXPECT_EQ(e0[0].visual.shape(), (Shape{16, 32}));
  EXPECT_EQ(e0[0].audio.shape(), (Shape{16, 256}));
}

TEST(Batches, RaggedTailIsDropped) {
  const auto d = generate(quick_spec());
  const auto p = prepare(d.train, audio::StftParams{});
  const auto bs = batches(p, 5, 1, 0, AudioPooling::kMean);
  EXPECT_EQ(bs.size(), p.size() / 5);
}

TEST(Batches, BadBatchSizeIsConfigError) {
  const auto d = generate(quick_spec());
  const auto p = prepare(d.val, audio::StftParams{});
  EXPECT_THROW(batches(p, 1, 0, 0, AudioPooling::kMean), ConfigError);
  EXPECT_THROW(batches(p, p.size() + 1, 0, 0, AudioPooling::kMean), ConfigError);
}

TEST(Batches, CachedAndUncachedAreBitIdentical) {
  const auto d = generate(quick_spec());
  const auto p = prepare(d.train, audio::StftParams{}, 2);
  for (auto pooling : {AudioPooling::kMean, AudioPooling::kFlatten}) {
    const auto a = batches(p, 8, 5, 3, pooling);
    const auto b = batches(d.train, 8, 5, 3, audio::StftParams{}, pooling);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].indices, b[i].indices);
      EXPECT_EQ(a[i].labels, b[i].labels);
      EXPECT_EQ(flat(a[i].visual), flat(b[i].visual));
      EXPECT_EQ(flat(a[i].audio), flat(b[i].audio));
    }
  }
}

TEST(Corpus, EmptyManifestGivesEmptySplits) {
  const auto dir = fresh_dir("empty");
  std::ofstream(dir / "manifest.csv") << "wav,visual,label\n";
  const auto d = load_corpus(dir, dir / "manifest.csv");
  EXPECT_EQ(d.size(), 0u);
}

TEST(Corpus, ExportThenLoadRoundTrips) {
  const auto dir = fresh_dir("export");
  const auto d = generate(quick_spec());
  export_dataset(d, dir);
  const auto a = load_corpus(dir, dir / "manifest.csv");
  const auto b = load_corpus(dir, dir / "manifest.csv");
  EXPECT_EQ(a.size(), d.size());
  EXPECT_EQ(a.n_classes, d.n_classes);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].id, b.train[i].id);
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    for (const auto& x : *part) {
      EXPECT_EQ(x.visual.numel(), 32u);
      EXPECT_EQ(x.audio.sample_rate, audio::kTargetRate);
    }
  }
}

TEST(Corpus, SingleEntryLandsInExactlyOneSplit) {
  const auto dir = fresh_dir("single");
  audio::Waveform w;
  w.samples.assign(2400, 0.1);
  audio::write_wav_pcm16(dir / "a.wav", w);
  save_tensor(dir / "a.tensor", Tensor::ones({3}));
  std::ofstream(dir / "manifest.csv") << "a.wav,a.tensor,0\n";
  const auto d = load_corpus(dir, dir / "manifest.csv");
  EXPECT_EQ(d.size(), 1u);
  const int split = corpus_split_of("a.wav");
  EXPECT_EQ(d.train.size(), split == 0 ? 1u : 0u);
  EXPECT_EQ(d.val.size(), split == 1 ? 1u : 0u);
  EXPECT_EQ(d.test.size(), split == 2 ? 1u : 0u);
}

TEST(Corpus, MissingFileNamesTheLine) {
  const auto dir = fresh_dir("missing");
  std::ofstream(dir / "manifest.csv") << "wav,visual,label\n# comment\nnope.wav,nope.tensor,1\n";
  try {
    load_corpus(dir, dir / "manifest.csv");
    FAIL() << "expected an error";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Corpus, MalformedWavIsDecodeErrorWithPath) {
  const auto dir = fresh_dir("badwav");
  std::ofstream(dir / "bad.wav") << "garbage";
  save_tensor(dir / "v.tensor", Tensor::ones({3}));
  std::ofstream(dir / "manifest.csv") << "bad.wav,v.tensor,0\n";
  try {
    load_corpus(dir, dir / "manifest.csv");
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.wav"), std::string::npos) << e.what();
  }
}
