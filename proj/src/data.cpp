#include "avcl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "avcl/error.hpp"
#include "avcl/parallel.hpp"
#include "avcl/serialize.hpp"
#include "avcl/wav.hpp"

namespace avcl::data {

namespace fs = std::filesystem;

void SyntheticSpec::validate() const {
  if (n_classes < 2) throw ConfigError("data.n_classes must be >= 2");
  if (per_class < 2) throw ConfigError("data.per_class must be >= 2");
  if (visual_dim == 0) throw ConfigError("data.visual_dim must be positive");
  if (!(audio_seconds > 0.0)) throw ConfigError("data.audio_seconds must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("data.noise_sigma must be >= 0");
  if (!(template_scale > 0.0)) throw ConfigError("data.template_scale must be positive");
  if (!(tone_amplitude >= 0.0)) throw ConfigError("data.tone_amplitude must be >= 0");
  const auto grid = static_cast<int>((kMaxToneHz - kMinToneHz) / kToneStepHz) + 1;
  if (2 * n_classes > grid) {
    throw ConfigError("data.n_classes = " + std::to_string(n_classes) +
                      " needs more than the " + std::to_string(grid) +
                      " available tone frequencies");
  }
}

std::vector<std::array<double, 2>> class_frequencies(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<double> grid;
  for (double f = kMinToneHz; f <= kMaxToneHz + 1e-9; f += kToneStepHz) grid.push_back(f);
  // Separate stream from the sample noise so frequencies depend on the seed only.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(grid.begin(), grid.end(), rng);
  std::vector<std::array<double, 2>> out;
  for (int k = 0; k < spec.n_classes; ++k) {
    auto f = std::array{grid[2 * k], grid[2 * k + 1]};
    std::sort(f.begin(), f.end());
    out.push_back(f);
  }
  return out;
}

DatasetSplit generate(const SyntheticSpec& spec) {
  spec.validate();
  if (spec.visual_dim < static_cast<std::size_t>(spec.n_classes)) {
    std::clog << "warning: visual_dim " << spec.visual_dim << " < n_classes "
              << spec.n_classes << "; templates may be hard to separate\n";
  }
  const auto freqs = class_frequencies(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  std::vector<std::vector<double>> templates(static_cast<std::size_t>(spec.n_classes));
  for (auto& t : templates) {
    t.resize(spec.visual_dim);
    for (auto& x : t) x = spec.template_scale * unit(rng);
  }

  const auto n_audio = static_cast<std::size_t>(
      std::llround(spec.audio_seconds * audio::kTargetRate));
  const double sigma = spec.noise_sigma;
  const auto per = static_cast<std::size_t>(spec.per_class);
  const auto n_train = static_cast<std::size_t>(std::llround(0.7 * spec.per_class));
  const auto n_val = static_cast<std::size_t>(std::llround(0.1 * spec.per_class));

  DatasetSplit out;
  out.n_classes = spec.n_classes;
  for (int k = 0; k < spec.n_classes; ++k) {
    std::vector<PairedSample> cls;
    cls.reserve(per);
    for (std::size_t i = 0; i < per; ++i) {
      PairedSample s;
      s.label = k;
      s.id = "c" + std::to_string(k) + "_" + std::to_string(i);
      std::vector<double> v(spec.visual_dim);
      for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = templates[static_cast<std::size_t>(k)][j] + sigma * unit(rng);
      }
      s.visual = Tensor::from_data({spec.visual_dim}, std::move(v));

      const double p0 = phase(rng);
      const double p1 = phase(rng);
      const double w0 = 2.0 * std::numbers::pi * freqs[static_cast<std::size_t>(k)][0] /
                        audio::kTargetRate;
      const double w1 = 2.0 * std::numbers::pi * freqs[static_cast<std::size_t>(k)][1] /
                        audio::kTargetRate;
      s.audio.sample_rate = audio::kTargetRate;
      s.audio.channels = 1;
      s.audio.samples.resize(n_audio);
      for (std::size_t t = 0; t < n_audio; ++t) {
        const double tt = static_cast<double>(t);
        const double x = spec.tone_amplitude * (std::sin(w0 * tt + p0) + std::sin(w1 * tt + p1)) +
                         sigma * unit(rng);
        s.audio.samples[t] = std::clamp(x, -1.0, 1.0);
      }
      cls.push_back(std::move(s));
    }
    std::shuffle(cls.begin(), cls.end(), rng);
    for (std::size_t i = 0; i < per; ++i) {
      auto& dst = i < n_train ? out.train : i < n_train + n_val ? out.val : out.test;
      dst.push_back(std::move(cls[i]));
    }
  }
  return out;
}

int corpus_split_of(const std::string& wav_path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : wav_path) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  const auto bucket = h % 10;
  return bucket < 7 ? 0 : bucket < 8 ? 1 : 2;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

DatasetSplit load_corpus(const fs::path& dir, const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  DatasetSplit out;
  std::size_t visual_dim = 0;
  std::string line;
  int line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (line_no == 1 && t.rfind("wav", 0) == 0) continue;
    const auto where = manifest.string() + " line " + std::to_string(line_no);
    const auto fields = split_csv(t);
    if (fields.size() != 3) {
      throw IoError(where + ": expected 3 fields, found " + std::to_string(fields.size()));
    }
    auto resolve = [&dir](const std::string& p) {
      const fs::path path(p);
      return path.is_absolute() ? path : dir / path;
    };
    const auto wav_path = resolve(fields[0]);
    const auto vis_path = resolve(fields[1]);
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw IoError(where + ": label '" + fields[2] + "' is not an integer");
    }
    if (label < 0) throw IoError(where + ": negative label");
    for (const auto& p : {wav_path, vis_path}) {
      if (!fs::exists(p)) throw IoError(where + ": missing file " + p.string());
    }

    PairedSample s;
    s.id = fields[0];
    s.label = label;
    s.audio = audio::read_wav(wav_path);
    Tensor v;
    try {
      v = load_tensor(vis_path);
    } catch (const Error& e) {
      throw IoError(where + ": " + e.what());
    }
    s.visual = reshape(v, {v.numel()});
    if (visual_dim == 0) visual_dim = v.numel();
    if (v.numel() != visual_dim) {
      throw IoError(where + ": visual vector has " + std::to_string(v.numel()) +
                    " values, earlier entries have " + std::to_string(visual_dim));
    }
    max_label = std::max(max_label, label);
    switch (corpus_split_of(fields[0])) {
      case 0: out.train.push_back(std::move(s)); break;
      case 1: out.val.push_back(std::move(s)); break;
      default: out.test.push_back(std::move(s)); break;
    }
  }
  out.n_classes = max_label + 1;
  return out;
}

void export_dataset(const DatasetSplit& split, const fs::path& dir) {
  fs::create_directories(dir / "audio");
  fs::create_directories(dir / "visual");
  std::ostringstream manifest;
  manifest << "wav_path,visual_path,label\n";
  auto emit = [&](const std::vector<PairedSample>& samples, const std::string& tag) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto stem = tag + "_" + std::to_string(i);
      const auto wav = "audio/" + stem + ".wav";
      const auto vis = "visual/" + stem + ".tensor";
      audio::write_wav_pcm16(dir / wav, samples[i].audio);
      save_tensor(dir / vis, samples[i].visual);
      manifest << wav << ',' << vis << ',' << samples[i].label << '\n';
    }
  };
  emit(split.train, "train");
  emit(split.val, "val");
  emit(split.test, "test");
  write_file_atomic(dir / "manifest.csv", manifest.str());
}

std::size_t audio_feature_dim(const audio::StftParams& p, AudioPooling pooling) {
  const auto bands = static_cast<std::size_t>(p.n_bands);
  return pooling == AudioPooling::kMean ? bands
                                        : bands * static_cast<std::size_t>(p.target_frames);
}

std::vector<double> audio_features(const audio::MelSpectrogram& mel, AudioPooling pooling) {
  const auto& m = mel.values;
  if (pooling == AudioPooling::kFlatten) return m.values;
  std::vector<double> out(m.rows, 0.0);
  for (std::size_t b = 0; b < m.rows; ++b) {
    double s = 0.0;
    for (double x : m.row(b)) s += x;
    out[b] = s / static_cast<double>(m.cols);
  }
  return out;
}

PreparedSplit prepare(const std::vector<PairedSample>& samples,
                      const audio::StftParams& stft, unsigned threads) {
  PreparedSplit out;
  out.visual.reserve(samples.size());
  out.mel.resize(samples.size());
  for (const auto& s : samples) {
    out.visual.push_back(s.visual);
    out.labels.push_back(s.label);
  }
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    out.mel[i] = std::make_shared<const audio::MelSpectrogram>(
        audio::process(samples[i].audio, stft));
  });
  return out;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed ^ epoch);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

namespace {

void check_batch_size(std::size_t batch_size, std::size_t n) {
  if (batch_size < 2) {
    throw ConfigError("batch_size must be >= 2 so every anchor has negatives");
  }
  if (batch_size > n) {
    throw ConfigError("batch_size " + std::to_string(batch_size) + " exceeds split size " +
                      std::to_string(n));
  }
}

// `feature(i)` yields the pooled audio vector of sample i.
template <typename AudioFn>
PairedBatch assemble(std::span<const std::size_t> idx, const std::vector<Tensor>& visual,
                     const std::vector<int>& labels, AudioFn&& feature) {
  PairedBatch b;
  const std::size_t vd = visual[idx[0]].numel();
  std::vector<double> v;
  std::vector<double> a;
  v.reserve(idx.size() * vd);
  std::size_t ad = 0;
  for (std::size_t i : idx) {
    const auto vi = visual[i].data();
    if (vi.size() != vd) throw DimensionError("visual vectors differ in length");
    v.insert(v.end(), vi.begin(), vi.end());
    const auto ai = feature(i);
    if (ad == 0) ad = ai.size();
    a.insert(a.end(), ai.begin(), ai.end());
    b.labels.push_back(labels[i]);
    b.indices.push_back(i);
  }
  b.visual = Tensor::from_data({idx.size(), vd}, std::move(v));
  b.audio = Tensor::from_data({idx.size(), ad}, std::move(a));
  return b;
}

template <typename AudioFn>
std::vector<PairedBatch> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                      std::uint64_t epoch, const std::vector<Tensor>& visual,
                                      const std::vector<int>& labels, AudioFn&& feature) {
  check_batch_size(batch_size, n);
  const auto order = epoch_order(n, seed, epoch);
  std::vector<PairedBatch> out;
  for (std::size_t start = 0; start + batch_size <= n; start += batch_size) {
    out.push_back(assemble(std::span(order).subspan(start, batch_size), visual, labels, feature));
  }
  return out;
}

}  // namespace

std::vector<PairedBatch> batches(const PreparedSplit& split, std::size_t batch_size,
                                 std::uint64_t seed, std::uint64_t epoch,
                                 AudioPooling pooling) {
  return make_batches(split.size(), batch_size, seed, epoch, split.visual, split.labels,
                      [&](std::size_t i) { return audio_features(*split.mel[i], pooling); });
}

std::vector<PairedBatch> batches(const std::vector<PairedSample>& samples,
                                 std::size_t batch_size, std::uint64_t seed,
                                 std::uint64_t epoch, const audio::StftParams& stft,
                                 AudioPooling pooling) {
  std::vector<Tensor> visual;
  std::vector<int> labels;
  for (const auto& s : samples) {
    visual.push_back(s.visual);
    labels.push_back(s.label);
  }
  return make_batches(samples.size(), batch_size, seed, epoch, visual, labels,
                      [&](std::size_t i) {
                        return audio_features(audio::process(samples[i].audio, stft), pooling);
                      });
}

PairedBatch full_batch(const PreparedSplit& split, AudioPooling pooling) {
  if (split.size() == 0) throw ContractError("full_batch: empty split");
  std::vector<std::size_t> idx(split.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return assemble(idx, split.visual, split.labels,
                  [&](std::size_t i) { return audio_features(*split.mel[i], pooling); });
}

}  // namespace avcl::data
