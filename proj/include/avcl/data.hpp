#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "avcl/audio.hpp"
#include "avcl/tensor.hpp"

namespace avcl::data {

struct SyntheticSpec {
  int n_classes = 4;
  int per_class = 64;
  std::size_t visual_dim = 32;
  double audio_seconds = 1.0;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  // Standard deviation of the per-class visual template entries.
  double template_scale = 0.0625;
  // Peak amplitude of each class sine.
  double tone_amplitude = 0.02;

  void validate() const;
};

struct PairedSample {
  Tensor visual;  // [visual_dim]
  audio::Waveform audio;
  int label = 0;  // read only by the probe
  std::string id;
};

struct DatasetSplit {
  std::vector<PairedSample> train;
  std::vector<PairedSample> val;
  std::vector<PairedSample> test;
  int n_classes = 0;

  std::size_t size() const { return train.size() + val.size() + test.size(); }
};

inline constexpr double kMinToneHz = 200.0;
inline constexpr double kMaxToneHz = 4000.0;
inline constexpr double kToneStepHz = 100.0;

// Two distinct frequencies per class drawn without replacement from the
// 100 Hz grid over [200, 4000] Hz.
std::vector<std::array<double, 2>> class_frequencies(const SyntheticSpec& spec);

// Class k: visual = t_k + N(0, s^2), audio = sum of its two sines with random
// phases + N(0, s^2). Per class, 70/10/20 train/val/test.
DatasetSplit generate(const SyntheticSpec& spec);

// Manifest rows are `wav_path,visual_path,label`, paths relative to `dir`
// unless absolute; an optional header row starting with `wav` is skipped.
// Entries are assigned to splits by a hash of the WAV path.
DatasetSplit load_corpus(const std::filesystem::path& dir,
                         const std::filesystem::path& manifest);

// 0 = train, 1 = val, 2 = test.
int corpus_split_of(const std::string& wav_path);

// Writes audio/*.wav (16-bit PCM), visual/*.tensor and manifest.csv under `dir`.
void export_dataset(const DatasetSplit& split, const std::filesystem::path& dir);

enum class AudioPooling { kMean, kFlatten };

std::size_t audio_feature_dim(const audio::StftParams& p, AudioPooling pooling);
std::vector<double> audio_features(const audio::MelSpectrogram& mel,
                                   AudioPooling pooling);

// Samples with their spectrograms computed once. Immutable after prepare().
struct PreparedSplit {
  std::vector<Tensor> visual;
  std::vector<std::shared_ptr<const audio::MelSpectrogram>> mel;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

PreparedSplit prepare(const std::vector<PairedSample>& samples,
                      const audio::StftParams& stft, unsigned threads = 1);

struct PairedBatch {
  Tensor visual;  // [B x visual_dim]
  Tensor audio;   // [B x audio_feature_dim]
  std::vector<int> labels;
  std::vector<std::size_t> indices;
};

// Permutation of [0, n) for one epoch, seeded by seed ^ epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed,
                                     std::uint64_t epoch);

// floor(n / batch_size) shuffled batches; the ragged tail is dropped.
std::vector<PairedBatch> batches(const PreparedSplit& split, std::size_t batch_size,
                                 std::uint64_t seed, std::uint64_t epoch,
                                 AudioPooling pooling);

// Same batches, computing every spectrogram on the fly.
std::vector<PairedBatch> batches(const std::vector<PairedSample>& samples,
                                 std::size_t batch_size, std::uint64_t seed,
                                 std::uint64_t epoch, const audio::StftParams& stft,
                                 AudioPooling pooling);

// Every sample, in stored order.
PairedBatch full_batch(const PreparedSplit& split, AudioPooling pooling);

}  // namespace avcl::data
