#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace avcl::audio {

inline constexpr int kTargetRate = 24000;

// Interleaved PCM in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kTargetRate;
  int channels = 1;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
  }
  double duration_seconds() const {
    return static_cast<double>(frames()) / sample_rate;
  }
  void validate() const;
};

enum class WindowFn { kHann };

struct StftParams {
  double window_ms = 10.0;
  double hop_ms = 10.0;
  int n_bands = 256;
  int target_frames = 256;
  WindowFn window = WindowFn::kHann;
  // log(1 + x) after the mel projection. Off by default.
  bool log_compress = false;

  void validate() const;
  int window_samples(int sample_rate) const;
  int hop_samples(int sample_rate) const;
};

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
};

// Mel bands x time frames, all values >= 0.
struct MelSpectrogram {
  Matrix values;
  int source_rate = kTargetRate;
  StftParams params;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

Waveform to_mono(const Waveform& w);

// Band-limited resampling by Kaiser-windowed sinc interpolation. Output
// length is floor(frames * target / source).
Waveform resample(const Waveform& w, int target_rate = kTargetRate);

// Frames x (window/2 + 1) magnitudes of Hann-windowed DFTs. Inputs shorter
// than one window are zero-padded to a single frame.
Matrix stft_magnitude(const Waveform& w, const StftParams& p);

// Triangular filters with mel-spaced edges, linear in Hz, over [0, f_max].
// Each filter is applied to the piecewise-linear interpolation of the
// magnitude spectrum and normalized by its own area, so every band is a
// weighted average of the spectrum around its centre and no band is empty
// when filters are narrower than a DFT bin.
class MelFilterbank {
 public:
  MelFilterbank(int n_bins, int sample_rate, int window_samples, int n_bands);

  int n_bands() const { return static_cast<int>(bands_.size()); }
  int n_bins() const { return n_bins_; }
  double bin_hz() const { return bin_hz_; }
  // (lower edge, centre, upper edge) in Hz.
  struct Band {
    double lo, center, hi;
    std::size_t first_bin;
    std::vector<double> weights;
  };
  const Band& band(int b) const { return bands_[static_cast<std::size_t>(b)]; }

  void apply(std::span<const double> spectrum, std::span<double> out) const;

 private:
  int n_bins_;
  double bin_hz_;
  std::vector<Band> bands_;
};

// Mel projection of an STFT magnitude matrix followed by linear-interpolation
// resize of the time axis to `p.target_frames`.
MelSpectrogram mel_scale(const Matrix& spec, const StftParams& p,
                         int sample_rate = kTargetRate);

// to_mono -> resample(24 kHz) -> stft_magnitude -> mel_scale.
MelSpectrogram process(const Waveform& w, const StftParams& p = {});

// Linear interpolation of each row to `target` columns, endpoints aligned.
Matrix resize_columns(const Matrix& m, std::size_t target);

}  // namespace avcl::audio
