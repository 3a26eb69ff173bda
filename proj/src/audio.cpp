#include "avcl/audio.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <numbers>
#include <numeric>

#include "avcl/error.hpp"
#include "avcl/fft.hpp"

namespace avcl::audio {

void Waveform::validate() const {
  if (sample_rate <= 0) {
    throw ContractError("waveform sample rate must be positive, got " +
                        std::to_string(sample_rate));
  }
  if (channels <= 0) {
    throw ContractError("waveform channel count must be positive");
  }
  if (samples.size() % static_cast<std::size_t>(channels) != 0) {
    throw ContractError("waveform sample count " + std::to_string(samples.size()) +
                        " is not a multiple of " + std::to_string(channels) +
                        " channels");
  }
}

void StftParams::validate() const {
  if (!(hop_ms > 0.0) || !(window_ms >= hop_ms)) {
    throw ConfigError("stft: need window_ms >= hop_ms > 0");
  }
  if (n_bands <= 0 || target_frames <= 0) {
    throw ConfigError("stft: n_bands and target_frames must be positive");
  }
}

int StftParams::window_samples(int sample_rate) const {
  return static_cast<int>(std::lround(window_ms * sample_rate / 1000.0));
}

int StftParams::hop_samples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Waveform to_mono(const Waveform& w) {
  w.validate();
  if (w.channels == 1) return w;
  if (w.channels != 2) {
    throw DecodeError("unsupported channel count " + std::to_string(w.channels) +
                      " (expected 1 or 2)");
  }
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.channels = 1;
  out.samples.resize(w.frames());
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = 0.5 * (w.samples[2 * i] + w.samples[2 * i + 1]);
  }
  return out;
}

namespace {

constexpr int kZeroCrossings = 16;
constexpr int kTableDensity = 512;
constexpr double kKaiserBeta = 8.0;
constexpr double kRolloff = 0.95;

// sinc(x) * kaiser(x / kZeroCrossings) sampled on [0, kZeroCrossings].
const std::vector<double>& interp_kernel() {
  static const std::vector<double> table = [] {
    const int n = kZeroCrossings * kTableDensity + 2;
    std::vector<double> t(static_cast<std::size_t>(n), 0.0);
    const double i0b = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / kTableDensity;
      if (x > kZeroCrossings) break;
      const double u = x / kZeroCrossings;
      const double win = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - u * u)) / i0b;
      const double s = x == 0.0 ? 1.0
                                : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      t[static_cast<std::size_t>(i)] = s * win;
    }
    return t;
  }();
  return table;
}

double kernel_at(double x) {
  x = std::abs(x);
  if (x >= kZeroCrossings) return 0.0;
  const auto& t = interp_kernel();
  const double pos = x * kTableDensity;
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return t[i] + frac * (t[i + 1] - t[i]);
}

}  // namespace

Waveform resample(const Waveform& w, int target_rate) {
  w.validate();
  if (target_rate <= 0) throw ContractError("resample: target rate must be positive");
  if (w.channels != 1) throw ContractError("resample: expects a mono waveform");
  if (w.sample_rate == target_rate) return w;

  Waveform out;
  out.sample_rate = target_rate;
  out.channels = 1;
  const auto n_in = static_cast<long long>(w.samples.size());
  const long long n_out = n_in * target_rate / w.sample_rate;
  out.samples.assign(static_cast<std::size_t>(n_out), 0.0);
  if (n_out == 0) return out;

  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  // Cutoff in cycles per input sample, scaled so that 2 * fc == 1 is Nyquist.
  const double two_fc = std::min(1.0, ratio) * kRolloff;
  const double half_len = kZeroCrossings / two_fc;
  for (long long n = 0; n < n_out; ++n) {
    const double t = static_cast<double>(n) * w.sample_rate / target_rate;
    const auto k0 = std::max<long long>(0, static_cast<long long>(std::ceil(t - half_len)));
    const auto k1 = std::min<long long>(n_in - 1, static_cast<long long>(std::floor(t + half_len)));
    double acc = 0.0;
    for (long long k = k0; k <= k1; ++k) {
      acc += w.samples[static_cast<std::size_t>(k)] *
             kernel_at(two_fc * (t - static_cast<double>(k)));
    }
    out.samples[static_cast<std::size_t>(n)] = two_fc * acc;
  }
  return out;
}

Matrix stft_magnitude(const Waveform& w, const StftParams& p) {
  w.validate();
  p.validate();
  if (w.channels != 1) throw ContractError("stft_magnitude: expects a mono waveform");
  const int win = p.window_samples(w.sample_rate);
  const int hop = p.hop_samples(w.sample_rate);
  if (win < 2 || hop < 1) {
    throw ConfigError("stft: window/hop too short at " + std::to_string(w.sample_rate) + " Hz");
  }
  const auto uwin = static_cast<std::size_t>(win);
  const auto uhop = static_cast<std::size_t>(hop);

  std::vector<double> x = w.samples;
  if (x.size() < uwin) x.resize(uwin, 0.0);
  const std::size_t frames = (x.size() - uwin) / uhop + 1;
  const std::size_t bins = uwin / 2 + 1;

  std::vector<double> window(uwin);
  for (std::size_t i = 0; i < uwin; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(uwin));
  }

  dsp::FftPlan plan(uwin);
  std::vector<std::complex<double>> buf(uwin), spec(uwin);
  Matrix out(frames, bins);
  for (std::size_t f = 0; f < frames; ++f) {
    const double* src = x.data() + f * uhop;
    for (std::size_t i = 0; i < uwin; ++i) buf[i] = {src[i] * window[i], 0.0};
    plan.forward(buf, spec);
    for (std::size_t k = 0; k < bins; ++k) out(f, k) = std::abs(spec[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mel filterbank

namespace {

double triangle(double f, double lo, double c, double hi) {
  if (f <= lo || f >= hi) return 0.0;
  return f <= c ? (f - lo) / (c - lo) : (hi - f) / (hi - c);
}

}  // namespace

MelFilterbank::MelFilterbank(int n_bins, int sample_rate, int window_samples,
                             int n_bands)
    : n_bins_(n_bins),
      bin_hz_(static_cast<double>(sample_rate) / window_samples) {
  if (n_bins < 2 || n_bands < 1) {
    throw ConfigError("mel filterbank needs >= 2 bins and >= 1 band");
  }
  const double top_bin_hz = bin_hz_ * (n_bins - 1);
  const double f_max = std::min(0.5 * sample_rate, top_bin_hz);
  const double mel_max = hz_to_mel(f_max);
  std::vector<double> edges(static_cast<std::size_t>(n_bands) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / (n_bands + 1));
  }

  // Tent basis of the linear interpolant around bin k.
  auto hat = [this, top_bin_hz](int k, double f) {
    if (f < 0.0 || f > top_bin_hz) return 0.0;
    return std::max(0.0, 1.0 - std::abs(f - k * bin_hz_) / bin_hz_);
  };

  bands_.reserve(static_cast<std::size_t>(n_bands));
  for (int b = 0; b < n_bands; ++b) {
    Band band{edges[b], edges[b + 1], edges[b + 2], 0, {}};
    const int k0 = std::max(0, static_cast<int>(std::floor(band.lo / bin_hz_)));
    const int k1 = std::min(n_bins - 1, static_cast<int>(std::ceil(band.hi / bin_hz_)));
    band.first_bin = static_cast<std::size_t>(k0);
    const double area = 0.5 * (band.hi - band.lo);
    for (int k = k0; k <= k1; ++k) {
      // Both factors are piecewise linear, so Simpson's rule is exact on every
      // interval between consecutive breakpoints.
      std::vector<double> pts{band.lo, band.center, band.hi, (k - 1) * bin_hz_,
                              k * bin_hz_, (k + 1) * bin_hz_};
      const double a = std::max(band.lo, (k - 1) * bin_hz_);
      const double z = std::min(band.hi, (k + 1) * bin_hz_);
      double integral = 0.0;
      if (z > a) {
        pts.push_back(a);
        pts.push_back(z);
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
          const double l = std::max(a, pts[i]);
          const double r = std::min(z, pts[i + 1]);
          if (r <= l) continue;
          const double m = 0.5 * (l + r);
          auto g = [&](double f) {
            return triangle(f, band.lo, band.center, band.hi) * hat(k, f);
          };
          integral += (r - l) / 6.0 * (g(l) + 4.0 * g(m) + g(r));
        }
      }
      band.weights.push_back(integral / area);
    }
    bands_.push_back(std::move(band));
  }
}

void MelFilterbank::apply(std::span<const double> spectrum,
                          std::span<double> out) const {
  if (spectrum.size() != static_cast<std::size_t>(n_bins_) ||
      out.size() != bands_.size()) {
    throw DimensionError("mel filterbank: expected " + std::to_string(n_bins_) +
                         " bins in, " + std::to_string(bands_.size()) + " bands out");
  }
  for (std::size_t b = 0; b < bands_.size(); ++b) {
    const auto& band = bands_[b];
    double s = 0.0;
    for (std::size_t i = 0; i < band.weights.size(); ++i) {
      s += band.weights[i] * spectrum[band.first_bin + i];
    }
    out[b] = s;
  }
}

Matrix resize_columns(const Matrix& m, std::size_t target) {
  if (m.cols == 0 || target == 0) {
    throw DimensionError("resize_columns: empty input or target");
  }
  Matrix out(m.rows, target);
  const std::size_t n = m.cols;
  for (std::size_t t = 0; t < target; ++t) {
    double pos = 0.0;
    if (target > 1) {
      pos = static_cast<double>(t) * static_cast<double>(n - 1) /
            static_cast<double>(target - 1);
    }
    auto i0 = static_cast<std::size_t>(pos);
    if (i0 >= n - 1) i0 = n > 1 ? n - 2 : 0;
    const double frac = n > 1 ? pos - static_cast<double>(i0) : 0.0;
    const std::size_t i1 = n > 1 ? i0 + 1 : 0;
    for (std::size_t r = 0; r < m.rows; ++r) {
      const double a = m(r, i0), b = m(r, i1);
      out(r, t) = frac == 0.0 ? a : a + frac * (b - a);
    }
  }
  return out;
}

MelSpectrogram mel_scale(const Matrix& spec, const StftParams& p,
                         int sample_rate) {
  p.validate();
  const int win = p.window_samples(sample_rate);
  const auto bins = static_cast<std::size_t>(win / 2 + 1);
  if (spec.cols != bins) {
    throw DimensionError("mel_scale: spectrum has " + std::to_string(spec.cols) +
                         " bins, expected " + std::to_string(bins) + " for a " +
                         std::to_string(win) + "-sample window");
  }
  if (spec.rows == 0) throw DimensionError("mel_scale: spectrum has no frames");

  Matrix frames_in = spec;
  if (spec.rows < 2) {
    std::clog << "warning: mel_scale: single-frame spectrum padded by repetition\n";
    frames_in = Matrix(2, spec.cols);
    for (std::size_t r = 0; r < 2; ++r)
      std::copy(spec.values.begin(), spec.values.end(),
                frames_in.values.begin() + static_cast<std::ptrdiff_t>(r * spec.cols));
  }

  const MelFilterbank fb(static_cast<int>(bins), sample_rate, win, p.n_bands);
  Matrix mel(static_cast<std::size_t>(p.n_bands), frames_in.rows);
  std::vector<double> col(static_cast<std::size_t>(p.n_bands));
  for (std::size_t f = 0; f < frames_in.rows; ++f) {
    fb.apply(frames_in.row(f), col);
    for (std::size_t b = 0; b < col.size(); ++b) mel(b, f) = col[b];
  }

  MelSpectrogram out;
  out.values = resize_columns(mel, static_cast<std::size_t>(p.target_frames));
  if (p.log_compress) {
    for (auto& v : out.values.values) v = std::log1p(v);
  }
  out.source_rate = sample_rate;
  out.params = p;
  return out;
}

MelSpectrogram process(const Waveform& w, const StftParams& p) {
  const Waveform mono = to_mono(w);
  const Waveform at_rate = resample(mono, kTargetRate);
  return mel_scale(stft_magnitude(at_rate, p), p, kTargetRate);
}

}  // namespace avcl::audio
