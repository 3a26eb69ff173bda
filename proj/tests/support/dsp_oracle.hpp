#pragma once

// Brute-force reference for the mel pipeline on a pure tone: direct DFT of
// Hann-windowed frames, the linear interpolant of the magnitudes, and each
// triangular filter integrated by a dense midpoint rule. Shares no code with
// the library.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr int kRate = 24000;
inline constexpr int kWindow = 240;
inline constexpr int kBands = 256;
inline constexpr int kFrames = 256;

inline double mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double inv_mel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

inline std::vector<double> tone(double hz, double seconds, double amplitude = 0.5) {
  const auto n = static_cast<std::size_t>(std::lround(seconds * kRate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kRate);
  }
  return x;
}

// Magnitudes of bins 0..kWindow/2 for the frame starting at `start`.
inline std::vector<double> frame_spectrum(const std::vector<double>& x, std::size_t start) {
  std::vector<double> mag(kWindow / 2 + 1);
  for (int k = 0; k <= kWindow / 2; ++k) {
    std::complex<double> s = 0.0;
    for (int n = 0; n < kWindow; ++n) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / kWindow);
      const double ang = -2.0 * std::numbers::pi * k * n / kWindow;
      s += x[start + static_cast<std::size_t>(n)] * w * std::polar(1.0, ang);
    }
    mag[static_cast<std::size_t>(k)] = std::abs(s);
  }
  return mag;
}

// Area-normalized response of every band to the interpolated spectrum.
inline std::vector<double> band_response(const std::vector<double>& mag) {
  const double bin_hz = static_cast<double>(kRate) / kWindow;
  const double top = mel(kRate / 2.0);
  std::vector<double> out(kBands);
  for (int b = 0; b < kBands; ++b) {
    const double lo = inv_mel(top * b / (kBands + 1));
    const double c = inv_mel(top * (b + 1) / (kBands + 1));
    const double hi = inv_mel(top * (b + 2) / (kBands + 1));
    constexpr int kSteps = 4000;
    const double h = (hi - lo) / kSteps;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < kSteps; ++i) {
      const double f = lo + (i + 0.5) * h;
      const double tri = f < c ? (f - lo) / (c - lo) : (hi - f) / (hi - c);
      const double pos = f / bin_hz;
      const auto k = static_cast<std::size_t>(pos);
      const double s = k + 1 < mag.size() ? mag[k] + (pos - k) * (mag[k + 1] - mag[k])
                                          : mag.back();
      num += tri * s;
      den += tri;
    }
    out[static_cast<std::size_t>(b)] = num / den;
  }
  return out;
}

// Band responses of output column `col` after the time axis of a
// `seconds`-long tone is stretched to kFrames columns.
inline std::vector<double> tone_column(double hz, double seconds, std::size_t col) {
  const auto x = tone(hz, seconds);
  const std::size_t frames = (x.size() - kWindow) / kWindow + 1;
  const double pos = static_cast<double>(col) * (frames - 1) / (kFrames - 1);
  auto f0 = static_cast<std::size_t>(pos);
  if (f0 >= frames - 1) f0 = frames - 2;
  const double frac = pos - f0;
  const auto a = band_response(frame_spectrum(x, f0 * kWindow));
  const auto b = band_response(frame_spectrum(x, (f0 + 1) * kWindow));
  std::vector<double> out(kBands);
  for (int i = 0; i < kBands; ++i) out[i] = a[i] + frac * (b[i] - a[i]);
  return out;
}

inline std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline double band_center_hz(std::size_t b) {
  return inv_mel(mel(kRate / 2.0) * static_cast<double>(b + 1) / (kBands + 1));
}

}  // namespace oracle
