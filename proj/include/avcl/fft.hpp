#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace avcl::dsp {

// Thin owner of an FFTW complex-to-complex plan. Planning uses
// FFTW_ESTIMATE, so the same length always gets the same algorithm and the
// output is bit-reproducible. forward() may be called concurrently.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }

  // Unnormalized forward transform: X[k] = sum_j x[j] exp(-2 pi i j k / n).
  void forward(std::span<const std::complex<double>> in,
               std::span<std::complex<double>> out) const;

 private:
  std::size_t n_;
  void* plan_;
};

}  // namespace avcl::dsp
