#include "avcl/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <string>
#include <vector>

#include "avcl/error.hpp"

namespace avcl::dsp {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), plan_(nullptr) {
  if (n == 0) throw ContractError("fft: length must be positive");
  std::vector<std::complex<double>> scratch_in(n), scratch_out(n);
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_dft_1d(static_cast<int>(n),
                           reinterpret_cast<fftw_complex*>(scratch_in.data()),
                           reinterpret_cast<fftw_complex*>(scratch_out.data()), FFTW_FORWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_) throw Error("fft: FFTW could not plan length " + std::to_string(n));
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void FftPlan::forward(std::span<const std::complex<double>> in,
                      std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != n_) {
    throw DimensionError("fft: expected " + std::to_string(n_) + " values in and out");
  }
  // New-array execute does not modify the plan and is safe across threads.
  fftw_execute_dft(static_cast<fftw_plan>(plan_),
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace avcl::dsp
