#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "avcl/tensor.hpp"

namespace avcl {

using TensorFn = std::function<Tensor(std::span<const Tensor>)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t components = 0;
};

// Compares reverse-mode gradients of the scalar `f` against central
// differences with step `eps` in (0, 1e-2], over every component of every
// input. Relative error per component is
//   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// Inputs are copied; the caller's tensors are not touched.
GradCheckResult grad_check(const TensorFn& f, std::span<const Tensor> inputs,
                           double eps = 1e-5);

double grad_check(const std::function<Tensor(const Tensor&)>& f,
                  const Tensor& x, double eps = 1e-5);

}  // namespace avcl
