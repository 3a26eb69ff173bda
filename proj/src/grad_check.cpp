#include "avcl/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "avcl/error.hpp"

namespace avcl {

namespace {

double eval_scalar(const TensorFn& f, std::span<const Tensor> inputs) {
  const Tensor out = f(inputs);
  if (out.numel() != 1) {
    throw ContractError("grad_check: function output has shape " +
                        shape_str(out.shape()) + ", expected a scalar");
  }
  return out.item();
}

}  // namespace

GradCheckResult grad_check(const TensorFn& f, std::span<const Tensor> inputs,
                           double eps) {
  if (!(eps > 0.0 && eps <= 1e-2)) {
    throw ContractError("grad_check: eps must lie in (0, 1e-2]");
  }
  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  for (const auto& t : inputs) leaves.push_back(t.detach(true));

  const Tensor out = f(leaves);
  if (out.numel() != 1) {
    throw ContractError("grad_check: function output has shape " +
                        shape_str(out.shape()) + ", expected a scalar");
  }
  out.backward();

  GradCheckResult res;
  std::vector<Tensor> probe;
  probe.reserve(inputs.size());
  for (const auto& t : inputs) probe.push_back(t.detach(false));

  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const auto analytic = leaves[k].grad();
    const auto base = inputs[k].data();
    for (std::size_t i = 0; i < base.size(); ++i) {
      // Divide by the step actually taken after rounding x +/- eps.
      const double hi = base[i] + eps;
      const double lo = base[i] - eps;
      probe[k].mutable_data()[i] = hi;
      const double up = eval_scalar(f, probe);
      probe[k].mutable_data()[i] = lo;
      const double down = eval_scalar(f, probe);
      probe[k].mutable_data()[i] = base[i];

      const double numeric = (up - down) / (hi - lo);
      const double a = analytic.empty() ? 0.0 : analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      double err = std::abs(a - numeric) / denom;
      if (std::isnan(err)) err = INFINITY;
      ++res.components;
      if (err > res.max_relative_error || res.components == 1) {
        res.max_relative_error = std::max(res.max_relative_error, err);
        res.worst_input = k;
        res.worst_index = i;
        res.analytic = a;
        res.numeric = numeric;
      }
    }
  }
  return res;
}

double grad_check(const std::function<Tensor(const Tensor&)>& f,
                  const Tensor& x, double eps) {
  const Tensor inputs[] = {x};
  return grad_check([&f](std::span<const Tensor> in) { return f(in[0]); },
                    inputs, eps)
      .max_relative_error;
}

}  // namespace avcl
