#pragma once

#include <vector>

#include "avcl/tensor.hpp"

namespace avcl::optim {

struct SgdOptions {
  double lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0005;

  void validate() const;
};

// Heavy-ball SGD with L2 weight decay folded into the gradient:
//   v <- momentum * v + (grad + weight_decay * p);  p <- p - lr * v
class Sgd {
 public:
  Sgd(std::vector<Tensor> params, SgdOptions opts);

  // Every registered parameter must hold a gradient from backward().
  void step();
  void zero_grad();

  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<std::vector<double>>& velocity() const { return velocity_; }
  const SgdOptions& options() const { return opts_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> velocity_;
  SgdOptions opts_;
};

// sqrt of the sum of squared gradients over `params` (missing grads count 0).
double global_grad_norm(const std::vector<Tensor>& params);

// Multiplies every populated gradient by `factor`.
void scale_grads(std::vector<Tensor> params, double factor);

}  // namespace avcl::optim
