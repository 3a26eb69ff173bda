#pragma once

#include "avcl/tensor.hpp"

namespace avcl::losses {

struct LossConfig {
  double lambda_offdiag = 0.005;  // weight of off-diagonal terms in cgra_loss
  double lambda_cor = 0.9;
  double lambda_self = 0.1;
  double tau = 0.1;
  // Subtract per-column batch means before correlating.
  bool center = false;

  void validate() const;
};

// d x d matrix C_ij = sum_b f_v[b,i] f_a[b,j] / (|f_v[:,i]| |f_a[:,j]|),
// taken along the batch. No mean-centering unless `center` is set.
// Throws DegenerateError naming the first zero-norm column.
Tensor cross_correlation(const Tensor& f_v, const Tensor& f_a, bool center = false);

// sum_i (1 - C_ii)^2 + lambda * sum_{i != j} C_ij^2.
Tensor cgra_loss(const Tensor& c, double lambda);

// Cross-modal contrastive loss anchored on `anchor` rows:
//   -sum_i log( h(x_i, y_i) / (sum_j h(x_i, y_j) + sum_{j != i} h(x_i, x_j)) )
// with h(x, y) = exp(cos(x, y) / tau). Summed, not averaged, over the batch.
Tensor selfcl_loss_v(const Tensor& f_v, const Tensor& f_a, double tau);
// Same loss anchored on the audio rows.
Tensor selfcl_loss_a(const Tensor& f_a, const Tensor& f_v, double tau);
Tensor selfcl_total(const Tensor& f_v, const Tensor& f_a, double tau);

struct LossTerms {
  Tensor total;
  Tensor cgra;      // undefined when lambda_cor == 0
  Tensor selfcl_v;  // undefined when lambda_self == 0
  Tensor selfcl_a;
};

// lambda_cor * cgra_loss(C) + lambda_self * selfcl_total. A term whose weight
// is zero is not evaluated.
LossTerms total_loss(const Tensor& f_v, const Tensor& f_a, const LossConfig& cfg);

}  // namespace avcl::losses
