#include "avcl/losses.hpp"

#include <cmath>

#include "avcl/error.hpp"

namespace avcl::losses {

namespace {

void require_pair(const Tensor& x, const Tensor& y, const char* op) {
  if (x.rank() != 2 || y.rank() != 2 || x.shape() != y.shape()) {
    throw DimensionError(std::string(op) + ": expected two equal [batch x dim] tensors, got " +
                         shape_str(x.shape()) + " and " + shape_str(y.shape()));
  }
}

void require_nonzero_columns(const Tensor& x, const char* name) {
  const std::size_t b = x.rows(), d = x.cols();
  const auto v = x.data();
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < b; ++i) s += v[i * d + j] * v[i * d + j];
    if (s == 0.0) {
      throw DegenerateError(std::string("degenerate batch: column ") + std::to_string(j) +
                            " of " + name + " has zero norm");
    }
  }
}

void require_nonzero_rows(const Tensor& x, const char* name) {
  const std::size_t n = x.rows(), d = x.cols();
  const auto v = x.data();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += v[i * d + j] * v[i * d + j];
    if (s == 0.0) {
      throw DegenerateError(std::string("degenerate feature: row ") + std::to_string(i) +
                            " of " + name + " has zero norm");
    }
  }
}

Tensor center_columns(const Tensor& x) {
  const std::size_t b = x.rows();
  const Tensor avg = Tensor::full({b, b}, 1.0 / static_cast<double>(b));
  return x - matmul(avg, x);
}

// Rows scaled to unit length.
Tensor row_normalize(const Tensor& x) {
  const Tensor norms = l2_norm(x, 1);  // [n x 1]
  return x / matmul(norms, Tensor::ones({1, x.cols()}));
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda_offdiag > 0.0)) throw ConfigError("loss.lambda_offdiag must be > 0");
  if (!(tau > 0.0)) throw ConfigError("loss.tau must be > 0");
  if (!(lambda_cor >= 0.0) || !(lambda_self >= 0.0)) {
    throw ConfigError("loss.lambda_cor and loss.lambda_self must be >= 0");
  }
  if (lambda_cor == 0.0 && lambda_self == 0.0) {
    throw ConfigError("loss: lambda_cor and lambda_self cannot both be zero");
  }
}

Tensor cross_correlation(const Tensor& f_v, const Tensor& f_a, bool center) {
  require_pair(f_v, f_a, "cross_correlation");
  const Tensor xv = center ? center_columns(f_v) : f_v;
  const Tensor xa = center ? center_columns(f_a) : f_a;
  require_nonzero_columns(xv, "f_v");
  require_nonzero_columns(xa, "f_a");
  const Tensor num = matmul(transpose(xv), xa);
  const Tensor den = matmul(transpose(l2_norm(xv, 0)), l2_norm(xa, 0));
  return num / den;
}

Tensor cgra_loss(const Tensor& c, double lambda) {
  if (c.rank() != 2 || c.rows() != c.cols()) {
    throw DimensionError("cgra_loss: correlation matrix must be square, got " +
                         shape_str(c.shape()));
  }
  const Tensor eye = Tensor::identity(c.rows());
  const Tensor off_mask = sub(Tensor::scalar(1.0), eye);
  const Tensor on_diag = sum(square(eye - c * eye));
  const Tensor off_diag = sum(square(c * off_mask));
  return on_diag + scale(off_diag, lambda);
}

Tensor selfcl_loss_v(const Tensor& f_v, const Tensor& f_a, double tau) {
  require_pair(f_v, f_a, "selfcl");
  if (!(tau > 0.0)) throw ContractError("selfcl: tau must be positive");
  require_nonzero_rows(f_v, "anchor features");
  require_nonzero_rows(f_a, "paired features");
  const std::size_t n = f_v.rows();
  const Tensor uv = row_normalize(f_v);
  const Tensor ua = row_normalize(f_a);
  const Tensor cross = matmul(uv, transpose(ua));  // cos(v_i, a_j)
  const Tensor intra = matmul(uv, transpose(uv));  // cos(v_i, v_j)
  const Tensor eye = Tensor::identity(n);
  const Tensor off_mask = sub(Tensor::scalar(1.0), eye);
  const double inv_tau = 1.0 / tau;
  const Tensor denom = sum(exp(scale(cross, inv_tau)), 1) +
                       sum(exp(scale(intra, inv_tau)) * off_mask, 1);
  // log h(v_i, a_i) = cos(v_i, a_i) / tau
  const Tensor positives = scale(sum(cross * eye), inv_tau);
  return sum(log(denom)) - positives;
}

Tensor selfcl_loss_a(const Tensor& f_a, const Tensor& f_v, double tau) {
  return selfcl_loss_v(f_a, f_v, tau);
}

Tensor selfcl_total(const Tensor& f_v, const Tensor& f_a, double tau) {
  return selfcl_loss_v(f_v, f_a, tau) + selfcl_loss_a(f_a, f_v, tau);
}

LossTerms total_loss(const Tensor& f_v, const Tensor& f_a, const LossConfig& cfg) {
  cfg.validate();
  LossTerms t;
  Tensor total;
  if (cfg.lambda_cor > 0.0) {
    t.cgra = cgra_loss(cross_correlation(f_v, f_a, cfg.center), cfg.lambda_offdiag);
    total = scale(t.cgra, cfg.lambda_cor);
  }
  if (cfg.lambda_self > 0.0) {
    t.selfcl_v = selfcl_loss_v(f_v, f_a, cfg.tau);
    t.selfcl_a = selfcl_loss_a(f_a, f_v, cfg.tau);
    const Tensor s = scale(t.selfcl_v + t.selfcl_a, cfg.lambda_self);
    total = total.defined() ? total + s : s;
  }
  t.total = total;
  return t;
}

}  // namespace avcl::losses
