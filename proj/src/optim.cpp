#include "avcl/optim.hpp"

#include <cmath>
#include <string>

#include "avcl/error.hpp"

namespace avcl::optim {

void SgdOptions::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

Sgd::Sgd(std::vector<Tensor> params, SgdOptions opts)
    : params_(std::move(params)), opts_(opts) {
  opts_.validate();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].defined() || !params_[i].is_leaf() || !params_[i].requires_grad()) {
      throw ContractError("sgd: parameter " + std::to_string(i) +
                          " is not a trainable leaf tensor");
    }
    velocity_.emplace_back(params_[i].numel(), 0.0);
  }
}

void Sgd::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].has_grad()) {
      throw ContractError("sgd: parameter " + std::to_string(i) + " " +
                          shape_str(params_[i].shape()) + " has no gradient");
    }
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto p = params_[i].mutable_data();
    const auto g = params_[i].grad();
    auto& v = velocity_[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      v[k] = opts_.momentum * v[k] + (g[k] + opts_.weight_decay * p[k]);
      p[k] -= opts_.lr * v[k];
    }
  }
}

void Sgd::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double global_grad_norm(const std::vector<Tensor>& params) {
  double s = 0.0;
  for (const auto& p : params) {
    if (!p.has_grad()) continue;
    for (double g : p.grad()) s += g * g;
  }
  return std::sqrt(s);
}

void scale_grads(std::vector<Tensor> params, double factor) {
  for (auto& p : params) {
    if (!p.has_grad()) continue;
    for (double& g : p.mutable_grad()) g *= factor;
  }
}

}  // namespace avcl::optim
