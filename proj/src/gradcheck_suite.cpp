#include "avcl/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "avcl/losses.hpp"
#include "avcl/model.hpp"
#include "avcl/parallel.hpp"

namespace avcl::gradcheck {

namespace {

struct Rand {
  std::mt19937_64 rng;

  explicit Rand(std::uint64_t seed) : rng(seed * 0x9e3779b97f4a7c15ULL + 1) {}

  Tensor normal(Shape shape, double sd = 1.0) {
    std::normal_distribution<double> d(0.0, sd);
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = d(rng);
    return Tensor::from_data(std::move(shape), std::move(v));
  }
  // Entries with |x| in [0.5, 1.5] and random sign, safe as divisors.
  Tensor away_from_zero(Shape shape) {
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = sign(rng) ? mag(rng) : -mag(rng);
    return Tensor::from_data(std::move(shape), std::move(v));
  }
  Tensor positive(Shape shape) {
    std::uniform_real_distribution<double> d(0.5, 2.0);
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = d(rng);
    return Tensor::from_data(std::move(shape), std::move(v));
  }
};

// Fixed random weights turn any tensor into a scalar with a generic gradient.
Tensor weighted_sum(const Tensor& x, const Tensor& w) { return sum(mul(x, w)); }

using Inputs = std::span<const Tensor>;

Check unary(std::string name, Shape shape, std::function<Tensor(const Tensor&)> op,
            bool positive_input = false) {
  return {name, [=](std::uint64_t seed) {
            Rand r(seed);
            const Tensor x = positive_input ? r.positive(shape) : r.normal(shape);
            const Tensor w = r.normal(op(x).shape());
            const Tensor in[] = {x};
            return grad_check(
                [&](Inputs t) { return weighted_sum(op(t[0]), w); }, in, kEps);
          }};
}

// Random model small enough to check every parameter, with fusion gates
// biased open so no feature column is identically zero.
model::AvclModel small_model(Rand& r) {
  model::ModelConfig cfg;
  cfg.visual_dim = 5;
  cfg.audio_dim = 6;
  cfg.hidden_dim = 5;
  cfg.embed_dim = 4;
  cfg.encoder_layers = 2;
  model::AvclModel m(cfg, r.rng());
  auto b_e = m.amfm()->b_e;
  for (auto& v : b_e.mutable_data()) v += 1.0;
  return m;
}

}  // namespace

std::vector<Check> default_checks() {
  std::vector<Check> c;
  c.push_back({"matmul", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({3, 4}), r.normal({4, 2})};
                 const Tensor w = r.normal({3, 2});
                 return grad_check([&](Inputs t) { return weighted_sum(matmul(t[0], t[1]), w); },
                                   in, kEps);
               }});
  c.push_back(unary("transpose", {3, 4}, [](const Tensor& x) { return transpose(x); }));
  c.push_back(unary("reshape", {3, 4}, [](const Tensor& x) { return reshape(x, {2, 6}); }));
  c.push_back({"add_sub", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({3, 4}), r.normal({3, 4}), r.normal({})};
                 const Tensor w = r.normal({3, 4});
                 return grad_check(
                     [&](Inputs t) { return weighted_sum(sub(add(t[0], t[2]), t[1]), w); }, in,
                     kEps);
               }});
  c.push_back({"mul", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({3, 4}), r.normal({3, 4}), r.normal({})};
                 const Tensor w = r.normal({3, 4});
                 return grad_check(
                     [&](Inputs t) { return weighted_sum(mul(mul(t[0], t[1]), t[2]), w); }, in,
                     kEps);
               }});
  c.push_back({"div", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({3, 4}), r.away_from_zero({3, 4}),
                                      r.away_from_zero({})};
                 const Tensor w = r.normal({3, 4});
                 return grad_check(
                     [&](Inputs t) { return weighted_sum(div(div(t[0], t[1]), t[2]), w); }, in,
                     kEps);
               }});
  c.push_back(unary("scale_add_scalar", {3, 4}, [](const Tensor& x) {
    return add_scalar(scale(x, -1.7), 0.3);
  }));
  c.push_back(unary("relu", {4, 5}, [](const Tensor& x) { return relu(x); }));
  c.push_back(unary("sigmoid", {4, 5}, [](const Tensor& x) { return sigmoid(x); }));
  c.push_back(unary("exp", {3, 4}, [](const Tensor& x) { return exp(x); }));
  c.push_back(unary("log", {3, 4}, [](const Tensor& x) { return log(x); }, true));
  c.push_back(unary("square", {3, 4}, [](const Tensor& x) { return square(x); }));
  c.push_back({"concat", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({3, 2}), r.normal({3, 4}), r.normal({2, 6})};
                 const Tensor w = r.normal({5, 6});
                 return grad_check(
                     [&](Inputs t) { return weighted_sum(concat(concat(t[0], t[1], 1), t[2], 0), w); },
                     in, kEps);
               }});
  c.push_back(unary("slice", {4, 5}, [](const Tensor& x) {
    return concat(slice(x, 0, 1, 3), slice(slice(x, 0, 0, 2), 1, 1, 4), 1);
  }));
  c.push_back(unary("sum", {3, 4}, [](const Tensor& x) { return scale(square(sum(x)), 0.5); }));
  c.push_back(unary("sum_axis", {3, 4}, [](const Tensor& x) {
    return concat(sum(x, 0), transpose(sum(x, 1)), 1);
  }));
  c.push_back(unary("l2_norm", {3, 4}, [](const Tensor& x) { return square(l2_norm(x)); }));
  c.push_back(unary("l2_norm_axis", {3, 4}, [](const Tensor& x) {
    return concat(l2_norm(x, 0), transpose(l2_norm(x, 1)), 1);
  }));
  c.push_back({"softmax_cross_entropy", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({5, 3})};
                 std::vector<int> labels(5);
                 std::uniform_int_distribution<int> d(0, 2);
                 for (auto& l : labels) l = d(r.rng);
                 return grad_check(
                     [&](Inputs t) { return softmax_cross_entropy(t[0], labels); }, in, kEps);
               }});
  c.push_back({"encoder", [](std::uint64_t seed) {
                 Rand r(seed);
                 const std::size_t dims[] = {5, 6, 3};
                 const auto p = model::init_encoder(dims, r.rng);
                 std::vector<Tensor> in{r.normal({4, 5})};
                 for (const auto& t : p.tensors()) in.push_back(t.detach());
                 const Tensor w = r.normal({4, 3});
                 return grad_check(
                     [&](Inputs t) {
                       model::EncoderParams q;
                       q.layers = {{t[1], t[2]}, {t[3], t[4]}};
                       return weighted_sum(model::encode(t[0], q), w);
                     },
                     in, kEps);
               }});
  c.push_back({"amfm", [](std::uint64_t seed) {
                 Rand r(seed);
                 const std::size_t ch = 4;
                 auto p = model::init_amfm(ch, r.rng);
                 const Tensor b_e = add_scalar(p.b_e, 0.5).detach();
                 const Tensor in[] = {r.normal({3, ch}), r.normal({3, ch}), p.w_s.detach(),
                                      p.b_s.detach(),    p.w_e.detach(),    b_e};
                 return grad_check(
                     [&](Inputs t) {
                       const auto f = model::amfm_forward(t[0], t[1], {t[2], t[3], t[4], t[5]});
                       return add(sum(f.f_v), sum(f.f_a));
                     },
                     in, kEps);
               }});
  c.push_back({"cross_correlation", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({5, 4}), r.normal({5, 4})};
                 const Tensor w = r.normal({4, 4});
                 return grad_check(
                     [&](Inputs t) { return weighted_sum(losses::cross_correlation(t[0], t[1]), w); },
                     in, kEps);
               }});
  c.push_back({"cgra_loss", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({4, 6}), r.normal({4, 6})};
                 return grad_check(
                     [&](Inputs t) {
                       return losses::cgra_loss(losses::cross_correlation(t[0], t[1]), 0.005);
                     },
                     in, kEps);
               }});
  c.push_back({"selfcl_v", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({4, 6}), r.normal({4, 6})};
                 return grad_check([&](Inputs t) { return losses::selfcl_loss_v(t[0], t[1], 0.1); },
                                   in, kEps);
               }});
  c.push_back({"selfcl_a", [](std::uint64_t seed) {
                 Rand r(seed);
                 const Tensor in[] = {r.normal({4, 6}), r.normal({4, 6})};
                 return grad_check([&](Inputs t) { return losses::selfcl_loss_a(t[0], t[1], 0.1); },
                                   in, kEps);
               }});
  c.push_back({"total_loss_end_to_end", [](std::uint64_t seed) {
                 Rand r(seed);
                 const auto m = small_model(r);
                 const auto cfg = m.config();
                 std::vector<Tensor> in{r.normal({4, cfg.visual_dim}), r.positive({4, cfg.audio_dim})};
                 for (const auto& p : m.parameters()) in.push_back(p.detach());
                 const std::size_t n_enc = 2 * cfg.encoder_layers;
                 return grad_check(
                     [&](Inputs t) {
                       auto enc = [&](std::size_t first) {
                         model::EncoderParams e;
                         for (std::size_t l = 0; l < cfg.encoder_layers; ++l) {
                           e.layers.push_back({t[first + 2 * l], t[first + 2 * l + 1]});
                         }
                         return e;
                       };
                       const std::size_t f = 2 + 2 * n_enc;
                       const model::AvclModel net(
                           cfg, enc(2), enc(2 + n_enc),
                           model::AmfmParams{t[f], t[f + 1], t[f + 2], t[f + 3]});
                       const auto emb = net.forward(t[0], t[1]);
                       return losses::total_loss(emb.f_v, emb.f_a, losses::LossConfig{}).total;
                     },
                     in, kEps);
               }});
  return c;
}

Check broken_check() {
  return {"broken_gradient", [](std::uint64_t seed) {
            Rand r(seed);
            const Tensor in[] = {r.normal({3, 3})};
            // The square term is evaluated on a detached copy, so its
            // contribution to the gradient is lost.
            return grad_check(
                [](Inputs t) { return add(sum(square(t[0].detach())), sum(t[0])); }, in, kEps);
          }};
}

std::vector<CheckReport> run_checks(const std::vector<Check>& checks, int seeds,
                                    unsigned threads) {
  std::vector<CheckReport> out(checks.size());
  parallel_for(checks.size(), threads, [&](std::size_t i) {
    CheckReport rep{checks[i].name, 0.0, 0, true};
    for (int s = 0; s < seeds; ++s) {
      const auto res = checks[i].run(static_cast<std::uint64_t>(s));
      const double err = std::isnan(res.max_relative_error) ? INFINITY : res.max_relative_error;
      if (err > rep.max_relative_error || s == 0) {
        rep.max_relative_error = std::max(rep.max_relative_error, err);
        rep.worst_seed = static_cast<std::uint64_t>(s);
      }
    }
    rep.passed = rep.max_relative_error < kTolerance;
    out[i] = rep;
  });
  return out;
}

bool all_passed(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
}

}  // namespace avcl::gradcheck
