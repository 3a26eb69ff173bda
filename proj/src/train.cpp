#include "avcl/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "avcl/error.hpp"
#include "avcl/optim.hpp"

namespace avcl::train {

void TrainConfig::validate() const {
  optim::SgdOptions{lr, momentum, weight_decay}.validate();
  if (batch_size < 2) throw ConfigError("train.batch_size must be >= 2");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (!(grad_clip >= 0.0)) throw ConfigError("train.grad_clip must be >= 0");
  loss.validate();
  if (!cgra_enabled && !selfcl_enabled) {
    throw ConfigError("at least one of cgra_enabled / selfcl_enabled must be set");
  }
  effective_loss().validate();
}

losses::LossConfig TrainConfig::effective_loss() const {
  auto l = loss;
  if (!cgra_enabled) l.lambda_cor = 0.0;
  if (!selfcl_enabled) l.lambda_self = 0.0;
  return l;
}

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
  std::string out = std::string(kMetricsHeader) + "\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.epoch, r.total,
                  r.cgra, r.selfcl_v, r.selfcl_a, r.grad_norm, r.wall_ms);
    out += buf;
  }
  return out;
}

namespace {

double value_or_zero(const Tensor& t) { return t.defined() ? t.item() : 0.0; }

}  // namespace

losses::LossTerms evaluate_loss(const model::AvclModel& model, const data::PreparedSplit& split,
                                const losses::LossConfig& loss, data::AudioPooling pooling) {
  const auto batch = data::full_batch(split, pooling);
  const auto emb = model.forward(batch.visual, batch.audio);
  return losses::total_loss(emb.f_v.detach(), emb.f_a.detach(), loss);
}

PretrainResult pretrain(const TrainConfig& cfg, const model::AvclModel& init,
                        const data::PreparedSplit& train, const data::PreparedSplit& val,
                        data::AudioPooling pooling, const EpochCallback& on_epoch) {
  cfg.validate();
  if (cfg.batch_size > train.size()) {
    throw ConfigError("train.batch_size " + std::to_string(cfg.batch_size) +
                      " exceeds the train split size " + std::to_string(train.size()));
  }
  if (init.config().amfm_enabled != cfg.amfm_enabled) {
    throw ConfigError("model fusion setting disagrees with train.amfm_enabled");
  }
  const auto loss_cfg = cfg.effective_loss();
  const auto& val_split = val.size() >= 2 ? val : train;

  model::AvclModel model = init.clone();
  optim::Sgd sgd(model.parameters(), {cfg.lr, cfg.momentum, cfg.weight_decay});

  PretrainResult result{model.clone(), 0, std::numeric_limits<double>::infinity(), {}};
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    MetricsRecord rec;
    rec.epoch = epoch;
    const auto bs = data::batches(train, cfg.batch_size, cfg.seed,
                                  static_cast<std::uint64_t>(epoch - 1), pooling);
    for (std::size_t b = 0; b < bs.size(); ++b) {
      const auto where = "epoch " + std::to_string(epoch) + " batch " + std::to_string(b);
      losses::LossTerms terms;
      try {
        const auto emb = model.forward(bs[b].visual, bs[b].audio);
        terms = losses::total_loss(emb.f_v, emb.f_a, loss_cfg);
      } catch (const DegenerateError& e) {
        throw NumericAbort("degenerate features at " + where + ": " + e.what());
      }
      const double total = terms.total.item();
      if (!std::isfinite(total)) {
        throw NumericAbort("non-finite loss at " + where);
      }
      sgd.zero_grad();
      terms.total.backward();
      const double gn = optim::global_grad_norm(sgd.params());
      rec.grad_norm += gn;
      if (cfg.grad_clip > 0.0 && gn > cfg.grad_clip) optim::scale_grads(sgd.params(), cfg.grad_clip / gn);
      sgd.step();
      rec.total += total;
      rec.cgra += value_or_zero(terms.cgra);
      rec.selfcl_v += value_or_zero(terms.selfcl_v);
      rec.selfcl_a += value_or_zero(terms.selfcl_a);
    }
    const auto n = static_cast<double>(bs.size());
    rec.total /= n;
    rec.cgra /= n;
    rec.selfcl_v /= n;
    rec.selfcl_a /= n;
    rec.grad_norm /= n;

    try {
      rec.val_total = evaluate_loss(model, val_split, loss_cfg, pooling).total.item();
    } catch (const DegenerateError&) {
      rec.val_total = std::numeric_limits<double>::infinity();
    }
    if (rec.val_total < result.best_val_loss) {
      result.best_val_loss = rec.val_total;
      result.best_epoch = epoch;
      result.best = model.clone();
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0).count();
    result.metrics.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  // No epoch produced a usable validation loss; keep the final parameters.
  if (result.best_epoch == 0) {
    result.best = model.clone();
    result.best_epoch = cfg.epochs;
  }
  return result;
}

PretrainResult pretrain(const TrainConfig& cfg, model::ModelConfig model_cfg,
                        const data::PreparedSplit& train, const data::PreparedSplit& val,
                        data::AudioPooling pooling, const EpochCallback& on_epoch) {
  model_cfg.amfm_enabled = cfg.amfm_enabled;
  const model::AvclModel init(model_cfg, cfg.seed);
  return pretrain(cfg, init, train, val, pooling, on_epoch);
}

}  // namespace avcl::train
