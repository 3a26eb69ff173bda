#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "avcl/data.hpp"
#include "avcl/losses.hpp"
#include "avcl/model.hpp"

namespace avcl::train {

struct TrainConfig {
  double lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  std::size_t batch_size = 16;
  int epochs = 100;
  std::uint64_t seed = 0;
  // Rescales the global gradient to at most this L2 norm before each step;
  // 0 disables clipping.
  double grad_clip = 10.0;
  losses::LossConfig loss;
  bool amfm_enabled = true;
  bool cgra_enabled = true;
  bool selfcl_enabled = true;

  void validate() const;
  // `loss` with the weight of every disabled term set to zero.
  losses::LossConfig effective_loss() const;
};

struct MetricsRecord {
  int epoch = 0;
  // Means over the epoch's batches.
  double total = 0.0;
  double cgra = 0.0;
  double selfcl_v = 0.0;
  double selfcl_a = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
  // Total loss on the validation split after the epoch (not written to CSV).
  double val_total = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "epoch,total,cgra,selfcl_v,selfcl_a,grad_norm,wall_ms";

std::string metrics_csv(const std::vector<MetricsRecord>& records);

struct PretrainResult {
  model::AvclModel best;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<MetricsRecord> metrics;
};

using EpochCallback = std::function<void(const MetricsRecord&)>;

// Minimizes the weighted loss over shuffled mini-batches of `train` and keeps
// the parameters from the epoch with the lowest total loss on `val` (on
// `train` when `val` has fewer than two samples). `init` is not modified.
PretrainResult pretrain(const TrainConfig& cfg, const model::AvclModel& init,
                        const data::PreparedSplit& train, const data::PreparedSplit& val,
                        data::AudioPooling pooling, const EpochCallback& on_epoch = {});

// Fresh model seeded with cfg.seed; fusion follows cfg.amfm_enabled.
PretrainResult pretrain(const TrainConfig& cfg, model::ModelConfig model_cfg,
                        const data::PreparedSplit& train, const data::PreparedSplit& val,
                        data::AudioPooling pooling, const EpochCallback& on_epoch = {});

// Weighted loss of `model` over the whole split in one batch.
losses::LossTerms evaluate_loss(const model::AvclModel& model, const data::PreparedSplit& split,
                                const losses::LossConfig& loss, data::AudioPooling pooling);

}  // namespace avcl::train
