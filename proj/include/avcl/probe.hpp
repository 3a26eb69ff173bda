#pragma once

#include <cstddef>
#include <cstdint>

#include "avcl/data.hpp"
#include "avcl/model.hpp"

namespace avcl::probe {

enum class ProbeMode { kLinear, kFinetune };

struct ProbeConfig {
  int epochs = 150;
  double lr = 0.05;
  double momentum = 0.9;
  // Applied to the classifier weights only.
  double weight_decay = 0.005;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  // Scale each modality's feature rows to unit length before concatenating.
  bool normalize = true;
  ProbeMode mode = ProbeMode::kLinear;

  void validate() const;
};

struct ProbeResult {
  double test_accuracy = 0.0;
  double val_accuracy = 0.0;  // of the selected epoch
  int best_epoch = 0;
};

// [f_v, f_a] for every sample: [N x 2c]. With `normalize`, rows of f_v and
// f_a are each scaled to unit length first; all-zero rows stay zero.
Tensor probe_features(const model::AvclModel& model, const data::PreparedSplit& split,
                      data::AudioPooling pooling, bool normalize = true);

// Trains an affine softmax classifier on the train-split features (frozen
// encoders in linear mode; encoders and fusion are updated too in finetune
// mode), keeps the epoch with the best validation accuracy and reports its
// top-1 accuracy on the test split. Labels are used only here.
ProbeResult linear_probe(const model::AvclModel& model, const data::PreparedSplit& train,
                         const data::PreparedSplit& val, const data::PreparedSplit& test,
                         int n_classes, data::AudioPooling pooling, const ProbeConfig& cfg);

}  // namespace avcl::probe
