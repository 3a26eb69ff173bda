#include "avcl/probe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "avcl/error.hpp"
#include "avcl/optim.hpp"

namespace avcl::probe {

namespace {

// Encoder decay while finetuning; the classifier uses cfg.weight_decay.
constexpr double kEncoderWeightDecay = 0.0005;

std::vector<double> unit_rows(const Tensor& x) {
  const std::size_t n = x.rows();
  const std::size_t c = x.cols();
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += out[i * c + j] * out[i * c + j];
    if (s == 0.0) continue;
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] *= inv;
  }
  return out;
}

// Differentiable version of unit_rows.
Tensor unit_rows_graph(const Tensor& x) {
  const Tensor norms = l2_norm(x, 1);  // [B x 1]
  return x / matmul(norms, Tensor::ones({1, x.cols()}));
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx) {
  const std::size_t c = x.cols();
  std::vector<double> out;
  out.reserve(idx.size() * c);
  for (std::size_t i : idx) {
    const auto row = x.data().subspan(i * c, c);
    out.insert(out.end(), row.begin(), row.end());
  }
  return Tensor::from_data({idx.size(), c}, std::move(out));
}

double accuracy(const Tensor& logits, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const std::size_t c = logits.cols();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j) {
      if (logits.at(i, j) > logits.at(i, best)) best = j;
    }
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

void check_labels(const data::PreparedSplit& train, int n_classes) {
  std::set<int> seen;
  for (int l : train.labels) {
    if (l < 0 || l >= n_classes) {
      throw ConfigError("probe: label " + std::to_string(l) + " outside [0, " +
                        std::to_string(n_classes) + ")");
    }
    seen.insert(l);
  }
  for (int k = 0; k < n_classes; ++k) {
    if (!seen.count(k)) {
      throw ConfigError("probe: class " + std::to_string(k) + " is absent from the train split");
    }
  }
}

struct Classifier {
  model::Linear layer;

  Classifier copy() const { return {{layer.weight.detach(true), layer.bias.detach(true)}}; }
  Tensor logits(const Tensor& features) const { return model::linear(features, layer); }
};

}  // namespace

void ProbeConfig::validate() const {
  if (epochs < 1) throw ConfigError("probe.epochs must be >= 1");
  optim::SgdOptions{lr, momentum, weight_decay}.validate();
  if (batch_size < 1) throw ConfigError("probe.batch_size must be >= 1");
}

Tensor probe_features(const model::AvclModel& model, const data::PreparedSplit& split,
                      data::AudioPooling pooling, bool normalize) {
  const std::size_t c = model.config().embed_dim;
  if (split.size() == 0) throw ContractError("probe_features: empty split");
  const auto batch = data::full_batch(split, pooling);
  const auto emb = model.forward(batch.visual, batch.audio);
  const auto v = normalize ? unit_rows(emb.f_v)
                           : std::vector<double>(emb.f_v.data().begin(), emb.f_v.data().end());
  const auto a = normalize ? unit_rows(emb.f_a)
                           : std::vector<double>(emb.f_a.data().begin(), emb.f_a.data().end());
  std::vector<double> out;
  out.reserve(split.size() * 2 * c);
  for (std::size_t i = 0; i < split.size(); ++i) {
    out.insert(out.end(), v.begin() + static_cast<std::ptrdiff_t>(i * c),
               v.begin() + static_cast<std::ptrdiff_t>((i + 1) * c));
    out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(i * c),
               a.begin() + static_cast<std::ptrdiff_t>((i + 1) * c));
  }
  return Tensor::from_data({split.size(), 2 * c}, std::move(out));
}

ProbeResult linear_probe(const model::AvclModel& model, const data::PreparedSplit& train,
                         const data::PreparedSplit& val, const data::PreparedSplit& test,
                         int n_classes, data::AudioPooling pooling, const ProbeConfig& cfg) {
  cfg.validate();
  if (n_classes < 2) throw ConfigError("probe: need at least two classes");
  check_labels(train, n_classes);

  const bool finetune = cfg.mode == ProbeMode::kFinetune;
  const std::size_t dim = 2 * model.config().embed_dim;
  std::mt19937_64 rng(cfg.seed);
  const std::array<std::size_t, 2> dims{dim, static_cast<std::size_t>(n_classes)};
  Classifier clf{model::init_encoder(dims, rng).layers.front()};

  model::AvclModel net = model.clone();
  optim::Sgd head_w({clf.layer.weight}, {cfg.lr, cfg.momentum, cfg.weight_decay});
  optim::Sgd head_b({clf.layer.bias}, {cfg.lr, cfg.momentum, 0.0});
  std::optional<optim::Sgd> body;
  if (finetune) body.emplace(net.parameters(), optim::SgdOptions{cfg.lr, cfg.momentum,
                                                                  kEncoderWeightDecay});

  // Frozen features are computed once.
  Tensor train_x;
  if (!finetune) train_x = probe_features(net, train, pooling, cfg.normalize);

  auto eval = [&](const Classifier& c, const model::AvclModel& m,
                  const data::PreparedSplit& split) {
    if (split.size() == 0) return 0.0;
    return accuracy(c.logits(probe_features(m, split, pooling, cfg.normalize)), split.labels);
  };

  const bool have_val = val.size() > 0;
  Classifier best = clf.copy();
  std::optional<model::AvclModel> best_net;
  ProbeResult result;
  result.val_accuracy = -1.0;
  const std::size_t n = train.size();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = data::epoch_order(n, cfg.seed, static_cast<std::uint64_t>(epoch - 1));
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const auto idx = std::span(order).subspan(start, std::min(cfg.batch_size, n - start));
      std::vector<int> labels;
      for (std::size_t i : idx) labels.push_back(train.labels[i]);
      Tensor x;
      if (finetune) {
        data::PreparedSplit sub;
        for (std::size_t i : idx) {
          sub.visual.push_back(train.visual[i]);
          sub.mel.push_back(train.mel[i]);
          sub.labels.push_back(train.labels[i]);
        }
        const auto batch = data::full_batch(sub, pooling);
        const auto emb = net.forward(batch.visual, batch.audio);
        x = cfg.normalize ? concat(unit_rows_graph(emb.f_v), unit_rows_graph(emb.f_a), 1)
                          : concat(emb.f_v, emb.f_a, 1);
      } else {
        x = gather_rows(train_x, idx);
      }
      const Tensor loss = softmax_cross_entropy(clf.logits(x), labels);
      if (!std::isfinite(loss.item())) {
        throw NumericAbort("probe: non-finite loss at epoch " + std::to_string(epoch));
      }
      head_w.zero_grad();
      head_b.zero_grad();
      if (body) body->zero_grad();
      loss.backward();
      head_w.step();
      head_b.step();
      if (body) body->step();
    }
    if (have_val) {
      const double acc = eval(clf, net, val);
      if (acc > result.val_accuracy) {
        result.val_accuracy = acc;
        result.best_epoch = epoch;
        best = clf.copy();
        if (finetune) best_net = net.clone();
      }
    }
  }
  if (!have_val) {
    best = clf.copy();
    result.best_epoch = cfg.epochs;
    result.val_accuracy = 0.0;
  }
  const model::AvclModel& final_net = best_net ? *best_net : net;
  result.test_accuracy = eval(best, final_net, test);
  return result;
}

}  // namespace avcl::probe
