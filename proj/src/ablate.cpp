#include "avcl/ablate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "avcl/error.hpp"
#include "avcl/parallel.hpp"

namespace avcl::ablate {

PreparedData prepare_data(const config::RunConfig& cfg, unsigned threads) {
  data::DatasetSplit split;
  if (cfg.data.source == "corpus") {
    split = data::load_corpus(cfg.data.corpus_dir, cfg.data.manifest);
  } else {
    split = data::generate(cfg.data.synthetic);
  }
  if (split.train.empty()) throw ConfigError("the train split is empty");
  PreparedData out;
  out.n_classes = split.n_classes;
  out.visual_dim = split.train.front().visual.numel();
  out.train = data::prepare(split.train, cfg.stft, threads);
  out.val = data::prepare(split.val, cfg.stft, threads);
  out.test = data::prepare(split.test, cfg.stft, threads);
  return out;
}

RunResult pretrain_and_probe(const config::RunConfig& cfg, const PreparedData& data,
                             const train::EpochCallback& on_epoch) {
  RunResult r{train::pretrain(cfg.train, cfg.model_config(data.visual_dim), data.train, data.val,
                              cfg.data.pooling, on_epoch),
              {}};
  r.probe = probe::linear_probe(r.pretrain.best, data.train, data.val, data.test, data.n_classes,
                                cfg.data.pooling, cfg.probe);
  return r;
}

probe::ProbeResult random_encoder_probe(const config::RunConfig& cfg, const PreparedData& data) {
  const model::AvclModel init(cfg.model_config(data.visual_dim), cfg.train.seed);
  return probe::linear_probe(init, data.train, data.val, data.test, data.n_classes,
                             cfg.data.pooling, cfg.probe);
}

std::vector<Variant> variants(const config::RunConfig& base) {
  const auto& axes = base.ablate.axes;
  auto has = [&axes](const char* a) { return std::find(axes.begin(), axes.end(), a) != axes.end(); };
  std::vector<Variant> out;
  const bool modules = has("amfm") || has("cgra") || has("selfcl");
  if (axes.empty() || modules) out.push_back({"full", base});
  if (has("amfm")) {
    auto c = base;
    c.train.amfm_enabled = false;
    out.push_back({"amfm_off", c});
  }
  if (has("cgra")) {
    auto c = base;
    c.train.cgra_enabled = false;
    out.push_back({"cgra_off", c});
  }
  if (has("selfcl")) {
    auto c = base;
    c.train.selfcl_enabled = false;
    out.push_back({"selfcl_off", c});
  }
  if (has("lambda_sweep")) {
    for (const auto& [cor, self] : kLambdaSweep) {
      auto c = base;
      c.train.loss.lambda_cor = cor;
      c.train.loss.lambda_self = self;
      char name[64];
      std::snprintf(name, sizeof name, "lambda_%.1f_%.1f", cor, self);
      out.push_back({name, c});
    }
  }
  return out;
}

std::vector<Summary> summarize(const std::vector<Row>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> acc;
  for (const auto& r : rows) {
    if (!acc.count(r.variant)) order.push_back(r.variant);
    acc[r.variant].push_back(r.accuracy);
  }
  std::vector<Summary> out;
  for (const auto& name : order) {
    const auto& xs = acc[name];
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    out.push_back({name, mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0});
  }
  return out;
}

std::string Report::rows_csv() const {
  std::string out = "variant,seed,accuracy\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%llu,%.17g\n", static_cast<unsigned long long>(r.seed),
                  r.accuracy);
    out += r.variant + buf;
  }
  return out;
}

std::string Report::summary_csv() const {
  std::string out = "variant,mean,sd\n";
  char buf[128];
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", s.mean, s.sd);
    out += s.variant + buf;
  }
  return out;
}

Report run(const config::RunConfig& base, unsigned threads) {
  base.validate();
  const auto vs = variants(base);
  const auto n_seeds = static_cast<std::size_t>(base.ablate.seeds);

  std::vector<config::RunConfig> seeded(n_seeds, base);
  std::vector<PreparedData> prepared;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    seeded[s].set_seed(base.train.seed + s);
    prepared.push_back(prepare_data(seeded[s], threads));
  }

  Report report;
  report.rows.resize(vs.size() * n_seeds);
  parallel_for(report.rows.size(), threads, [&](std::size_t task) {
    const std::size_t v = task / n_seeds;
    const std::size_t s = task % n_seeds;
    auto cfg = vs[v].cfg;
    cfg.set_seed(seeded[s].train.seed);
    const auto r = pretrain_and_probe(cfg, prepared[s]);
    report.rows[task] = {vs[v].name, seeded[s].train.seed, r.probe.test_accuracy};
  });
  report.summary = summarize(report.rows);
  return report;
}

}  // namespace avcl::ablate
