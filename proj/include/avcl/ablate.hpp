#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avcl/config.hpp"
#include "avcl/data.hpp"
#include "avcl/probe.hpp"
#include "avcl/train.hpp"

namespace avcl::ablate {

// Splits with spectrograms computed, ready for training and probing.
struct PreparedData {
  data::PreparedSplit train;
  data::PreparedSplit val;
  data::PreparedSplit test;
  int n_classes = 0;
  std::size_t visual_dim = 0;
};

// Generates (or loads) the dataset described by `cfg.data` and computes its
// spectrograms on up to `threads` workers.
PreparedData prepare_data(const config::RunConfig& cfg, unsigned threads);

struct RunResult {
  train::PretrainResult pretrain;
  probe::ProbeResult probe;
};

// pretrain followed by linear_probe of the selected checkpoint.
RunResult pretrain_and_probe(const config::RunConfig& cfg, const PreparedData& data,
                             const train::EpochCallback& on_epoch = {});

// Probe of a freshly initialized, untrained model (the same initialization
// pretrain starts from).
probe::ProbeResult random_encoder_probe(const config::RunConfig& cfg, const PreparedData& data);

struct Variant {
  std::string name;
  config::RunConfig cfg;
};

inline const std::vector<std::pair<double, double>> kLambdaSweep{
    {0.1, 0.9}, {0.3, 0.7}, {0.5, 0.5}, {0.7, 0.3}, {0.9, 0.1}};

// "full" plus one "<module>_off" per module axis, then one "lambda_<cor>_<self>"
// per sweep pair. No axes gives just "full"; a sweep alone gives only its
// five variants.
std::vector<Variant> variants(const config::RunConfig& base);

struct Row {
  std::string variant;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

struct Summary {
  std::string variant;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single seed
};

struct Report {
  std::vector<Row> rows;
  std::vector<Summary> summary;

  std::string rows_csv() const;
  std::string summary_csv() const;
};

std::vector<Summary> summarize(const std::vector<Row>& rows);

// Every variant on seeds base.train.seed + {0, .., ablate.seeds - 1}. Variants
// sharing a seed see the same data and initialization. Runs are independent
// and spread over up to `threads` workers; the report order does not depend
// on scheduling.
Report run(const config::RunConfig& base, unsigned threads);

}  // namespace avcl::ablate
