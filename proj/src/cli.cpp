#include "avcl/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "avcl/ablate.hpp"
#include "avcl/checkpoint.hpp"
#include "avcl/config.hpp"
#include "avcl/error.hpp"
#include "avcl/gradcheck_suite.hpp"
#include "avcl/parallel.hpp"
#include "avcl/serialize.hpp"
#include "avcl/wav.hpp"

namespace avcl::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> epochs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--seed", f.seed, "seed for data, initialization, shuffling and probe");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--epochs", f.epochs, "pretraining epochs");
}

config::RunConfig resolve(const CommonFlags& f) {
  config::RunConfig cfg = f.config.empty() ? config::RunConfig{} : config::load_config(f.config);
  if (f.seed) cfg.set_seed(*f.seed);
  if (!f.out.empty()) cfg.paths.out_dir = f.out;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  cfg.validate();
  return cfg;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string exact(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int cmd_train(const CommonFlags& flags, std::ostream& out) {
  const auto cfg = resolve(flags);
  const fs::path dir = cfg.paths.out_dir;
  fs::create_directories(dir);
  const auto data = ablate::prepare_data(cfg, worker_threads());
  out << "train=" << data.train.size() << " val=" << data.val.size()
      << " test=" << data.test.size() << " classes=" << data.n_classes << "\n";

  std::vector<train::MetricsRecord> records;
  const auto result = train::pretrain(
      cfg.train, cfg.model_config(data.visual_dim), data.train, data.val, cfg.data.pooling,
      [&](const train::MetricsRecord& r) {
        records.push_back(r);
        write_file_atomic(dir / "metrics.csv", train::metrics_csv(records));
        out << "epoch=" << r.epoch << " total=" << fmt(r.total) << " cgra=" << fmt(r.cgra)
            << " selfcl_v=" << fmt(r.selfcl_v) << " selfcl_a=" << fmt(r.selfcl_a)
            << " val_total=" << fmt(r.val_total) << "\n";
      });
  const auto ckpt_dir = dir / "checkpoint";
  checkpoint::save(ckpt_dir, result.best, config::to_json(cfg), config::config_hash(cfg));
  out << "best_epoch=" << result.best_epoch << " best_val_loss=" << exact(result.best_val_loss)
      << "\n";
  out << "checkpoint=" << ckpt_dir.string() << "\n";
  return kExitOk;
}

int cmd_probe(const CommonFlags& flags, const std::string& ckpt_flag, bool random_init,
              std::ostream& out) {
  const auto cfg = resolve(flags);
  const auto data = ablate::prepare_data(cfg, worker_threads());
  probe::ProbeResult r;
  if (random_init) {
    r = ablate::random_encoder_probe(cfg, data);
  } else {
    fs::path ckpt = ckpt_flag;
    if (ckpt.empty()) ckpt = cfg.paths.checkpoint;
    if (ckpt.empty()) ckpt = fs::path(cfg.paths.out_dir) / "checkpoint";
    const auto loaded = checkpoint::load(ckpt);
    checkpoint::check_compatible(cfg.model_config(data.visual_dim), loaded.model);
    r = probe::linear_probe(loaded.model, data.train, data.val, data.test, data.n_classes,
                            cfg.data.pooling, cfg.probe);
  }
  out << "best_epoch=" << r.best_epoch << " val_accuracy=" << exact(r.val_accuracy) << "\n";
  out << "test_accuracy=" << exact(r.test_accuracy) << "\n";
  return kExitOk;
}

int cmd_spectrogram(const CommonFlags& flags, const std::string& wav, const std::string& dst,
                    std::ostream& out) {
  const auto cfg = resolve(flags);
  const auto w = audio::read_wav(wav);
  const auto mel = audio::process(w, cfg.stft);
  const auto& m = mel.values;
  save_tensor(dst, Tensor::from_data({m.rows, m.cols}, m.values));
  const nlohmann::json sidecar{
      {"source", wav},
      {"source_sample_rate", w.sample_rate},
      {"source_channels", w.channels},
      {"source_frames", w.frames()},
      {"sample_rate", audio::kTargetRate},
      {"shape", {m.rows, m.cols}},
      {"stft", config::to_json(cfg)["stft"]}};
  write_file_atomic(dst + ".json", sidecar.dump(2) + "\n");
  out << "spectrogram=" << dst << "\n";
  return kExitOk;
}

int cmd_gradcheck(int seeds, bool inject_fault, std::ostream& out) {
  auto checks = gradcheck::default_checks();
  if (inject_fault) checks.push_back(gradcheck::broken_check());
  const auto reports = gradcheck::run_checks(checks, seeds, worker_threads());
  for (const auto& r : reports) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-24s max_rel_err=%.3e seed=%llu %s\n", r.name.c_str(),
                  r.max_relative_error, static_cast<unsigned long long>(r.worst_seed),
                  r.passed ? "ok" : "FAIL");
    out << buf;
  }
  const bool ok = gradcheck::all_passed(reports);
  out << "checks=" << reports.size() << "\n";
  out << "gradcheck=" << (ok ? "pass" : "fail") << "\n";
  return ok ? kExitOk : kExitFailure;
}

int cmd_ablate(const CommonFlags& flags, std::ostream& out) {
  const auto cfg = resolve(flags);
  const fs::path dir = cfg.paths.out_dir;
  fs::create_directories(dir);
  const auto report = ablate::run(cfg, worker_threads());
  write_file_atomic(dir / "ablation.csv", report.rows_csv());
  write_file_atomic(dir / "ablation_summary.csv", report.summary_csv());
  for (const auto& s : report.summary) {
    out << s.variant << " mean=" << fmt(s.mean) << " sd=" << fmt(s.sd) << "\n";
  }
  out << "ablation=" << (dir / "ablation.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audio-visual contrastive pretraining on desk-scale data"};
  app.require_subcommand(1);

  CommonFlags train_flags, probe_flags, spec_flags, ablate_flags;
  auto* train = app.add_subcommand("train", "pretrain encoders and write a checkpoint");
  add_common(train, train_flags);

  auto* probe = app.add_subcommand("probe", "linear probe of a checkpoint; prints test_accuracy");
  add_common(probe, probe_flags);
  std::string ckpt;
  bool random_init = false;
  probe->add_option("--checkpoint", ckpt, "checkpoint directory");
  probe->add_flag("--random-init", random_init, "probe an untrained model instead");

  auto* spec = app.add_subcommand("spectrogram", "mel spectrogram of a WAV file");
  add_common(spec, spec_flags);
  std::string wav, dst;
  spec->add_option("wav", wav, "input WAV")->required();
  spec->add_option("out_path", dst, "output tensor file")->required();

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every gradient");
  int seeds = 10;
  bool inject = false;
  grad->add_option("--seeds", seeds, "random seeds per check")->check(CLI::PositiveNumber);
  grad->add_flag("--inject-fault", inject, "append a check with a wrong gradient")
      ->group("");

  auto* abl = app.add_subcommand("ablate", "ablation table over paired seeds");
  add_common(abl, ablate_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) return cmd_train(train_flags, out);
    if (*probe) return cmd_probe(probe_flags, ckpt, random_init, out);
    if (*spec) return cmd_spectrogram(spec_flags, wav, dst, out);
    if (*grad) return cmd_gradcheck(seeds, inject, out);
    if (*abl) return cmd_ablate(ablate_flags, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericAbort& e) {
    err << "numeric abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kExitCheckpoint;
  } catch (const DecodeError& e) {
    err << "decode error: " << e.what() << "\n";
    return kExitDecode;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace avcl::cli
