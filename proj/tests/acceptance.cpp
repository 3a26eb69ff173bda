// Acceptance run: one PASS/FAIL line per headline criterion. Tolerances and
// budgets are fixed here; the exit status is non-zero if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "avcl/ablate.hpp"
#include "avcl/audio.hpp"
#include "avcl/checkpoint.hpp"
#include "avcl/cli.hpp"
#include "avcl/config.hpp"
#include "avcl/losses.hpp"
#include "avcl/parallel.hpp"
#include "avcl/serialize.hpp"
#include "support/dsp_oracle.hpp"
#include "support/loss_oracle.hpp"

using namespace avcl;
namespace fs = std::filesystem;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr int kGradSeeds = 10;
constexpr double kGradBudgetSeconds = 120.0;
constexpr double kOracleTolerance = 1e-10;
// Decimal quoted alongside the worked N=2 example; its closed form
// 2 log((e + 2) / e) actually evaluates to 1.10289, so the closed form is
// what is checked and the quoted decimal is only reported.
constexpr double kQuotedWorkedValue = 1.0967;
constexpr double kInvariantTolerance = 1e-9;
constexpr int kInvariantInstances = 50;
constexpr double kDspBudgetSeconds = 10.0;
constexpr double kMinAccuracy = 0.90;
constexpr double kMinGapOverRandom = 0.20;
constexpr double kLearningBudgetSeconds = 15.0 * 60.0;
constexpr double kDescentRatio = 0.8;
const std::vector<std::uint64_t> kSeeds{1, 2, 3};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Line> g_lines;

void report(const std::string& name, bool pass, const std::string& detail) {
  g_lines.push_back({name, pass, detail});
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

oracle::Rows random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  oracle::Rows r(n, std::vector<double>(d));
  for (auto& row : r)
    for (auto& x : row) x = g(rng);
  return r;
}

Tensor to_tensor(const oracle::Rows& r) {
  std::vector<double> flat;
  for (const auto& row : r) flat.insert(flat.end(), row.begin(), row.end());
  return Tensor::from_data({r.size(), r[0].size()}, flat);
}

// ---------------------------------------------------------------------------

void gradient_suite() {
  const auto t0 = Clock::now();
  std::string a0 = "avcl", a1 = "gradcheck", a2 = "--seeds", a3 = std::to_string(kGradSeeds);
  char* argv[] = {a0.data(), a1.data(), a2.data(), a3.data()};
  std::ostringstream out, err;
  const int code = cli::run(4, argv, out, err);
  const double dt = seconds_since(t0);
  // Worst error among the printed per-check lines.
  double worst = 0.0;
  int checks = 0;
  std::istringstream lines(out.str());
  for (std::string l; std::getline(lines, l);) {
    const auto p = l.find("max_rel_err=");
    if (p == std::string::npos) continue;
    ++checks;
    worst = std::max(worst, std::stod(l.substr(p + 12)));
  }
  report("gradient suite", code == 0 && worst < kGradTolerance && dt < kGradBudgetSeconds,
         fmt("exit=%d checks=%d seeds=%d worst_rel_err=%.2e (< %.0e) runtime=%.1fs (< %.0fs)",
             code, checks, kGradSeeds, worst, kGradTolerance, dt, kGradBudgetSeconds));
}

void loss_oracles() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = size(rng), d = size(rng);
    const auto v = random_rows(n, d, rng), a = random_rows(n, d, rng);
    const auto tv = to_tensor(v), ta = to_tensor(a);
    for (double lambda : {0.005, 0.3}) {
      worst = std::max(worst, std::abs(losses::cgra_loss(losses::cross_correlation(tv, ta), lambda)
                                           .item() -
                                       oracle::cgra(v, a, lambda)));
    }
    for (double tau : {0.1, 1.0}) {
      worst = std::max(worst, std::abs(losses::selfcl_loss_v(tv, ta, tau).item() -
                                       oracle::selfcl(v, a, tau)));
      worst = std::max(worst, std::abs(losses::selfcl_loss_a(ta, tv, tau).item() -
                                       oracle::selfcl(a, v, tau)));
    }
  }
  const auto eye = Tensor::identity(2);
  const double lv = losses::selfcl_loss_v(eye, eye, 1.0).item();
  const double la = losses::selfcl_loss_a(eye, eye, 1.0).item();
  const double closed = 2.0 * std::log((std::exp(1.0) + 2.0) / std::exp(1.0));
  const bool worked =
      std::abs(lv - closed) < kOracleTolerance && std::abs(la - closed) < kOracleTolerance;
  report("loss oracles", worst < kOracleTolerance && worked,
         fmt("20 random batches (N,d <= 8) worst_abs_err=%.2e (< %.0e); worked N=2 v=%.6f a=%.6f "
             "closed_form=%.6f (quoted %.4f differs by %.1e)",
             worst, kOracleTolerance, lv, la, closed, kQuotedWorkedValue,
             closed - kQuotedWorkedValue));
}

void loss_invariants() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  int failures = 0;
  double worst_scale = 0.0, worst_col = 0.0, worst_perm = 0.0, worst_bound = 0.0;
  bool identity_ok = true;
  for (int t = 0; t < kInvariantInstances; ++t) {
    const std::size_t n = 2 + t % 7, d = 2 + (t * 3) % 7;
    auto v = random_rows(n, d, rng);
    const auto a = random_rows(n, d, rng);
    const double sv = losses::selfcl_loss_v(to_tensor(v), to_tensor(a), 0.1).item();
    const double sa = losses::selfcl_loss_a(to_tensor(a), to_tensor(v), 0.1).item();
    const auto c0 = losses::cross_correlation(to_tensor(v), to_tensor(a));
    const double total0 = losses::total_loss(to_tensor(v), to_tensor(a), {}).total.item();

    // Row scaling leaves SelfCL unchanged.
    auto rv = v;
    for (auto& row : rv) {
      const double k = scale(rng);
      for (auto& x : row) x *= k;
    }
    worst_scale = std::max({worst_scale,
                            std::abs(losses::selfcl_loss_v(to_tensor(rv), to_tensor(a), 0.1).item() - sv),
                            std::abs(losses::selfcl_loss_a(to_tensor(a), to_tensor(rv), 0.1).item() - sa)});

    // Column scaling leaves C unchanged.
    auto cv = v;
    for (std::size_t j = 0; j < d; ++j) {
      const double k = scale(rng);
      for (auto& row : cv) row[j] *= k;
    }
    const auto c1 = losses::cross_correlation(to_tensor(cv), to_tensor(a));
    for (std::size_t i = 0; i < c0.numel(); ++i)
      worst_col = std::max(worst_col, std::abs(c1.at(i) - c0.at(i)));

    // Joint batch permutation leaves every loss unchanged.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    oracle::Rows pv, pa;
    for (auto p : perm) pv.push_back(v[p]), pa.push_back(a[p]);
    worst_perm = std::max(
        worst_perm,
        std::abs(losses::total_loss(to_tensor(pv), to_tensor(pa), {}).total.item() - total0));

    // cgra_loss is zero at I and positive away from it.
    if (losses::cgra_loss(Tensor::identity(d), 0.005).item() != 0.0) identity_ok = false;
    const double l0 = losses::cgra_loss(c0, 0.005).item();
    if (!(l0 > 0.0)) identity_ok = false;

    for (double x : c0.data()) worst_bound = std::max(worst_bound, std::abs(x) - 1.0);
  }
  if (worst_scale >= kInvariantTolerance) ++failures;
  if (worst_col >= kInvariantTolerance) ++failures;
  if (worst_perm >= 1e-10) ++failures;
  if (!identity_ok) ++failures;
  if (worst_bound > 1e-9) ++failures;
  report("loss invariants", failures == 0,
         fmt("%d instances each: selfcl_scale=%.1e corr_col_scale=%.1e permutation=%.1e "
             "cgra(I)=0 %s, max|C|-1=%.1e",
             kInvariantInstances, worst_scale, worst_col, worst_perm,
             identity_ok ? "ok" : "VIOLATED", worst_bound));
}

void dsp_fidelity() {
  const auto t0 = Clock::now();
  std::string tones;
  bool all_match = true;
  for (double hz : {250.0, 500.0, 1000.0, 2000.0, 4000.0}) {
    audio::Waveform w;
    w.samples = oracle::tone(hz, 1.0);
    const auto m = audio::process(w).values;
    std::size_t got = 0;
    for (std::size_t r = 1; r < m.rows; ++r)
      if (m(r, 128) > m(got, 128)) got = r;
    const auto want = oracle::argmax(oracle::tone_column(hz, 1.0, 128));
    all_match = all_match && got == want;
    tones += fmt(" %g:%zu/%zu", hz, got, want);
  }
  audio::Waveform silence;
  silence.sample_rate = 44100;
  silence.channels = 2;
  silence.samples.assign(2 * 44100, 0.0);
  const auto z = audio::process(silence).values;
  const bool zero = std::all_of(z.values.begin(), z.values.end(), [](double v) { return v == 0.0; });

  audio::Waveform mix;
  mix.sample_rate = 48000;
  for (int i = 0; i < 48000; ++i)
    mix.samples.push_back(0.3 * std::sin(0.05 * i) + 0.2 * std::sin(0.31 * i));
  const auto p1 = audio::process(mix).values, p2 = audio::process(mix).values;
  const bool det = p1.values.size() == p2.values.size() &&
                   std::memcmp(p1.values.data(), p2.values.data(),
                               p1.values.size() * sizeof(double)) == 0;
  const double dt = seconds_since(t0);
  report("DSP fidelity", all_match && zero && det && dt < kDspBudgetSeconds,
         fmt("argmax band got/oracle%s; silence_zero=%s; bit_deterministic=%s; runtime=%.2fs "
             "(< %.0fs)",
             tones.c_str(), zero ? "yes" : "no", det ? "yes" : "no", dt, kDspBudgetSeconds));
}

struct SeedRun {
  std::uint64_t seed;
  ablate::RunResult result;
  probe::ProbeResult random;
};

std::vector<SeedRun> end_to_end() {
  const auto t0 = Clock::now();
  std::vector<SeedRun> runs;
  bool acc_ok = true, gap_ok = true, descent_ok = true;
  std::string detail;
  for (auto seed : kSeeds) {
    config::RunConfig cfg;
    cfg.set_seed(seed);
    const auto data = ablate::prepare_data(cfg, worker_threads());
    auto r = ablate::pretrain_and_probe(cfg, data);
    const auto rnd = ablate::random_encoder_probe(cfg, data);
    const double acc = r.probe.test_accuracy;
    const double gap = acc - rnd.test_accuracy;
    const double e1 = r.pretrain.metrics.at(0).total, e50 = r.pretrain.metrics.at(49).total;
    acc_ok = acc_ok && acc >= kMinAccuracy;
    gap_ok = gap_ok && gap >= kMinGapOverRandom;
    descent_ok = descent_ok && e50 < kDescentRatio * e1;
    detail += fmt(" seed%llu: acc=%.3f random=%.3f gap=%+.3f loss e1=%.2f e50=%.2f;",
                  static_cast<unsigned long long>(seed), acc, rnd.test_accuracy, gap, e1, e50);
    runs.push_back({seed, std::move(r), rnd});
  }
  const double dt = seconds_since(t0);
  const bool time_ok = dt < kLearningBudgetSeconds;
  report("end-to-end learning", acc_ok && gap_ok && time_ok,
         fmt("acc>=%.2f %s, gap>=%.2f %s, descent(e50<%.1f*e1) %s, runtime=%.0fs (< %.0fs);",
             kMinAccuracy, acc_ok ? "ok" : "MISSED", kMinGapOverRandom, gap_ok ? "ok" : "MISSED",
             kDescentRatio, descent_ok ? "ok" : "MISSED", dt, kLearningBudgetSeconds) +
             detail);
  return runs;
}

void directional_ablations() {
  const auto t0 = Clock::now();
  config::RunConfig cfg;
  cfg.set_seed(kSeeds.front());
  cfg.ablate.seeds = static_cast<int>(kSeeds.size());
  cfg.ablate.axes = {"amfm", "cgra", "selfcl", "lambda_sweep"};
  const auto rep = ablate::run(cfg, worker_threads());
  auto find = [&rep](const std::string& name) -> const ablate::Summary* {
    for (const auto& s : rep.summary)
      if (s.variant == name) return &s;
    return nullptr;
  };
  const auto* full = find("full");
  bool ok = full != nullptr;
  std::string detail;
  if (full) detail += fmt(" full=%.3f+-%.3f", full->mean, full->sd);
  for (const char* v : {"amfm_off", "cgra_off", "selfcl_off"}) {
    const auto* s = find(v);
    if (!s || !full) {
      ok = false;
      continue;
    }
    const double pooled = std::sqrt(0.5 * (full->sd * full->sd + s->sd * s->sd));
    const bool dir = full->mean >= s->mean - pooled;
    ok = ok && dir;
    detail += fmt(" %s=%.3f+-%.3f(%s)", v, s->mean, s->sd, dir ? "ok" : "VIOLATED");
  }
  int sweep = 0;
  for (const auto& [c, s] : ablate::kLambdaSweep) {
    const auto name = fmt("lambda_%.1f_%.1f", c, s);
    std::size_t rows = 0;
    for (const auto& r : rep.rows) rows += r.variant == name;
    if (find(name) && rows == kSeeds.size()) ++sweep;
  }
  ok = ok && sweep == 5;
  detail += fmt(" lambda_sweep_configs=%d/5 rows=%zu runtime=%.0fs", sweep, rep.rows.size(),
                seconds_since(t0));
  report("directional ablations", ok, detail);
}

void persistence(const std::vector<SeedRun>& runs) {
  // Tensor file round trip.
  const auto dir = fs::temp_directory_path() / "avcl_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> v(6 * 7);
  for (auto& x : v) x = g(rng) * 1e-3;
  v[0] = -0.0;
  v[1] = 5e-324;
  const auto t = Tensor::from_data({6, 7}, v);
  save_tensor(dir / "t.tensor", t);
  const auto back = load_tensor(dir / "t.tensor");
  const bool tensor_ok = back.shape() == t.shape() &&
                         std::memcmp(back.data().data(), t.data().data(), v.size() * 8) == 0;

  // Checkpoint round trip reproduces the probe exactly.
  bool ckpt_ok = !runs.empty();
  std::string detail;
  if (!runs.empty()) {
    const auto& run = runs.front();
    config::RunConfig cfg;
    cfg.set_seed(run.seed);
    const auto data = ablate::prepare_data(cfg, worker_threads());
    checkpoint::save(dir / "ckpt", run.result.pretrain.best, config::to_json(cfg),
                     config::config_hash(cfg));
    const auto loaded = checkpoint::load(dir / "ckpt");
    const auto again = probe::linear_probe(loaded.model, data.train, data.val, data.test,
                                           data.n_classes, cfg.data.pooling, cfg.probe);
    ckpt_ok = again.test_accuracy == run.result.probe.test_accuracy &&
              again.val_accuracy == run.result.probe.val_accuracy;
    detail = fmt(" probe before=%.17g after=%.17g", run.result.probe.test_accuracy,
                 again.test_accuracy);
  }
  report("persistence", tensor_ok && ckpt_ok,
         fmt("tensor_file_bit_exact=%s checkpoint_probe_exact=%s;", tensor_ok ? "yes" : "no",
             ckpt_ok ? "yes" : "no") +
             detail);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<const char*, std::function<void()>>> cheap{
      {"gradient suite", gradient_suite},
      {"loss oracles", loss_oracles},
      {"loss invariants", loss_invariants},
      {"DSP fidelity", dsp_fidelity}};
  for (const auto& [name, fn] : cheap) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(name, false, std::string("exception: ") + e.what());
    }
  }
  std::vector<SeedRun> runs;
  try {
    runs = end_to_end();
  } catch (const std::exception& e) {
    report("end-to-end learning", false, std::string("exception: ") + e.what());
  }
  try {
    directional_ablations();
  } catch (const std::exception& e) {
    report("directional ablations", false, std::string("exception: ") + e.what());
  }
  try {
    persistence(runs);
  } catch (const std::exception& e) {
    report("persistence", false, std::string("exception: ") + e.what());
  }
  const auto failed = std::count_if(g_lines.begin(), g_lines.end(), [](const Line& l) { return !l.pass; });
  std::printf("acceptance: %zu passed, %td failed, %.0fs\n", g_lines.size() - failed, failed,
              seconds_since(t0));
  return failed == 0 ? 0 : 1;
}
