#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "avcl/grad_check.hpp"

namespace avcl::gradcheck {

inline constexpr double kTolerance = 1e-4;
inline constexpr double kEps = 1e-5;

// One named check: builds fresh random inputs from `seed` and grad-checks a
// scalar function of them.
struct Check {
  std::string name;
  std::function<GradCheckResult(std::uint64_t seed)> run;
};

struct CheckReport {
  std::string name;
  double max_relative_error = 0.0;  // worst over all seeds
  std::uint64_t worst_seed = 0;
  bool passed = false;
};

// Every differentiable op, the fusion block, each loss and the full weighted
// loss through a small model.
std::vector<Check> default_checks();

// A check whose gradient is wrong on purpose (value and gradient disagree),
// for exercising the failure path.
Check broken_check();

std::vector<CheckReport> run_checks(const std::vector<Check>& checks, int seeds,
                                    unsigned threads = 1);

bool all_passed(const std::vector<CheckReport>& reports);

}  // namespace avcl::gradcheck
