#pragma once

// Self-check suite run by `edgefl verify`: each check compares a library
// routine against an independent reference (bisection, brute-force grid,
// finite differences) or checks a structural property on a short simulation.

#include <cstdint>
#include <string>
#include <vector>

#include "edgefl/config.hpp"

namespace edgefl {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t lambert_samples = 100000;
  std::size_t power_instances = 1000;
  std::size_t power_grid = 20000;
  std::uint64_t sim_rounds = 2000;
};

// `base` supplies topology, channel and objective settings for the
// simulation-level checks.
std::vector<CheckResult> run_verification(const SimConfig& base, const VerifyOptions& options);

}  // namespace edgefl
