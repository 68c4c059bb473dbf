#pragma once

// Replicated simulation benchmark: fresh data per replicate, 70/15/15
// train/validation/test split, semiparametric fit against the least-squares
// baseline.

#include "semifit/core.hpp"
#include "semifit/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semifit {

struct BenchmarkConfig {
  SimCase sim_case = SimCase::I;
  int model = 1;
  Index n = 2000;
  int replicates = 5;
  std::uint64_t seed = 0;
  FitConfig fit;
};

struct ReplicateResult {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double rmse_iml = 0.0;
  double rmse_ols = 0.0;
  double val_rmse_iml = 0.0;
  double val_rmse_ols = 0.0;
  double proj_dist_gamma = 0.0;
  double proj_dist_psi = 0.0;
  double objective = 0.0;
  double initial_objective = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<ReplicateResult> replicates;
  MeanSd iml;
  MeanSd ols;
  double median_proj_dist_gamma = 0.0;
  double median_proj_dist_psi = 0.0;
  int failed = 0;
};

/// Sample mean and (n - 1) standard deviation; sd is 0 for a single value.
MeanSd mean_sd(const std::vector<double>& values);
double median(std::vector<double> values);

ReplicateResult run_replicate(const BenchmarkConfig& config, int index);
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

nlohmann::json report_to_json(const BenchmarkReport& report);
std::string format_report(const BenchmarkReport& report);

}  // namespace semifit
