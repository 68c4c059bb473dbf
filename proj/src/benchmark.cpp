#include "semifit/benchmark.hpp"

#include "semifit/estimator.hpp"
#include "semifit/init.hpp"
#include "semifit/metrics.hpp"
#include "semifit/parallel.hpp"
#include "semifit/predict.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace semifit {

using nlohmann::json;

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

namespace {

std::vector<Index> range(Index begin, Index end) {
  std::vector<Index> out(static_cast<std::size_t>(end - begin));
  std::iota(out.begin(), out.end(), begin);
  return out;
}

MatrixXd all_features(const Dataset& d) {
  MatrixXd x(d.n(), d.p() + d.q());
  x << d.x_int(), d.x_uint();
  return x;
}

}  // namespace

ReplicateResult run_replicate(const BenchmarkConfig& config, int index) {
  ReplicateResult r;
  r.index = index;
  r.seed = derive_seed(config.seed, static_cast<std::uint64_t>(index));
  try {
    const Simulated sim = generate({config.sim_case, config.model, config.n, r.seed});
    const Index n_train = static_cast<Index>(std::llround(0.70 * static_cast<double>(config.n)));
    const Index n_val = static_cast<Index>(std::llround(0.15 * static_cast<double>(config.n)));
    const auto train_rows = range(0, n_train);
    const auto val_rows = range(n_train, n_train + n_val);
    const auto test_rows = range(n_train + n_val, config.n);
    if (test_rows.empty() || val_rows.empty()) {
      throw Error(ErrorCode::InvalidArgument, "n too small for a 70/15/15 split");
    }
    const Dataset train = sim.data.rows(train_rows);
    const Dataset val = sim.data.rows(val_rows);
    const Dataset test = sim.data.rows(test_rows);

    FitConfig fc = config.fit;
    fc.seed = r.seed;
    const FittedModel model = fit(train, fc);
    const VectorXd ols = ols_fit(all_features(train), train.y(), true);

    r.rmse_iml = rmse(predict(model, test.x_int(), test.x_uint()), test.y());
    r.rmse_ols = rmse(ols_predict(all_features(test), ols, true), test.y());
    r.val_rmse_iml = rmse(predict(model, val.x_int(), val.x_uint()), val.y());
    r.val_rmse_ols = rmse(ols_predict(all_features(val), ols, true), val.y());

    const Params raw = model.raw_params();
    const MatrixXd truth_gamma = true_gamma();
    if (raw.gamma.cols() == truth_gamma.cols()) {
      r.proj_dist_gamma = projection_distance(raw.gamma, truth_gamma);
    } else {
      r.proj_dist_gamma = std::nan("");
    }
    r.proj_dist_psi = projection_distance(raw.psi, true_psi());
    r.objective = model.objective_value;
    r.initial_objective = model.initial_objective;
    r.evaluations = model.evaluations;
    r.converged = model.converged;
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  if (config.replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
  config.fit.validate(6);
  BenchmarkReport report;
  report.config = config;
  report.replicates.resize(static_cast<std::size_t>(config.replicates));
  parallel_for(report.replicates.size(), [&](std::size_t i) {
    report.replicates[i] = run_replicate(config, static_cast<int>(i));
  });

  std::vector<double> iml, ols, pg, pp;
  for (const auto& r : report.replicates) {
    if (!r.ok) {
      ++report.failed;
      continue;
    }
    iml.push_back(r.rmse_iml);
    ols.push_back(r.rmse_ols);
    if (std::isfinite(r.proj_dist_gamma)) pg.push_back(r.proj_dist_gamma);
    pp.push_back(r.proj_dist_psi);
  }
  report.iml = mean_sd(iml);
  report.ols = mean_sd(ols);
  report.median_proj_dist_gamma = median(pg);
  report.median_proj_dist_psi = median(pp);
  return report;
}

json report_to_json(const BenchmarkReport& report) {
  const auto& c = report.config;
  json j;
  j["format"] = "semifit-benchmark/1";
  j["config"] = json{{"case", to_string(c.sim_case)},
                     {"model", c.model},
                     {"n", c.n},
                     {"replicates", c.replicates},
                     {"seed", c.seed},
                     {"delta", c.fit.delta},
                     {"dim", c.fit.d},
                     {"max_evals", c.fit.optimizer.max_evals},
                     {"restarts", c.fit.optimizer.restarts},
                     {"split", json::array({0.70, 0.15, 0.15})}};
  json reps = json::array();
  for (const auto& r : report.replicates) {
    json e{{"index", r.index}, {"seed", r.seed}, {"ok", r.ok}};
    if (r.ok) {
      e["rmse_iml"] = r.rmse_iml;
      e["rmse_ols"] = r.rmse_ols;
      e["val_rmse_iml"] = r.val_rmse_iml;
      e["val_rmse_ols"] = r.val_rmse_ols;
      e["proj_dist_gamma"] = std::isfinite(r.proj_dist_gamma) ? json(r.proj_dist_gamma) : json(nullptr);
      e["proj_dist_psi"] = r.proj_dist_psi;
      e["objective"] = r.objective;
      e["initial_objective"] = r.initial_objective;
      e["evaluations"] = r.evaluations;
      e["converged"] = r.converged;
    } else {
      e["error"] = r.error;
    }
    reps.push_back(std::move(e));
  }
  j["per_replicate"] = std::move(reps);
  j["summary"] = json{{"rmse_iml", {{"mean", report.iml.mean}, {"sd", report.iml.sd}}},
                      {"rmse_ols", {{"mean", report.ols.mean}, {"sd", report.ols.sd}}},
                      {"median_proj_dist_gamma", report.median_proj_dist_gamma},
                      {"median_proj_dist_psi", report.median_proj_dist_psi},
                      {"failed", report.failed}};
  // Slots for baselines computed outside this tool (e.g. additive models).
  j["external_baselines"] = json::object();
  return j;
}

std::string format_report(const BenchmarkReport& report) {
  const auto& c = report.config;
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "case %s  model %d  n %lld  replicates %d  seed %llu\n",
                to_string(c.sim_case).c_str(), c.model, static_cast<long long>(c.n),
                c.replicates, static_cast<unsigned long long>(c.seed));
  os << line;
  os << "rep   rmse_iml   rmse_ols   pd_gamma     pd_psi\n";
  for (const auto& r : report.replicates) {
    if (!r.ok) {
      std::snprintf(line, sizeof(line), "%3d   failed: %s\n", r.index, r.error.c_str());
    } else {
      std::snprintf(line, sizeof(line), "%3d %10.3f %10.3f %10.3f %10.3f\n", r.index, r.rmse_iml,
                    r.rmse_ols, r.proj_dist_gamma, r.proj_dist_psi);
    }
    os << line;
  }
  os << "method   mean RMSE (sd)\n";
  std::snprintf(line, sizeof(line), "IML      %.3f (%.3f)\n", report.iml.mean, report.iml.sd);
  os << line;
  std::snprintf(line, sizeof(line), "OLS      %.3f (%.3f)\n", report.ols.mean, report.ols.sd);
  os << line;
  std::snprintf(line, sizeof(line), "median projection distance: gamma %.3f  psi %.3f\n",
                report.median_proj_dist_gamma, report.median_proj_dist_psi);
  os << line;
  if (report.failed > 0) os << report.failed << " replicate(s) failed\n";
  return os.str();
}

}  // namespace semifit
