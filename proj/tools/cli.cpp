#include "cli.hpp"

#include "semifit/benchmark.hpp"
#include "semifit/dimsel.hpp"
#include "semifit/estimator.hpp"
#include "semifit/io.hpp"
#include "semifit/predict.hpp"
#include "semifit/sim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace semifit::cli {

namespace {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DependentColumns:
    case ErrorCode::DegenerateColumn:
    case ErrorCode::NumericalUnderflow:
      return kExitOptimizer;
    case ErrorCode::DimSelFailed:
      return kExitFailure;
    default:
      return kExitValidation;
  }
}

struct RoleFlags {
  std::string data;
  std::string roles_file;
  std::string outcome;
  std::vector<std::string> int_cols;
  std::vector<std::string> uint_cols;
  std::vector<std::string> ignore;

  void add(CLI::App* app, bool with_outcome) {
    app->add_option("--data", data, "input CSV (header row, comma-delimited)")->required();
    app->add_option("--roles", roles_file, "JSON role map {outcome, int, uint, ignore}");
    if (with_outcome) app->add_option("--outcome", outcome, "outcome column");
    app->add_option("--int", int_cols, "interpretable columns")->delimiter(',');
    app->add_option("--uint", uint_cols, "uninterpretable columns")->delimiter(',');
    app->add_option("--ignore", ignore, "columns to ignore")->delimiter(',');
  }

  RoleMap resolve(const CsvTable& table) const {
    RoleMap roles = RoleMap::defaults_for(table);
    if (!roles_file.empty()) {
      std::ifstream in(roles_file);
      if (!in) throw Error(ErrorCode::Io, "cannot open " + roles_file);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("role map: ") + e.what());
      }
      roles = RoleMap::from_json(j);
    }
    if (!outcome.empty()) roles.outcome = outcome;
    if (!int_cols.empty()) roles.int_cols = int_cols;
    if (!uint_cols.empty()) roles.uint_cols = uint_cols;
    if (!ignore.empty()) roles.ignore = ignore;
    return roles;
  }
};

struct FitFlags {
  double delta = 0.2;
  int dim = 2;
  std::uint64_t seed = 0;
  int max_evals = 20000;
  int restarts = 3;
  double x_tol = 1e-8;
  double f_tol = 1e-8;
  std::vector<double> bandwidth;

  void add(CLI::App* app, bool with_dim = true) {
    app->add_option("--delta", delta, "box radius for psi around its OLS start")
        ->capture_default_str();
    if (with_dim) app->add_option("--dim", dim, "structural dimension d")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--max-evals", max_evals, "objective evaluation budget")
        ->capture_default_str();
    app->add_option("--restarts", restarts, "perturbed restarts")->capture_default_str();
    app->add_option("--x-tol", x_tol, "simplex size tolerance")->capture_default_str();
    app->add_option("--f-tol", f_tol, "simplex value tolerance")->capture_default_str();
    app->add_option("--bandwidth", bandwidth, "fixed kernel bandwidths (d values)")
        ->delimiter(',');
  }

  FitConfig config() const {
    FitConfig c;
    c.d = dim;
    c.delta = delta;
    c.seed = seed;
    c.optimizer = {max_evals, restarts, x_tol, f_tol};
    if (!bandwidth.empty()) {
      c.bandwidth_override = Eigen::Map<const VectorXd>(bandwidth.data(),
                                                        static_cast<Index>(bandwidth.size()));
    }
    return c;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"semifit: interpretable semiparametric regression"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "write a simulated dataset and its truth");
  std::string sim_case = "I";
  SimSpec sim_spec;
  std::string sim_out;
  std::string sim_truth;
  sim_cmd->add_option("--case", sim_case, "covariate design I or II")->capture_default_str();
  sim_cmd->add_option("--model", sim_spec.model, "outcome model 1..4")->capture_default_str();
  sim_cmd->add_option("--n", sim_spec.n, "rows")->capture_default_str();
  sim_cmd->add_option("--seed", sim_spec.seed, "random seed")->capture_default_str();
  sim_cmd->add_flag("--noiseless", sim_spec.noiseless, "force outcome noise to zero");
  sim_cmd->add_option("--out", sim_out, "output CSV")->required();
  sim_cmd->add_option("--truth", sim_truth, "output truth JSON");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a model from CSV");
  RoleFlags fit_roles;
  FitFlags fit_flags;
  std::string fit_out;
  fit_roles.add(fit_cmd, true);
  fit_flags.add(fit_cmd);
  fit_cmd->add_option("--out", fit_out, "output model JSON")->required();

  // predict
  auto* pred_cmd = app.add_subcommand("predict", "predict from a model JSON");
  RoleFlags pred_roles;
  std::string pred_model;
  std::string pred_out;
  pred_roles.add(pred_cmd, false);
  pred_cmd->add_option("--model", pred_model, "model JSON")->required();
  pred_cmd->add_option("--out", pred_out, "output CSV (default: stdout)");

  // select-dim
  auto* dim_cmd = app.add_subcommand("select-dim", "bootstrap choice of the structural dimension");
  RoleFlags dim_roles;
  FitFlags dim_flags;
  int k_max = 3;
  int boot = 10;
  dim_roles.add(dim_cmd, true);
  dim_flags.add(dim_cmd, false);
  dim_cmd->add_option("--k-max", k_max, "largest candidate dimension")->capture_default_str();
  dim_cmd->add_option("--B", boot, "bootstrap resamples per dimension")->capture_default_str();

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark", "replicated simulation benchmark");
  std::string bench_case = "I";
  BenchmarkConfig bench;
  FitFlags bench_flags;
  std::string bench_json;
  bench_cmd->add_option("--case", bench_case, "covariate design I or II")->capture_default_str();
  bench_cmd->add_option("--model", bench.model, "outcome model 1..4")->capture_default_str();
  bench_cmd->add_option("--n", bench.n, "rows per replicate")->capture_default_str();
  bench_cmd->add_option("--replicates", bench.replicates, "replicates")->capture_default_str();
  bench_flags.add(bench_cmd);
  bench_cmd->add_option("--json", bench_json, "write the machine-readable report here");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("semifit");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*sim_cmd) {
      sim_spec.sim_case = parse_case(sim_case);
      const Simulated sim = generate(sim_spec);
      const Dataset& d = sim.data;
      std::vector<std::string> header{"y"};
      header.insert(header.end(), d.names_int().begin(), d.names_int().end());
      header.insert(header.end(), d.names_uint().begin(), d.names_uint().end());
      MatrixXd values(d.n(), 1 + d.p() + d.q());
      values << d.y(), d.x_int(), d.x_uint();
      write_csv_file(sim_out, header, values);
      if (!sim_truth.empty()) {
        json t = params_to_json(sim.truth);
        t["format"] = "semifit-truth/1";
        t["case"] = to_string(sim_spec.sim_case);
        t["model"] = sim_spec.model;
        t["n"] = sim_spec.n;
        t["seed"] = sim_spec.seed;
        t["noiseless"] = sim_spec.noiseless;
        t["roles"] = json{{"outcome", "y"}, {"int", d.names_int()}, {"uint", d.names_uint()}};
        write_json(t, sim_truth);
      }
      out << "wrote " << d.n() << " rows to " << sim_out << '\n';
      return kExitOk;
    }

    if (*fit_cmd) {
      const CsvTable table = read_csv_file(fit_roles.data);
      const Dataset data = dataset_from_table(table, fit_roles.resolve(table));
      const FitConfig config = fit_flags.config();
      config.validate(data.q());
      const FittedModel model = fit(data, config);
      save_model(model, fit_out);
      out << "objective: " << fmt(model.objective_value) << '\n';
      out << "initial objective: " << fmt(model.initial_objective) << '\n';
      out << "max |psi - psi_init|: "
          << fmt((model.params.psi - model.psi_init).cwiseAbs().maxCoeff()) << '\n';
      out << "gamma orthonormality residual: "
          << fmt(orthonormality_residual(model.params.gamma)) << '\n';
      out << "evaluations: " << model.evaluations << '\n';
      if (!model.converged) {
        out << "warning: optimizer stalled (evaluation budget reached before tolerance)\n";
      }
      out << "wrote " << fit_out << '\n';
      return kExitOk;
    }

    if (*pred_cmd) {
      const FittedModel model = load_model(pred_model);
      const CsvTable table = read_csv_file(pred_roles.data);
      std::vector<std::string> int_names = model.names_int;
      std::vector<std::string> uint_names = model.names_uint;
      if (int_names.empty() || uint_names.empty() || !pred_roles.int_cols.empty() ||
          !pred_roles.uint_cols.empty() || !pred_roles.roles_file.empty()) {
        const RoleMap roles = pred_roles.resolve(table);
        int_names = roles.int_cols;
        uint_names = roles.uint_cols;
      }
      if (static_cast<Index>(int_names.size()) != model.p() ||
          static_cast<Index>(uint_names.size()) != model.q()) {
        throw Error(ErrorCode::ShapeMismatch,
                    "model expects " + std::to_string(model.p()) + " interpretable and " +
                        std::to_string(model.q()) + " uninterpretable columns, got " +
                        std::to_string(int_names.size()) + " and " +
                        std::to_string(uint_names.size()));
      }
      const Decomposition dec = decompose(model, columns_by_name(table, int_names),
                                          columns_by_name(table, uint_names));
      MatrixXd values(dec.h_part.size(), 4);
      for (Index i = 0; i < values.rows(); ++i) values(i, 0) = static_cast<double>(i);
      values.col(1) = dec.h_part;
      values.col(2) = dec.r_part;
      values.col(3) = dec.prediction();
      const std::vector<std::string> header{"row_id", "h_part", "r_part", "prediction"};
      if (pred_out.empty()) {
        write_csv(out, header, values);
      } else {
        write_csv_file(pred_out, header, values);
      }
      return kExitOk;
    }

    if (*dim_cmd) {
      const CsvTable table = read_csv_file(dim_roles.data);
      const Dataset data = dataset_from_table(table, dim_roles.resolve(table));
      FitConfig config = dim_flags.config();
      config.d = 1;
      config.validate(data.q());
      const DimSelResult res = select_dimension(data, config, k_max, boot);
      out << "k  r2\n";
      for (Index k = 0; k < res.scores.size(); ++k) {
        char line[64];
        std::snprintf(line, sizeof(line), "%lld  %.4f\n", static_cast<long long>(k + 1),
                      res.scores[k]);
        out << line;
      }
      out << "chosen d = " << res.d_hat << '\n';
      for (const auto& f : res.failures) err << "skipped bootstrap " << f << '\n';
      return kExitOk;
    }

    if (*bench_cmd) {
      bench.sim_case = parse_case(bench_case);
      bench.seed = bench_flags.seed;
      bench.fit = bench_flags.config();
      SimSpec{bench.sim_case, bench.model, bench.n, bench.seed}.validate();
      const BenchmarkReport report = run_benchmark(bench);
      out << format_report(report);
      if (!bench_json.empty()) write_json(report_to_json(report), bench_json);
      return report.failed == bench.replicates ? kExitFailure : kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitValidation;
}

}  // namespace semifit::cli
