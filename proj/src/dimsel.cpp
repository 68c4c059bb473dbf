#include "semifit/dimsel.hpp"

#include "semifit/estimator.hpp"
#include "semifit/parallel.hpp"

#include <optional>
#include <random>

namespace semifit {

namespace {

Eigen::LLT<MatrixXd> checked_llt(const MatrixXd& s, const char* which) {
  Eigen::LLT<MatrixXd> llt(s);
  const double scale = std::max(1.0, s.diagonal().cwiseAbs().maxCoeff());
  if (llt.info() != Eigen::Success ||
      !(llt.matrixLLT().diagonal().cwiseAbs2().minCoeff() > 1e-12 * scale)) {
    throw Error(ErrorCode::SingularVariance, std::string("singular variance of ") + which);
  }
  return llt;
}

}  // namespace

double trace_correlation(const MatrixXd& u, const MatrixXd& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols() || u.cols() < 1) {
    throw Error(ErrorCode::ShapeMismatch, "trace_correlation: U and V must both be n x k");
  }
  if (u.rows() < 2) throw Error(ErrorCode::InvalidArgument, "trace_correlation: need n >= 2");
  const double denom = static_cast<double>(u.rows() - 1);
  const MatrixXd uc = u.rowwise() - u.colwise().mean();
  const MatrixXd vc = v.rowwise() - v.colwise().mean();
  const MatrixXd suu = uc.transpose() * uc / denom;
  const MatrixXd svv = vc.transpose() * vc / denom;
  const MatrixXd suv = uc.transpose() * vc / denom;

  const auto lu = checked_llt(suu, "U");
  const auto lv = checked_llt(svv, "V");
  // trace(Suu^-1 Suv Svv^-1 Svu) equals the trace of the symmetric form
  // L_u^-1 Suv Svv^-1 Svu L_u^-T.
  const MatrixXd a = lu.matrixL().solve(suv);
  const MatrixXd b = lv.matrixL().solve(a.transpose());
  return b.squaredNorm() / static_cast<double>(u.cols());
}

DimSelResult select_dimension(const Dataset& data, const FitConfig& config, int k_max, int B) {
  if (k_max < 1 || k_max >= data.q()) {
    throw Error(ErrorCode::InvalidArgument, "k_max must satisfy 1 <= k_max < q");
  }
  if (B < 2) throw Error(ErrorCode::InvalidArgument, "B must be >= 2");

  const std::size_t per_k = static_cast<std::size_t>(B) + 1;
  const std::size_t jobs = static_cast<std::size_t>(k_max) * per_k;
  std::vector<std::optional<MatrixXd>> directions(jobs);
  std::vector<std::string> errors(jobs);

  parallel_for(jobs, [&](std::size_t job) {
    const int k = static_cast<int>(job / per_k) + 1;
    const std::size_t b = job % per_k;  // 0 is the full sample
    FitConfig cfg = config;
    cfg.d = k;
    cfg.bandwidth_override.reset();
    cfg.seed = derive_seed(config.seed, job);
    try {
      if (b == 0) {
        directions[job] = fit(data, cfg).raw_params().gamma;
        return;
      }
      std::mt19937_64 rng(cfg.seed);
      std::uniform_int_distribution<Index> pick(0, data.n() - 1);
      std::vector<Index> rows(static_cast<std::size_t>(data.n()));
      for (auto& r : rows) r = pick(rng);
      directions[job] = fit(data.rows(rows), cfg).raw_params().gamma;
    } catch (const Error& e) {
      errors[job] = e.what();
    }
  });

  DimSelResult result;
  result.scores = VectorXd::Zero(k_max);
  for (int k = 1; k <= k_max; ++k) {
    const std::size_t base = static_cast<std::size_t>(k - 1) * per_k;
    if (!directions[base]) {
      throw Error(ErrorCode::DimSelFailed,
                  "full-sample fit failed at k = " + std::to_string(k) + ": " + errors[base]);
    }
    const MatrixXd u = data.x_uint() * *directions[base];
    double sum = 0.0;
    int used = 0;
    for (int b = 1; b <= B; ++b) {
      const std::size_t job = base + static_cast<std::size_t>(b);
      if (directions[job]) {
        try {
          sum += trace_correlation(u, data.x_uint() * *directions[job]);
          ++used;
          continue;
        } catch (const Error& e) {
          errors[job] = e.what();
        }
      }
      result.failures.push_back("k=" + std::to_string(k) + " b=" + std::to_string(b) + ": " +
                                errors[job]);
    }
    if (2 * (B - used) > B) {
      throw Error(ErrorCode::DimSelFailed,
                  std::to_string(B - used) + " of " + std::to_string(B) +
                      " bootstrap fits failed at k = " + std::to_string(k));
    }
    result.scores[k - 1] = sum / used;
  }
  Index best = 0;
  for (Index k = 1; k < result.scores.size(); ++k) {
    if (result.scores[k] > result.scores[best]) best = k;
  }
  result.d_hat = static_cast<int>(best) + 1;
  return result;
}

}  // namespace semifit
