#include "semifit/estimator.hpp"

#include "semifit/init.hpp"
#include "semifit/kernel.hpp"
#include "semifit/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace semifit {

VectorXd FreeVector::flatten() const {
  VectorXd out(u_psi.size() + u_gamma.size());
  out.head(u_psi.size()) = u_psi;
  out.tail(u_gamma.size()) = u_gamma.reshaped();
  return out;
}

FreeVector FreeVector::unflatten(const VectorXd& flat, Index p, Index q, Index d) {
  if (flat.size() != p + q * d) throw Error(ErrorCode::ShapeMismatch, "free vector length");
  FreeVector f;
  f.u_psi = flat.head(p);
  f.u_gamma = flat.tail(q * d).reshaped(q, d);
  return f;
}

VectorXd a_function(const VectorXd& x_int, const VectorXd& x_uint, int d) {
  const Index p = x_int.size();
  const Index q = x_uint.size();
  VectorXd out(p + q * d);
  out.head(p) = x_int;
  VectorXd power = x_uint;
  for (int k = 0; k < d; ++k) {
    out.segment(p + k * q, q) = power;
    power.array() *= x_uint.array();
  }
  return out;
}

MatrixXd a_matrix(const MatrixXd& x_int, const MatrixXd& x_uint, int d, AChoice choice) {
  switch (choice) {
    case AChoice::PolynomialTile:
      break;
  }
  const Index p = x_int.cols();
  const Index q = x_uint.cols();
  MatrixXd out(x_int.rows(), p + q * d);
  out.leftCols(p) = x_int;
  MatrixXd power = x_uint;
  for (int k = 0; k < d; ++k) {
    out.middleCols(p + k * q, q) = power;
    power.array() *= x_uint.array();
  }
  return out;
}

MatrixXd reparam_gamma(const MatrixXd& u_gamma, std::uint64_t seed) {
  constexpr double kPivot = 1e-12;
  auto gs = gram_schmidt(u_gamma, kPivot);
  if (!gs.ok()) {
    MatrixXd perturbed = u_gamma;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Index bad = gs.failed_column;
    const double scale = 1e-6 * std::max(1.0, u_gamma.cwiseAbs().maxCoeff());
    for (Index i = 0; i < perturbed.rows(); ++i) perturbed(i, bad) += scale * normal(rng);
    gs = gram_schmidt(perturbed, kPivot);
    if (!gs.ok()) {
      throw Error(ErrorCode::DependentColumns,
                  "gamma column " + std::to_string(gs.failed_column) +
                      " is linearly dependent on the previous ones");
    }
  }
  normalize_column_signs(gs.q);
  return std::move(gs.q);
}

VectorXd reparam_psi(const VectorXd& u_psi, const VectorXd& psi_init, double delta) {
  if (u_psi.size() != psi_init.size()) throw Error(ErrorCode::ShapeMismatch, "psi chart size");
  if (delta == 0.0) return psi_init;
  // tanh saturates to exactly 1 in double precision; keep the box open.
  constexpr double kOpen = 1.0 - 1e-12;
  return psi_init.array() + delta * u_psi.array().tanh().cwiseMax(-kOpen).cwiseMin(kOpen);
}

EstimatingEquation::EstimatingEquation(Dataset data, int d, AChoice choice)
    : data_(std::move(data)), d_(d) {
  if (d < 1 || d >= data_.q()) throw Error(ErrorCode::InvalidArgument, "d must be < q");
  a_ = a_matrix(data_.x_int(), data_.x_uint(), d, choice);
  const Index p = data_.p();
  targets_.resize(data_.n(), 1 + p + a_.cols());
  targets_.col(0) = data_.y();
  targets_.middleCols(1, p) = data_.x_int();
  targets_.rightCols(a_.cols()) = a_;
}

void EstimatingEquation::check(const Params& params) const {
  if (params.psi.size() != data_.p() || params.gamma.rows() != data_.q() ||
      params.gamma.cols() != d_) {
    throw Error(ErrorCode::ShapeMismatch, "params do not match the data shape");
  }
}

Nuisances EstimatingEquation::nuisances(const Params& params,
                                        const std::optional<VectorXd>& bandwidth) const {
  check(params);
  const Index p = data_.p();
  const MatrixXd proj = data_.x_uint() * params.gamma;
  Nuisances out;
  out.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(proj);
  const MatrixXd smooth = nw_smooth(proj, targets_, out.bandwidth);

  const VectorXd h = data_.x_int() * params.psi;
  const VectorXd e_h = smooth.middleCols(1, p) * params.psi;
  const VectorXd r = smooth.col(0) - e_h;
  out.residual = data_.y() - h - r;
  out.a_centered = a_ - smooth.rightCols(a_.cols());
  return out;
}

VectorXd EstimatingEquation::residual(const Params& params,
                                      const std::optional<VectorXd>& bandwidth) const {
  const Nuisances nu = nuisances(params, bandwidth);
  return nu.a_centered.transpose() * nu.residual / static_cast<double>(data_.n());
}

VectorXd EstimatingEquation::probe(const Params& params, DrMode mode,
                                   const std::optional<VectorXd>& r_true,
                                   const std::optional<VectorXd>& bandwidth) const {
  if (r_true && r_true->size() != data_.n()) {
    throw Error(ErrorCode::ShapeMismatch, "r_true must have one value per row");
  }
  Nuisances nu = nuisances(params, bandwidth);
  const VectorXd h = data_.x_int() * params.psi;
  switch (mode) {
    case DrMode::DropAExpectation:
      nu.a_centered = a_;
      if (r_true) nu.residual = data_.y() - h - *r_true;
      break;
    case DrMode::DropR:
      nu.residual = data_.y() - h;
      break;
  }
  return nu.a_centered.transpose() * nu.residual / static_cast<double>(data_.n());
}

VectorXd estimating_residual(const Params& params, const Dataset& standardized,
                             const std::optional<VectorXd>& bandwidth) {
  return EstimatingEquation(standardized, static_cast<int>(params.gamma.cols()))
      .residual(params, bandwidth);
}

double dr_probe(const Dataset& standardized, const Params& params, DrMode mode,
                const std::optional<VectorXd>& r_true) {
  return EstimatingEquation(standardized, static_cast<int>(params.gamma.cols()))
      .probe(params, mode, r_true)
      .norm();
}

Params params_from_free(const FreeVector& free, const ObjectiveContext& ctx) {
  return Params{reparam_psi(free.u_psi, ctx.psi_init, ctx.delta),
                reparam_gamma(free.u_gamma, ctx.seed)};
}

double objective(const FreeVector& free, const ObjectiveContext& ctx) {
  if (ctx.equation == nullptr) throw Error(ErrorCode::InvalidArgument, "objective without data");
  return ctx.equation->residual(params_from_free(free, ctx), ctx.bandwidth_override)
      .squaredNorm();
}

namespace {

constexpr double kGammaStep = 0.1;
constexpr double kPsiStep = 0.5;
constexpr double kGammaJitter = 0.15;
constexpr double kPsiJitter = 0.5;

}  // namespace

FittedModel fit(const Dataset& data, const FitConfig& config) {
  config.validate(data.q());
  auto [z, standardizer] = validate_and_standardize(data);
  const Index p = z.p();
  const Index q = z.q();
  const int d = config.d;

  MatrixXd full(z.n(), p + q);
  full << z.x_int(), z.x_uint();
  const VectorXd coef = ols_fit(full, z.y(), true);
  const VectorXd psi_init = coef.segment(1, p);
  const MatrixXd gamma_init = phd_directions(z.x_uint(), z.y(), d).directions;

  const EstimatingEquation equation(z, d, config.a_choice);
  ObjectiveContext ctx{&equation, psi_init, config.delta, config.bandwidth_override,
                       config.seed};

  // With delta = 0 the psi chart is constant, so only gamma is searched.
  const bool search_psi = config.delta > 0.0;
  const Index psi_dim = search_psi ? p : 0;
  auto to_free = [&](const VectorXd& x) {
    FreeVector f;
    f.u_psi = search_psi ? VectorXd(x.head(p)) : VectorXd::Zero(p);
    f.u_gamma = x.tail(q * d).reshaped(q, d);
    return f;
  };
  auto fn = [&](const VectorXd& x) {
    try {
      return objective(to_free(x), ctx);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DependentColumns || e.code() == ErrorCode::DegenerateColumn) {
        return std::numeric_limits<double>::infinity();
      }
      throw;
    }
  };

  VectorXd x0(psi_dim + q * d);
  x0.head(psi_dim).setZero();
  x0.tail(q * d) = gamma_init.reshaped();
  VectorXd step(x0.size());
  step.head(psi_dim).setConstant(kPsiStep);
  step.tail(q * d).setConstant(kGammaStep);

  const double f_init = fn(x0);
  VectorXd best_x = x0;
  double best_f = f_init;
  int evals = 1;
  bool converged = true;

  if (!(f_init < config.optimizer.f_tol)) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int starts = config.optimizer.restarts + 1;
    converged = false;
    for (int s = 0; s < starts; ++s) {
      const int remaining = config.optimizer.max_evals - evals;
      if (remaining <= x0.size() + 1) break;
      const int budget = remaining / (starts - s);
      VectorXd start = x0;
      if (s > 0) {
        for (Index k = 0; k < psi_dim; ++k) start[k] += kPsiJitter * normal(rng);
        for (Index k = psi_dim; k < start.size(); ++k) start[k] += kGammaJitter * normal(rng);
      }
      NelderMeadOptions opts{budget, config.optimizer.x_tol, config.optimizer.f_tol};
      const NelderMeadResult r = nelder_mead(fn, start, step, opts);
      evals += r.evaluations;
      if (r.f < best_f) {
        best_f = r.f;
        best_x = r.x;
      }
      converged = converged || r.converged;
    }
  }

  FittedModel model;
  model.params = params_from_free(to_free(best_x), ctx);
  model.psi_init = psi_init;
  model.standardizer = standardizer;
  model.train_proj = z.x_uint() * model.params.gamma;
  model.bandwidth = config.bandwidth_override ? *config.bandwidth_override
                                              : silverman_bandwidth(model.train_proj);
  model.train_y = z.y();
  model.train_h = z.x_int() * model.params.psi;
  model.config = config;
  model.objective_value = best_f;
  model.initial_objective = f_init;
  model.evaluations = evals;
  model.converged = converged;
  model.names_int = data.names_int();
  model.names_uint = data.names_uint();
  return model;
}

}  // namespace semifit
