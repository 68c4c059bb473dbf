#pragma once

// Estimating-equation core. For beta = (psi, gamma) and standardized data the
// empirical equation is
//
//   e(beta) = n^-1 sum_i {A(X_i) - E[A | Z_i]} {Y_i - X_int,i psi - r(Z_i)},
//   Z = X_uint gamma,  r(Z) = E[Y | Z] - E[X_int psi | Z],
//
// with every conditional expectation a Nadaraya-Watson fit at the training
// projections. fit() minimizes |e|^2 over a smooth chart of the constraint
// set {gamma^T gamma = I, |psi - psi_init|_max <= delta}.

#include "semifit/core.hpp"

#include <optional>

namespace semifit {

/// Unconstrained coordinates for (psi, gamma).
struct FreeVector {
  VectorXd u_psi;
  MatrixXd u_gamma;

  VectorXd flatten() const;
  static FreeVector unflatten(const VectorXd& flat, Index p, Index q, Index d);
};

/// [x_int, x_uint, x_uint^2, ..., x_uint^d] (elementwise powers), length p + q d.
VectorXd a_function(const VectorXd& x_int, const VectorXd& x_uint, int d);

/// Row-wise a_function over a whole sample: n x (p + q d).
MatrixXd a_matrix(const MatrixXd& x_int, const MatrixXd& x_uint, int d,
                  AChoice choice = AChoice::PolynomialTile);

/// Gram-Schmidt chart onto orthonormal q x d matrices (sign-normalized).
/// A numerically dependent column is perturbed once with seeded 1e-6 noise
/// before giving up with DependentColumns.
MatrixXd reparam_gamma(const MatrixXd& u_gamma, std::uint64_t seed = 0);

/// psi = psi_init + delta * tanh(u).
VectorXd reparam_psi(const VectorXd& u_psi, const VectorXd& psi_init, double delta);

enum class DrMode {
  DropAExpectation,  // E[A | Z] replaced by 0
  DropR,             // r replaced by 0
};

/// Per-sample nuisance estimates at the training projections.
struct Nuisances {
  MatrixXd a_centered;  // A - E[A | Z]
  VectorXd residual;    // Y - h - r
  VectorXd bandwidth;
};

/// Precomputes A(X) and the smoothing targets for one standardized sample so
/// that repeated evaluations only redo the kernel pass.
class EstimatingEquation {
 public:
  EstimatingEquation(Dataset data, int d, AChoice choice = AChoice::PolynomialTile);

  const Dataset& data() const { return data_; }
  int d() const { return d_; }
  Index size() const { return a_.cols(); }

  /// Uses the rule-of-thumb bandwidth on the current projections unless a
  /// bandwidth is given.
  VectorXd residual(const Params& params,
                    const std::optional<VectorXd>& bandwidth = std::nullopt) const;

  Nuisances nuisances(const Params& params,
                      const std::optional<VectorXd>& bandwidth = std::nullopt) const;

  /// Residual with one nuisance deliberately replaced (see DrMode). In
  /// DropAExpectation mode r_true, when given, stands in for the kernel r.
  VectorXd probe(const Params& params, DrMode mode,
                 const std::optional<VectorXd>& r_true = std::nullopt,
                 const std::optional<VectorXd>& bandwidth = std::nullopt) const;

 private:
  void check(const Params& params) const;

  Dataset data_;
  int d_;
  MatrixXd a_;
  MatrixXd targets_;  // [y, x_int, A]
};

VectorXd estimating_residual(const Params& params, const Dataset& standardized,
                             const std::optional<VectorXd>& bandwidth = std::nullopt);

struct ObjectiveContext {
  const EstimatingEquation* equation = nullptr;
  VectorXd psi_init;
  double delta = 0.0;
  std::optional<VectorXd> bandwidth_override;
  std::uint64_t seed = 0;
};

Params params_from_free(const FreeVector& free, const ObjectiveContext& ctx);

/// Squared Euclidean norm of the estimating residual at the charted params.
double objective(const FreeVector& free, const ObjectiveContext& ctx);

/// Standardize, initialize (OLS psi, pHd gamma), then Nelder-Mead with
/// config.optimizer.restarts seeded restarts from perturbed initializers.
/// The evaluation budget max_evals is shared by all starts.
FittedModel fit(const Dataset& data, const FitConfig& config);

/// Norm of the estimating residual at params with one nuisance misspecified.
double dr_probe(const Dataset& standardized, const Params& params, DrMode mode,
                const std::optional<VectorXd>& r_true = std::nullopt);

}  // namespace semifit
