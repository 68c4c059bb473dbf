#pragma once

// Starting values: least squares for psi (also the linear baseline) and
// principal Hessian directions for gamma.

#include "semifit/core.hpp"

namespace semifit {

/// Least-squares coefficients of y on x. With an intercept the result has
/// k + 1 entries and the intercept comes first.
VectorXd ols_fit(const MatrixXd& x, const VectorXd& y, bool intercept);

/// x * coef[1..] + coef[0] when the intercept flag matches ols_fit.
VectorXd ols_predict(const MatrixXd& x, const VectorXd& coef, bool intercept);

struct PhdResult {
  MatrixXd directions;   // q x d, orthonormal, sign-normalized
  VectorXd eigenvalues;  // all q, sorted by decreasing magnitude
};

/// Response-based principal Hessian directions:
///   M = n^-1 sum_i (y_i - ybar)(x_i - xbar)(x_i - xbar)^T,
/// leading eigenvectors of Sigma^-1 M by |eigenvalue|, computed through the
/// symmetric form Sigma^-1/2 M Sigma^-1/2.
PhdResult phd_directions(const MatrixXd& x, const VectorXd& y, int d);

}  // namespace semifit
