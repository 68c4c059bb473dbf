#include "semifit/init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace semifit {

namespace {

MatrixXd design(const MatrixXd& x, bool intercept) {
  if (!intercept) return x;
  MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

}  // namespace

VectorXd ols_fit(const MatrixXd& x, const VectorXd& y, bool intercept) {
  if (x.rows() != y.size()) throw Error(ErrorCode::ShapeMismatch, "ols: x and y differ in rows");
  const MatrixXd a = design(x, intercept);
  if (a.rows() < a.cols()) {
    throw Error(ErrorCode::RankDeficient, "ols: fewer rows than coefficients");
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < a.cols()) {
    throw Error(ErrorCode::RankDeficient, "ols: design matrix is rank deficient");
  }
  VectorXd coef = qr.solve(y);
  // One step of iterative refinement tightens the normal-equation residual.
  coef += qr.solve(VectorXd(y - a * coef));
  return coef;
}

VectorXd ols_predict(const MatrixXd& x, const VectorXd& coef, bool intercept) {
  if (intercept) {
    if (coef.size() != x.cols() + 1) throw Error(ErrorCode::ShapeMismatch, "ols: coefficient size");
    return (x * coef.tail(x.cols())).array() + coef[0];
  }
  if (coef.size() != x.cols()) throw Error(ErrorCode::ShapeMismatch, "ols: coefficient size");
  return x * coef;
}

PhdResult phd_directions(const MatrixXd& x, const VectorXd& y, int d) {
  const Index n = x.rows();
  const Index q = x.cols();
  if (y.size() != n) throw Error(ErrorCode::ShapeMismatch, "phd: x and y differ in rows");
  if (d < 1 || d >= q) throw Error(ErrorCode::InvalidArgument, "phd: need 1 <= d < q");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "phd: need n >= 2");

  const MatrixXd xc = x.rowwise() - x.colwise().mean();
  const VectorXd yc = y.array() - y.mean();
  const MatrixXd sigma = (xc.transpose() * xc) / static_cast<double>(n);
  const MatrixXd m = (xc.transpose() * yc.asDiagonal() * xc) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<MatrixXd> cov(sigma);
  const VectorXd evals = cov.eigenvalues();
  if (!(evals.minCoeff() > 1e-12 * std::max(1.0, evals.maxCoeff()))) {
    throw Error(ErrorCode::SingularCovariance, "phd: feature covariance is singular");
  }
  const MatrixXd inv_sqrt =
      cov.eigenvectors() * evals.cwiseSqrt().cwiseInverse().asDiagonal() *
      cov.eigenvectors().transpose();

  const MatrixXd sym = inv_sqrt * m * inv_sqrt;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (sym + sym.transpose()));

  std::vector<Index> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), Index{0});
  const VectorXd& lam = eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(lam[a]) > std::abs(lam[b]);
  });

  PhdResult out;
  out.eigenvalues.resize(q);
  MatrixXd back(q, d);
  for (Index k = 0; k < q; ++k) out.eigenvalues[k] = lam[order[k]];
  for (Index k = 0; k < d; ++k) back.col(k) = inv_sqrt * eig.eigenvectors().col(order[k]);

  auto gs = gram_schmidt(back);
  if (!gs.ok()) throw Error(ErrorCode::DependentColumns, "phd: dependent directions");
  out.directions = std::move(gs.q);
  normalize_column_signs(out.directions);
  return out;
}

}  // namespace semifit
