#pragma once

#include "semifit/core.hpp"

#include <cmath>

namespace semifit {

template <typename DA, typename DB>
typename DA::Scalar rmse(const Eigen::MatrixBase<DA>& pred, const Eigen::MatrixBase<DB>& truth) {
  if (pred.size() != truth.size() || pred.size() < 1) {
    throw Error(ErrorCode::ShapeMismatch, "rmse: vectors must have equal nonzero length");
  }
  return std::sqrt((pred - truth).squaredNorm() / static_cast<typename DA::Scalar>(pred.size()));
}

/// Orthogonal projector onto the column span of b.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> column_projector(
    const Eigen::MatrixBase<Derived>& b) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::ColPivHouseholderQR<Mat> qr{Mat(b)};
  qr.setThreshold(1e-10);
  if (qr.rank() < b.cols()) throw Error(ErrorCode::RankDeficient, "basis is rank deficient");
  const Mat q = qr.householderQ() * Mat::Identity(b.rows(), b.cols());
  return q * q.transpose();
}

/// Frobenius distance between the column-span projectors of b1 and b2. Zero
/// iff the spans agree; sqrt(2k) for orthogonal k-dimensional spans.
template <typename DA, typename DB>
typename DA::Scalar projection_distance(const Eigen::MatrixBase<DA>& b1,
                                        const Eigen::MatrixBase<DB>& b2) {
  if (b1.rows() != b2.rows()) throw Error(ErrorCode::ShapeMismatch, "projection_distance: rows");
  return (column_projector(b1) - column_projector(b2)).norm();
}

}  // namespace semifit
