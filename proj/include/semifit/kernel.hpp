#pragma once

// Gaussian product-kernel smoothing used for every conditional expectation
// given the projected features.

#include "semifit/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace semifit {

/// Rule-of-thumb bandwidth per column:
///   h_j = sd_j * (4 / ((d + 2) n))^(1 / (d + 4)),
/// with the sample std taken with divisor n - 1.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> silverman_bandwidth(
    const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Index n = z.rows();
  const Index d = z.cols();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "bandwidth needs n >= 2");
  const Scalar factor = std::pow(Scalar(4) / (Scalar(d + 2) * Scalar(n)),
                                 Scalar(1) / Scalar(d + 4));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h(d);
  for (Index j = 0; j < d; ++j) {
    const Scalar mean = z.col(j).mean();
    const Scalar ss = (z.col(j).array() - mean).square().sum();
    const Scalar sd = std::sqrt(ss / Scalar(n - 1));
    if (!(sd > Scalar(0))) {
      throw Error(ErrorCode::DegenerateColumn,
                  "projection column " + std::to_string(j) + " has zero spread");
    }
    h[j] = sd * factor;
  }
  return h;
}

enum class UnderflowPolicy {
  NearestNeighbor,  // return the target of the closest training point
  Throw,            // raise NumericalUnderflow
};

inline constexpr double kUnderflowFloor = 1e-300;

namespace detail {

template <typename Scalar>
using RowArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar, typename DZ, typename DH>
RowArray<Scalar> scaled_coordinates(const Eigen::MatrixBase<DZ>& z,
                                    const Eigen::MatrixBase<DH>& h) {
  // d x n, each dimension contiguous.
  RowArray<Scalar> s(z.cols(), z.rows());
  for (Index j = 0; j < z.cols(); ++j) s.row(j) = z.col(j).transpose().array() / h[j];
  return s;
}

/// Squared scaled distances from query columns [q0, q0 + b) to training
/// columns [c0, c0 + c), written into dist (b x c, row-major).
template <typename Scalar>
void block_distances(const RowArray<Scalar>& train, const RowArray<Scalar>& query,
                     Index q0, Index b, Index c0, Index c, RowArray<Scalar>& dist) {
  dist.resize(b, c);
  const Index d = train.rows();
  for (Index r = 0; r < b; ++r) {
    dist.row(r) = (train.row(0).segment(c0, c) - query(0, q0 + r)).square();
    for (Index j = 1; j < d; ++j) {
      dist.row(r) += (train.row(j).segment(c0, c) - query(j, q0 + r)).square();
    }
  }
}

template <typename DZ, typename DT, typename DH>
void check_kernel_inputs(const Eigen::MatrixBase<DZ>& train_z,
                         const Eigen::MatrixBase<DT>& train_t, Index query_cols,
                         const Eigen::MatrixBase<DH>& h) {
  using Scalar = typename DT::Scalar;
  if (train_z.rows() < 1) {
    throw Error(ErrorCode::InvalidArgument, "kernel regression needs n >= 1");
  }
  if (train_t.rows() != train_z.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "training inputs and targets differ in rows");
  }
  if (query_cols != train_z.cols() || h.size() != train_z.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "query/bandwidth dimension mismatch");
  }
  for (Index j = 0; j < h.size(); ++j) {
    if (!(h[j] > Scalar(0)) || !std::isfinite(h[j])) {
      throw Error(ErrorCode::InvalidArgument, "bandwidth entries must be positive");
    }
  }
}

inline constexpr Index kKernelBlock = 64;

}  // namespace detail

/// Nadaraya-Watson regression of train_t on train_z, evaluated at each row of
/// query_z:
///   out_k = sum_i t_i K(z_i - q_k) / sum_i K(z_i - q_k),
///   K(u)  = prod_j exp(-u_j^2 / (2 h_j^2)).
/// Every output row is a convex combination of training targets. Query rows
/// are processed in fixed blocks, so the result does not depend on threading.
template <typename DZ, typename DT, typename DQ, typename DH>
Eigen::Matrix<typename DT::Scalar, Eigen::Dynamic, Eigen::Dynamic> nw_regress(
    const Eigen::MatrixBase<DZ>& train_z, const Eigen::MatrixBase<DT>& train_t,
    const Eigen::MatrixBase<DQ>& query_z, const Eigen::MatrixBase<DH>& h,
    UnderflowPolicy policy = UnderflowPolicy::NearestNeighbor) {
  using Scalar = typename DT::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::check_kernel_inputs(train_z, train_t, query_z.cols(), h);

  const Index n = train_z.rows();
  const Index nq = query_z.rows();
  const auto zs = detail::scaled_coordinates<Scalar>(train_z, h);
  const auto qs = detail::scaled_coordinates<Scalar>(query_z, h);
  const Mat targets = train_t;

  Mat out(nq, train_t.cols());
  detail::RowArray<Scalar> dist;
  detail::RowArray<Scalar> w;
  for (Index start = 0; start < nq; start += detail::kKernelBlock) {
    const Index b = std::min(detail::kKernelBlock, nq - start);
    detail::block_distances(zs, qs, start, b, 0, n, dist);
    w = (Scalar(-0.5) * dist).exp();
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> den = w.rowwise().sum().matrix();
    out.middleRows(start, b).noalias() = w.matrix() * targets;
    for (Index r = 0; r < b; ++r) {
      if (den[r] >= Scalar(kUnderflowFloor)) {
        out.row(start + r) /= den[r];
        continue;
      }
      if (policy == UnderflowPolicy::Throw) {
        throw Error(ErrorCode::NumericalUnderflow,
                    "kernel mass underflow at query row " + std::to_string(start + r));
      }
      Index nearest = 0;
      dist.row(r).minCoeff(&nearest);
      out.row(start + r) = targets.row(nearest);
    }
  }
  return out;
}

/// nw_regress with the training points as queries (each point contributes to
/// its own estimate). Uses kernel symmetry to evaluate only the lower block
/// triangle. The self-weight keeps every denominator >= 1.
template <typename DZ, typename DT, typename DH>
Eigen::Matrix<typename DT::Scalar, Eigen::Dynamic, Eigen::Dynamic> nw_smooth(
    const Eigen::MatrixBase<DZ>& train_z, const Eigen::MatrixBase<DT>& train_t,
    const Eigen::MatrixBase<DH>& h) {
  using Scalar = typename DT::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  detail::check_kernel_inputs(train_z, train_t, train_z.cols(), h);

  const Index n = train_z.rows();
  const auto zs = detail::scaled_coordinates<Scalar>(train_z, h);
  const Mat targets = train_t;

  Mat num = Mat::Zero(n, train_t.cols());
  Vec den = Vec::Zero(n);
  detail::RowArray<Scalar> dist;
  detail::RowArray<Scalar> w;
  for (Index start = 0; start < n; start += detail::kKernelBlock) {
    const Index b = std::min(detail::kKernelBlock, n - start);
    // Columns [0, start + b): strictly-lower part plus the diagonal block.
    detail::block_distances(zs, zs, start, b, 0, start + b, dist);
    w = (Scalar(-0.5) * dist).exp();
    const auto wm = w.matrix();
    num.middleRows(start, b).noalias() += wm * targets.topRows(start + b);
    den.segment(start, b) += w.rowwise().sum().matrix();
    if (start > 0) {
      const auto lower = wm.leftCols(start);
      num.topRows(start).noalias() += lower.transpose() * targets.middleRows(start, b);
      den.head(start) += lower.colwise().sum().transpose();
    }
  }
  return (num.array().colwise() / den.array()).matrix();
}

}  // namespace semifit
