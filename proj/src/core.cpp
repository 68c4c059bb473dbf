#include "semifit/core.hpp"

#include <cmath>
#include <sstream>

namespace semifit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::SingularVariance: return "SingularVariance";
    case ErrorCode::DependentColumns: return "DependentColumns";
    case ErrorCode::DimSelFailed: return "DimSelFailed";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

namespace {

std::string column_label(const std::vector<std::string>& names, Index j,
                         const char* block) {
  if (j < static_cast<Index>(names.size()) && !names[j].empty()) return names[j];
  return std::string(block) + "[" + std::to_string(j) + "]";
}

void check_finite(const MatrixXd& m, const std::vector<std::string>& names,
                  const char* block) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j))) {
        std::ostringstream os;
        os << "non-finite value in column " << column_label(names, j, block)
           << " at row " << i;
        throw Error(ErrorCode::NonFinite, os.str());
      }
    }
  }
}

void check_names(const std::vector<std::string>& names, Index cols,
                 const char* block) {
  if (!names.empty() && static_cast<Index>(names.size()) != cols) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(block) + " names do not match column count");
  }
}

}  // namespace

Dataset::Dataset(VectorXd y, MatrixXd x_int, MatrixXd x_uint,
                 std::vector<std::string> names_int,
                 std::vector<std::string> names_uint)
    : y_(std::move(y)),
      x_int_(std::move(x_int)),
      x_uint_(std::move(x_uint)),
      names_int_(std::move(names_int)),
      names_uint_(std::move(names_uint)) {
  if (x_int_.rows() != y_.size() || x_uint_.rows() != y_.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "y, x_int and x_uint must have the same number of rows");
  }
  if (y_.size() < 2) throw Error(ErrorCode::InvalidArgument, "need n >= 2 rows");
  if (x_int_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "need at least one interpretable feature");
  }
  if (x_uint_.cols() < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "need at least two uninterpretable features");
  }
  check_names(names_int_, x_int_.cols(), "x_int");
  check_names(names_uint_, x_uint_.cols(), "x_uint");
  for (Index i = 0; i < y_.size(); ++i) {
    if (!std::isfinite(y_[i])) {
      throw Error(ErrorCode::NonFinite,
                  "non-finite outcome at row " + std::to_string(i));
    }
  }
  check_finite(x_int_, names_int_, "x_int");
  check_finite(x_uint_, names_uint_, "x_uint");
}

Dataset Dataset::rows(std::span<const Index> index) const {
  const auto m = static_cast<Index>(index.size());
  VectorXd y(m);
  MatrixXd xi(m, p());
  MatrixXd xu(m, q());
  for (Index r = 0; r < m; ++r) {
    const Index src = index[r];
    if (src < 0 || src >= n()) throw Error(ErrorCode::InvalidArgument, "row index out of range");
    y[r] = y_[src];
    xi.row(r) = x_int_.row(src);
    xu.row(r) = x_uint_.row(src);
  }
  return Dataset(std::move(y), std::move(xi), std::move(xu), names_int_, names_uint_);
}

Standardizer::Standardizer(VectorXd mean_int, VectorXd std_int, VectorXd mean_uint,
                           VectorXd std_uint)
    : mean_int_(std::move(mean_int)),
      std_int_(std::move(std_int)),
      mean_uint_(std::move(mean_uint)),
      std_uint_(std::move(std_uint)) {
  if (mean_int_.size() != std_int_.size() || mean_uint_.size() != std_uint_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "standardizer mean/std size mismatch");
  }
  for (Index j = 0; j < std_int_.size(); ++j) {
    if (!(std_int_[j] > 0.0)) {
      throw Error(ErrorCode::ConstantColumn, "x_int[" + std::to_string(j) + "] has zero std");
    }
  }
  for (Index j = 0; j < std_uint_.size(); ++j) {
    if (!(std_uint_[j] > 0.0)) {
      throw Error(ErrorCode::ConstantColumn, "x_uint[" + std::to_string(j) + "] has zero std");
    }
  }
}

namespace {

void column_moments(const MatrixXd& x, const std::vector<std::string>& names,
                    const char* block, VectorXd& mean, VectorXd& sd) {
  const double n = static_cast<double>(x.rows());
  mean = x.colwise().mean().transpose();
  sd.resize(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - mean[j]).square().sum();
    sd[j] = std::sqrt(ss / (n - 1.0));
    // Relative test so that a column like [5, 5, 5] with rounding noise
    // in the mean is still flagged.
    const double scale = std::max(1.0, std::abs(mean[j]));
    if (!(sd[j] > 1e-14 * scale)) {
      throw Error(ErrorCode::ConstantColumn,
                  "constant column " + column_label(names, j, block));
    }
  }
}

}  // namespace

Standardizer Standardizer::fit(const Dataset& data) {
  VectorXd mi, si, mu, su;
  column_moments(data.x_int(), data.names_int(), "x_int", mi, si);
  column_moments(data.x_uint(), data.names_uint(), "x_uint", mu, su);
  return Standardizer(std::move(mi), std::move(si), std::move(mu), std::move(su));
}

MatrixXd Standardizer::apply_int(const MatrixXd& x) const {
  if (x.cols() != mean_int_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "x_int has " + std::to_string(x.cols()) +
                                              " columns, expected " +
                                              std::to_string(mean_int_.size()));
  }
  return ((x.rowwise() - mean_int_.transpose()).array().rowwise() /
          std_int_.transpose().array())
      .matrix();
}

MatrixXd Standardizer::apply_uint(const MatrixXd& x) const {
  if (x.cols() != mean_uint_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "x_uint has " + std::to_string(x.cols()) +
                                              " columns, expected " +
                                              std::to_string(mean_uint_.size()));
  }
  return ((x.rowwise() - mean_uint_.transpose()).array().rowwise() /
          std_uint_.transpose().array())
      .matrix();
}

MatrixXd Standardizer::invert_int(const MatrixXd& z) const {
  return ((z.array().rowwise() * std_int_.transpose().array()).matrix().rowwise() +
          mean_int_.transpose());
}

MatrixXd Standardizer::invert_uint(const MatrixXd& z) const {
  return ((z.array().rowwise() * std_uint_.transpose().array()).matrix().rowwise() +
          mean_uint_.transpose());
}

Dataset Standardizer::apply(const Dataset& data) const {
  return Dataset(data.y(), apply_int(data.x_int()), apply_uint(data.x_uint()),
                 data.names_int(), data.names_uint());
}

std::pair<Dataset, Standardizer> validate_and_standardize(const Dataset& data) {
  Standardizer s = Standardizer::fit(data);
  Dataset z = s.apply(data);
  return {std::move(z), std::move(s)};
}

GramSchmidtResult gram_schmidt(const MatrixXd& m, double pivot_tol) {
  GramSchmidtResult out;
  out.q = m;
  MatrixXd& q = out.q;
  for (Index j = 0; j < q.cols(); ++j) {
    const double original = q.col(j).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    }
    const double norm = q.col(j).norm();
    if (!(norm > pivot_tol) || !(norm > pivot_tol * original)) {
      out.failed_column = j;
      return out;
    }
    q.col(j) /= norm;
  }
  return out;
}

void normalize_column_signs(MatrixXd& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > best) {
        best = std::abs(m(i, j));
        arg = i;
      }
    }
    if (m(arg, j) < 0.0) m.col(j) = -m.col(j);
  }
}

double orthonormality_residual(const MatrixXd& gamma) {
  const MatrixXd g = gamma.transpose() * gamma;
  return (g - MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

void FitConfig::validate(Index q) const {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "d must be >= 1");
  if (d >= q) throw Error(ErrorCode::InvalidArgument, "d must be < q");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::InvalidArgument, "delta must be nonnegative");
  }
  if (optimizer.max_evals < 1) throw Error(ErrorCode::InvalidArgument, "max_evals must be positive");
  if (optimizer.restarts < 0) throw Error(ErrorCode::InvalidArgument, "restarts must be nonnegative");
  if (!(optimizer.x_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "x_tol must be positive");
  if (!(optimizer.f_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "f_tol must be positive");
  if (bandwidth_override) {
    if (bandwidth_override->size() != d) {
      throw Error(ErrorCode::InvalidArgument, "bandwidth override must have d entries");
    }
    if (!(bandwidth_override->array() > 0.0).all()) {
      throw Error(ErrorCode::InvalidArgument, "bandwidth override entries must be positive");
    }
  }
}

Params standardized_params(const Params& raw, const Standardizer& standardizer) {
  if (raw.psi.size() != standardizer.std_int().size() ||
      raw.gamma.rows() != standardizer.std_uint().size()) {
    throw Error(ErrorCode::ShapeMismatch, "params do not match the standardizer");
  }
  Params out;
  out.psi = raw.psi.array() * standardizer.std_int().array();
  auto gs = gram_schmidt(raw.gamma.array().colwise() * standardizer.std_uint().array());
  if (!gs.ok()) throw Error(ErrorCode::DependentColumns, "gamma columns are dependent");
  out.gamma = std::move(gs.q);
  normalize_column_signs(out.gamma);
  return out;
}

Params FittedModel::raw_params() const {
  Params raw;
  raw.psi = params.psi.array() / standardizer.std_int().array();
  MatrixXd g = params.gamma.array().colwise() / standardizer.std_uint().array();
  auto gs = gram_schmidt(g);
  raw.gamma = gs.ok() ? gs.q : g;
  normalize_column_signs(raw.gamma);
  return raw;
}

}  // namespace semifit
