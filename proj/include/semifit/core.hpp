#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semifit {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  NonFinite,
  ConstantColumn,
  DegenerateColumn,
  NumericalUnderflow,
  RankDeficient,
  SingularCovariance,
  SingularVariance,
  DependentColumns,
  DimSelFailed,
  Io,
  Parse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Outcome plus interpretable (n x p) and uninterpretable (n x q) features.
/// Validated on construction: shapes agree, n >= 2, p >= 1, q >= 2, all
/// entries finite.
class Dataset {
 public:
  Dataset(VectorXd y, MatrixXd x_int, MatrixXd x_uint,
          std::vector<std::string> names_int = {},
          std::vector<std::string> names_uint = {});

  const VectorXd& y() const { return y_; }
  const MatrixXd& x_int() const { return x_int_; }
  const MatrixXd& x_uint() const { return x_uint_; }
  const std::vector<std::string>& names_int() const { return names_int_; }
  const std::vector<std::string>& names_uint() const { return names_uint_; }

  Index n() const { return y_.size(); }
  Index p() const { return x_int_.cols(); }
  Index q() const { return x_uint_.cols(); }

  /// Rows in the given order (duplicates allowed, as in bootstrap resamples).
  Dataset rows(std::span<const Index> index) const;

 private:
  VectorXd y_;
  MatrixXd x_int_;
  MatrixXd x_uint_;
  std::vector<std::string> names_int_;
  std::vector<std::string> names_uint_;
};

/// Per-column centering and scaling of both feature blocks. The outcome is
/// left in its own units.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(VectorXd mean_int, VectorXd std_int, VectorXd mean_uint,
               VectorXd std_uint);

  /// Sample moments with divisor n - 1. Throws ConstantColumn.
  static Standardizer fit(const Dataset& data);

  MatrixXd apply_int(const MatrixXd& x) const;
  MatrixXd apply_uint(const MatrixXd& x) const;
  MatrixXd invert_int(const MatrixXd& z) const;
  MatrixXd invert_uint(const MatrixXd& z) const;
  Dataset apply(const Dataset& data) const;

  const VectorXd& mean_int() const { return mean_int_; }
  const VectorXd& std_int() const { return std_int_; }
  const VectorXd& mean_uint() const { return mean_uint_; }
  const VectorXd& std_uint() const { return std_uint_; }

 private:
  VectorXd mean_int_;
  VectorXd std_int_;
  VectorXd mean_uint_;
  VectorXd std_uint_;
};

std::pair<Dataset, Standardizer> validate_and_standardize(const Dataset& data);

/// beta = (psi, gamma). gamma is q x d with orthonormal columns once fitted.
struct Params {
  VectorXd psi;
  MatrixXd gamma;
};

/// Thin modified Gram-Schmidt with one reorthogonalization pass. A column
/// whose residual norm falls below pivot_tol stops the sweep and is reported
/// in failed_column.
struct GramSchmidtResult {
  MatrixXd q;
  Index failed_column = -1;
  bool ok() const { return failed_column < 0; }
};
GramSchmidtResult gram_schmidt(const MatrixXd& m, double pivot_tol = 1e-12);

/// Flips each column so that its first entry of largest magnitude is positive.
void normalize_column_signs(MatrixXd& m);

/// Raw-scale (psi, gamma) re-expressed on the standardized scale: psi is
/// multiplied by the interpretable stds, gamma columns by the uninterpretable
/// stds and re-orthonormalized (span preserved). Inverse of
/// FittedModel::raw_params up to the sign convention.
Params standardized_params(const Params& raw, const Standardizer& standardizer);

/// Max-abs deviation of gamma^T gamma from the identity.
double orthonormality_residual(const MatrixXd& gamma);

enum class AChoice { PolynomialTile };

struct OptimizerSettings {
  int max_evals = 20000;
  int restarts = 3;
  double x_tol = 1e-8;
  double f_tol = 1e-8;
};

struct FitConfig {
  int d = 2;
  double delta = 0.2;
  std::optional<VectorXd> bandwidth_override;
  OptimizerSettings optimizer;
  AChoice a_choice = AChoice::PolynomialTile;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument with a message naming the offending field.
  void validate(Index q) const;
};

struct FittedModel {
  Params params;
  VectorXd psi_init;
  Standardizer standardizer;
  MatrixXd train_proj;  // n x d, standardized x_uint * gamma
  VectorXd train_y;
  VectorXd train_h;
  VectorXd bandwidth;
  FitConfig config;
  double objective_value = 0.0;
  double initial_objective = 0.0;
  int evaluations = 0;
  bool converged = true;
  std::vector<std::string> names_int;
  std::vector<std::string> names_uint;

  Index p() const { return params.psi.size(); }
  Index q() const { return params.gamma.rows(); }
  Index d() const { return params.gamma.cols(); }

  /// psi and gamma expressed on the raw (unstandardized) feature scale.
  /// gamma columns are re-orthonormalized; only their span is meaningful.
  Params raw_params() const;
};

}  // namespace semifit
