#pragma once

// Bootstrap choice of the structural dimension d by trace correlation between
// full-sample and resampled projections.

#include "semifit/core.hpp"

#include <string>
#include <vector>

namespace semifit {

/// r^2(U, V) = k^-1 trace(Suu^-1/2 Suv Svv^-1 Svu Suu^-1/2) with sample
/// moments. Lies in [0, 1]; 1 when the column spans of centered U and V agree.
double trace_correlation(const MatrixXd& u, const MatrixXd& v);

struct DimSelResult {
  int d_hat = 1;
  VectorXd scores;  // scores[k - 1] is the mean trace correlation at dimension k
  std::vector<std::string> failures;
};

/// For each k in 1..k_max, fits gamma_k on the full sample and on B row
/// bootstraps, then averages r^2(X_uint gamma_k, X_uint gamma_k,b). Returns
/// the argmax, ties to the smaller k. A failed bootstrap fit is skipped and
/// reported; more than B/2 failures at any k raises DimSelFailed.
DimSelResult select_dimension(const Dataset& data, const FitConfig& config, int k_max, int B);

}  // namespace semifit
