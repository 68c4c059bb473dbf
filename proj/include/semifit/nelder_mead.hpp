#pragma once

#include "semifit/core.hpp"

#include <functional>

namespace semifit {

struct NelderMeadOptions {
  int max_evals = 20000;
  double x_tol = 1e-8;
  double f_tol = 1e-8;
};

struct NelderMeadResult {
  VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization with dimension-adaptive coefficients
/// (Gao & Han). The initial simplex is x0 plus step_k along each axis k.
/// Stops when the spread of simplex values is <= f_tol or every vertex lies
/// within x_tol (max-norm) of the best one. Non-finite objective values are
/// treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f,
                             const VectorXd& x0, const VectorXd& step,
                             const NelderMeadOptions& options);

}  // namespace semifit
