#pragma once

#include "semifit/core.hpp"

namespace semifit {

/// The two addends of a prediction: the interpretable linear part and the
/// kernel residual part r = E[Y | z] - E[h | z] over the training sample.
struct Decomposition {
  VectorXd h_part;
  VectorXd r_part;

  VectorXd prediction() const { return h_part + r_part; }
};

/// Raw-scale features in, standardized with the model's stored moments. The
/// training bandwidth is reused.
Decomposition decompose(const FittedModel& model, const MatrixXd& x_int, const MatrixXd& x_uint);

VectorXd predict(const FittedModel& model, const MatrixXd& x_int, const MatrixXd& x_uint);

}  // namespace semifit
