#include "semifit/predict.hpp"

#include "semifit/kernel.hpp"

#include <cmath>

namespace semifit {

Decomposition decompose(const FittedModel& model, const MatrixXd& x_int, const MatrixXd& x_uint) {
  if (x_int.rows() != x_uint.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "x_int and x_uint differ in rows");
  }
  if (x_int.cols() != model.p() || x_uint.cols() != model.q()) {
    throw Error(ErrorCode::ShapeMismatch,
                "model expects " + std::to_string(model.p()) + " interpretable and " +
                    std::to_string(model.q()) + " uninterpretable columns");
  }
  if (!x_int.allFinite() || !x_uint.allFinite()) {
    throw Error(ErrorCode::NonFinite, "prediction features must be finite");
  }
  const MatrixXd zi = model.standardizer.apply_int(x_int);
  const MatrixXd zu = model.standardizer.apply_uint(x_uint);

  MatrixXd targets(model.train_y.size(), 2);
  targets.col(0) = model.train_y;
  targets.col(1) = model.train_h;
  const MatrixXd proj = zu * model.params.gamma;
  const MatrixXd smooth = nw_regress(model.train_proj, targets, proj, model.bandwidth);

  Decomposition out;
  out.h_part = zi * model.params.psi;
  out.r_part = smooth.col(0) - smooth.col(1);
  return out;
}

VectorXd predict(const FittedModel& model, const MatrixXd& x_int, const MatrixXd& x_uint) {
  return decompose(model, x_int, x_uint).prediction();
}

}  // namespace semifit
