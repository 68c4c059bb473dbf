#include "semifit/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace semifit {

NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f,
                             const VectorXd& x0, const VectorXd& step,
                             const NelderMeadOptions& options) {
  const Index dim = x0.size();
  if (step.size() != dim) throw Error(ErrorCode::ShapeMismatch, "nelder_mead: step size");
  NelderMeadResult result;
  if (dim == 0) {
    result.x = x0;
    result.f = f(x0);
    result.evaluations = 1;
    result.converged = true;
    return result;
  }

  const double n = static_cast<double>(dim);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / n;
  const double gamma = 0.75 - 1.0 / (2.0 * n);
  const double shrink = 1.0 - 1.0 / n;

  int evals = 0;
  auto eval = [&](const VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<VectorXd> simplex(static_cast<std::size_t>(dim + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(dim + 1));
  values[0] = eval(x0);
  for (Index k = 0; k < dim; ++k) {
    simplex[k + 1][k] += step[k];
    values[k + 1] = eval(simplex[k + 1]);
  }

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<VectorXd> s2;
    std::vector<double> v2;
    s2.reserve(order.size());
    v2.reserve(order.size());
    for (auto i : order) {
      s2.push_back(std::move(simplex[i]));
      v2.push_back(values[i]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };

  bool converged = false;
  while (true) {
    sort_simplex();
    const double fspread = values.back() - values.front();
    double xspread = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      xspread = std::max(xspread, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    }
    if ((std::isfinite(fspread) && fspread <= options.f_tol) || xspread <= options.x_tol) {
      converged = true;
      break;
    }
    if (evals >= options.max_evals) break;

    VectorXd centroid = VectorXd::Zero(dim);
    for (Index i = 0; i < dim; ++i) centroid += simplex[i];
    centroid /= n;
    const VectorXd& worst = simplex.back();

    const VectorXd xr = centroid + alpha * (centroid - worst);
    const double fr = eval(xr);
    if (fr < values.front()) {
      const VectorXd xe = centroid + beta * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex.back() = xe;
        values.back() = fe;
      } else {
        simplex.back() = xr;
        values.back() = fr;
      }
      continue;
    }
    if (fr < values[dim - 1]) {
      simplex.back() = xr;
      values.back() = fr;
      continue;
    }
    if (fr < values.back()) {
      const VectorXd xc = centroid + gamma * (xr - centroid);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex.back() = xc;
        values.back() = fc;
        continue;
      }
    } else {
      const VectorXd xc = centroid - gamma * (centroid - worst);
      const double fc = eval(xc);
      if (fc < values.back()) {
        simplex.back() = xc;
        values.back() = fc;
        continue;
      }
    }
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0]);
      values[i] = eval(simplex[i]);
    }
  }

  result.x = simplex.front();
  result.f = values.front();
  result.evaluations = evals;
  result.converged = converged;
  return result;
}

}  // namespace semifit
