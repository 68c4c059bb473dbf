#include "semifit/sim.hpp"

#include <cmath>
#include <random>

namespace semifit {

namespace {

constexpr double kPsiStar = 0.577;
constexpr double kGammaStar = 0.4082;

// Column-major fill of an n x k standard normal block.
MatrixXd normal_block(std::mt19937_64& rng, Index n, Index k) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd out(n, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < n; ++i) out(i, j) = normal(rng);
  }
  return out;
}

// Rows ~ N(0, S) with S_ab = 0.5^|a-b| for a 2 x 2 block.
MatrixXd correlated_pair(std::mt19937_64& rng, Index n) {
  Eigen::Matrix2d sigma;
  sigma << 1.0, 0.5, 0.5, 1.0;
  const Eigen::Matrix2d l = sigma.llt().matrixL();
  return normal_block(rng, n, 2) * l.transpose();
}

std::vector<std::string> numbered(const std::string& prefix, Index k) {
  std::vector<std::string> out;
  for (Index j = 1; j <= k; ++j) out.push_back(prefix + std::to_string(j));
  return out;
}

}  // namespace

void SimSpec::validate() const {
  if (model < 1 || model > 4) throw Error(ErrorCode::InvalidArgument, "model must be 1..4");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be >= 2");
}

VectorXd true_psi() {
  VectorXd psi(2);
  psi << kPsiStar, -kPsiStar;
  return psi;
}

MatrixXd true_gamma() {
  MatrixXd g(6, 2);
  for (Index i = 0; i < 6; ++i) {
    g(i, 0) = kGammaStar;
    g(i, 1) = (i % 2 == 0) ? kGammaStar : -kGammaStar;
  }
  return g;
}

double r1(double z1, double z2) { return z1 * z1 + z2 * z2; }

double r2(double z1, double z2) {
  const double s = z2 + 1.5;
  return z1 / (0.5 + s * s);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Simulated generate(const SimSpec& spec) {
  spec.validate();
  const Index n = spec.n;
  std::mt19937_64 rng(spec.seed);
  MatrixXd x_int;
  MatrixXd x_uint(n, 6);

  if (spec.sim_case == SimCase::I) {
    x_int = correlated_pair(rng, n);
    x_uint = std::sqrt(3.0) * normal_block(rng, n, 6);
  } else {
    const MatrixXd u12 = correlated_pair(rng, n);
    const MatrixXd eps12 = normal_block(rng, n, 2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    VectorXd coin(n);
    for (Index i = 0; i < n; ++i) coin[i] = unif(rng);
    x_int = correlated_pair(rng, n);
    for (Index i = 0; i < n; ++i) {
      const double a = u12(i, 0);
      const double b = u12(i, 1);
      x_uint(i, 0) = a;
      x_uint(i, 1) = b;
      x_uint(i, 2) = std::abs(a + b) + std::abs(a) * eps12(i, 0);
      const double s = std::abs(a + b);
      x_uint(i, 3) = s * s + std::abs(b) * eps12(i, 1);
      const double prob = 1.0 / (1.0 + std::exp(-b));
      x_uint(i, 4) = coin[i] < prob ? 1.0 : 0.0;
      x_uint(i, 5) = normal_cdf(b);
      x_int(i, 1) *= std::abs(x_uint(i, 2));
    }
  }

  VectorXd eps = normal_block(rng, n, 1).col(0);
  if (spec.noiseless) eps.setZero();

  const VectorXd mean = true_surface(spec, x_int, x_uint);
  const MatrixXd z = x_uint * true_gamma();
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    double scale = 1.0;
    if (spec.model == 2) scale = std::abs(z(i, 0)) * std::abs(x_int(i, 0));
    if (spec.model == 4) scale = std::abs(z(i, 0));
    y[i] = mean[i] + scale * eps[i];
  }

  Dataset data(std::move(y), std::move(x_int), std::move(x_uint), numbered("xint", 2),
               numbered("xuint", 6));
  return Simulated{std::move(data), Params{true_psi(), true_gamma()}, mean};
}

double true_surface(const SimSpec& spec, const VectorXd& x_int, const VectorXd& x_uint) {
  if (x_int.size() != 2 || x_uint.size() != 6) {
    throw Error(ErrorCode::ShapeMismatch, "simulation designs have p = 2 and q = 6");
  }
  const VectorXd z = true_gamma().transpose() * x_uint;
  const double h = x_int.dot(true_psi());
  return h + (spec.model <= 2 ? r1(z[0], z[1]) : r2(z[0], z[1]));
}

VectorXd true_surface(const SimSpec& spec, const MatrixXd& x_int, const MatrixXd& x_uint) {
  if (x_int.rows() != x_uint.rows()) throw Error(ErrorCode::ShapeMismatch, "row mismatch");
  VectorXd out(x_int.rows());
  for (Index i = 0; i < x_int.rows(); ++i) {
    out[i] = true_surface(spec, VectorXd(x_int.row(i).transpose()),
                          VectorXd(x_uint.row(i).transpose()));
  }
  return out;
}

SimCase parse_case(const std::string& text) {
  if (text == "I" || text == "i" || text == "1") return SimCase::I;
  if (text == "II" || text == "ii" || text == "2") return SimCase::II;
  throw Error(ErrorCode::InvalidArgument, "case must be I or II");
}

std::string to_string(SimCase c) { return c == SimCase::I ? "I" : "II"; }

}  // namespace semifit
