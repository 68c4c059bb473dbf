#include <doctest.h>

#include "helpers.hpp"
#include "semifit/estimator.hpp"
#include "semifit/init.hpp"
#include "semifit/metrics.hpp"
#include "semifit/predict.hpp"
#include "semifit/sim.hpp"

#include <cmath>
#include <limits>
#include <numeric>

using namespace semifit;

namespace {

Simulated sample(int model, Index n, std::uint64_t seed) {
  SimSpec spec;
  spec.model = model;
  spec.n = n;
  spec.seed = seed;
  return generate(spec);
}

const FittedModel& shared_model() {
  static const FittedModel m = [] {
    FitConfig cfg;
    cfg.optimizer.max_evals = 400;
    cfg.optimizer.restarts = 0;
    return fit(sample(1, 600, 21).data, cfg);
  }();
  return m;
}

double sample_variance(const VectorXd& v) {
  return (v.array() - v.mean()).square().sum() / double(v.size() - 1);
}

}  // namespace

TEST_CASE("h and r parts add up to the prediction") {
  const Simulated test = sample(1, 200, 22);
  const Decomposition dec = decompose(shared_model(), test.data.x_int(), test.data.x_uint());
  const VectorXd pred = predict(shared_model(), test.data.x_int(), test.data.x_uint());
  CHECK((dec.h_part + dec.r_part - pred).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("h part is the linear predictor on standardized features") {
  const FittedModel& m = shared_model();
  const Simulated test = sample(1, 50, 23);
  const Decomposition dec = decompose(m, test.data.x_int(), test.data.x_uint());
  const VectorXd h = m.standardizer.apply_int(test.data.x_int()) * m.params.psi;
  CHECK(dec.h_part == h);
}

TEST_CASE("frozen psi reproduces the OLS-initialized h part") {
  const Simulated train = sample(3, 300, 24);
  FitConfig cfg;
  cfg.delta = 0.0;
  cfg.optimizer.max_evals = 200;
  const FittedModel m = fit(train.data, cfg);
  auto [z, st] = validate_and_standardize(train.data);
  MatrixXd full(z.n(), 8);
  full << z.x_int(), z.x_uint();
  const VectorXd psi_ols = ols_fit(full, z.y(), true).segment(1, 2);
  CHECK(m.psi_init == psi_ols);
  const Decomposition dec = decompose(m, train.data.x_int(), train.data.x_uint());
  CHECK(dec.h_part == st.apply_int(train.data.x_int()) * psi_ols);
}

TEST_CASE("tiny bandwidth interpolates the training outcomes") {
  FittedModel m = shared_model();
  m.bandwidth = VectorXd::Constant(2, 1e-6);
  const Simulated train = sample(1, 600, 21);
  const VectorXd pred = predict(m, train.data.x_int(), train.data.x_uint());
  CHECK((pred - train.data.y()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("query order permutes predictions") {
  const Simulated test = sample(1, 120, 25);
  std::vector<Index> perm(120);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(25);
  std::shuffle(perm.begin(), perm.end(), rng);
  const Dataset shuffled = test.data.rows(perm);
  const VectorXd a = predict(shared_model(), test.data.x_int(), test.data.x_uint());
  const VectorXd b = predict(shared_model(), shuffled.x_int(), shuffled.x_uint());
  for (Index i = 0; i < 120; ++i) CHECK(b[i] == doctest::Approx(a[perm[i]]).epsilon(1e-13));
}

TEST_CASE("r part removes residual spread on a nonlinear surface") {
  const Simulated train = sample(1, 600, 21);
  const Decomposition dec = decompose(shared_model(), train.data.x_int(), train.data.x_uint());
  const VectorXd y = train.data.y();
  CHECK(sample_variance(y - dec.h_part - dec.r_part) < sample_variance(y - dec.h_part));
}

TEST_CASE("linear truth: close to OLS") {
  const Simulated base = sample(1, 2000, 26);
  std::mt19937_64 rng(926);  // not the simulation seed, or the noise repeats x_int
  const VectorXd y = base.data.x_int() * base.truth.psi + testing::gaussian(2000, 1, rng);
  const Dataset all(y, base.data.x_int(), base.data.x_uint());
  std::vector<Index> tr(1400), te(600);
  std::iota(tr.begin(), tr.end(), Index{0});
  std::iota(te.begin(), te.end(), Index{1400});
  const Dataset train = all.rows(tr), test = all.rows(te);

  FitConfig cfg;
  cfg.optimizer.max_evals = 300;
  cfg.optimizer.restarts = 0;
  const FittedModel m = fit(train, cfg);
  const double iml = rmse(predict(m, test.x_int(), test.x_uint()), test.y());

  MatrixXd xtr(1400, 8), xte(600, 8);
  xtr << train.x_int(), train.x_uint();
  xte << test.x_int(), test.x_uint();
  const double ols = rmse(ols_predict(xte, ols_fit(xtr, train.y(), true), true), test.y());
  CHECK(iml < 1.15 * ols);
}

TEST_CASE("prediction input checks") {
  const FittedModel& m = shared_model();
  CHECK_THROWS_AS(predict(m, MatrixXd::Zero(3, 2), MatrixXd::Zero(3, 5)), Error);
  CHECK_THROWS_AS(predict(m, MatrixXd::Zero(3, 2), MatrixXd::Zero(4, 6)), Error);
  MatrixXd bad = MatrixXd::Zero(3, 6);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  try {
    (void)predict(m, MatrixXd::Zero(3, 2), bad);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
}
