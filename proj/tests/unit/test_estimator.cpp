#include <doctest.h>

#include "helpers.hpp"
#include "semifit/estimator.hpp"
#include "semifit/metrics.hpp"
#include "semifit/sim.hpp"

#include <cmath>
#include <numeric>

using namespace semifit;

namespace {

struct Standardized {
  Dataset data;
  Params truth;
};

Standardized standardized_truth(const Simulated& sim) {
  auto [z, s] = validate_and_standardize(sim.data);
  return {z, standardized_params(sim.truth, s)};
}

Simulated noiseless_model1(Index n, std::uint64_t seed) {
  SimSpec spec;
  spec.model = 1;
  spec.n = n;
  spec.seed = seed;
  spec.noiseless = true;
  return generate(spec);
}

}  // namespace

TEST_CASE("A function tiles powers of x_uint") {
  VectorXd xi(1), xu(2);
  xi << 3;
  xu << 1, 2;
  VectorXd a1 = a_function(xi, xu, 1);
  REQUIRE(a1.size() == 3);
  CHECK(a1 == (VectorXd(3) << 3, 1, 2).finished());
  VectorXd a2 = a_function(xi, xu, 2);
  CHECK(a2 == (VectorXd(5) << 3, 1, 2, 1, 4).finished());

  MatrixXd xim(2, 1), xum(2, 2);
  xim << 3, -1;
  xum << 1, 2, 0.5, -3;
  const MatrixXd am = a_matrix(xim, xum, 2, AChoice::PolynomialTile);
  CHECK(am.row(0).transpose() == a2);
  CHECK(am(1, 4) == 9.0);
}

TEST_CASE("gamma chart") {
  MatrixXd e = MatrixXd::Identity(3, 2);
  CHECK((reparam_gamma(e) - e).cwiseAbs().maxCoeff() < 1e-15);
  MatrixXd u(3, 2);
  u << 2, 0, 0, 3, 0, 0;
  CHECK((reparam_gamma(u) - e).cwiseAbs().maxCoeff() < 1e-15);

  SUBCASE("dependent columns are nudged apart") {
    MatrixXd dep(3, 2);
    dep << 1, 1, 1, 1, 0, 0;
    const MatrixXd g = reparam_gamma(dep, 9);
    CHECK(orthonormality_residual(g) < 1e-10);
  }
  SUBCASE("random charts stay on the manifold") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
      const MatrixXd g = reparam_gamma(testing::gaussian(6, 2, rng, 3.0));
      CHECK(orthonormality_residual(g) < 1e-12);
      CHECK(g.cwiseAbs().maxCoeff() <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("psi chart") {
  VectorXd init(2);
  init << 0.4, -0.1;
  std::mt19937_64 rng(5);
  const VectorXd u = testing::gaussian(2, 1, rng, 10.0);
  CHECK(reparam_psi(u, init, 0.0) == init);
  CHECK(reparam_psi(VectorXd::Zero(2), init, 0.3) == init);
  const VectorXd sat = reparam_psi(VectorXd::Constant(2, 1e6), init, 0.05);
  CHECK(sat[0] < init[0] + 0.05);
  CHECK(sat[0] == doctest::Approx(init[0] + 0.05 * (1.0 - 1e-12)).epsilon(1e-15));
  const VectorXd neg = reparam_psi(VectorXd::Constant(2, -1e6), init, 0.05);
  CHECK(neg[1] > init[1] - 0.05);
  CHECK_THROWS_AS(reparam_psi(VectorXd::Zero(3), init, 0.1), Error);
}

TEST_CASE("free vector flattening round-trips") {
  std::mt19937_64 rng(6);
  FreeVector f;
  f.u_psi = testing::gaussian(2, 1, rng);
  f.u_gamma = testing::gaussian(6, 2, rng);
  const FreeVector g = FreeVector::unflatten(f.flatten(), 2, 6, 2);
  CHECK(g.u_psi == f.u_psi);
  CHECK(g.u_gamma == f.u_gamma);
  CHECK_THROWS_AS(FreeVector::unflatten(f.flatten(), 2, 6, 3), Error);
}

TEST_CASE("estimating residual at the truth shrinks with n on noiseless data") {
  const Standardized big = standardized_truth(noiseless_model1(5000, 1));
  const Standardized small = standardized_truth(noiseless_model1(1000, 1));
  const VectorXd e = estimating_residual(big.truth, big.data);
  CHECK(e.size() == 2 + 6 * 2);
  CHECK(e.norm() < estimating_residual(small.truth, small.data).norm());

  EstimatingEquation eq(big.data, 2);
  ObjectiveContext ctx{&eq, big.truth.psi, 0.2, std::nullopt, 0};
  FreeVector free{VectorXd::Zero(2), big.truth.gamma};
  const double obj = objective(free, ctx);
  CHECK(obj >= 0.0);
  CHECK(obj == doctest::Approx(e.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("purely linear outcome gives a near-zero residual") {
  Simulated sim = noiseless_model1(5000, 2);
  const VectorXd y = sim.data.x_int() * sim.truth.psi;
  Dataset lin(y, sim.data.x_int(), sim.data.x_uint());
  auto [z, st] = validate_and_standardize(lin);
  const Params truth = standardized_params(sim.truth, st);
  CHECK(estimating_residual(truth, z).norm() < 0.02);
  CHECK(dr_probe(z, truth, DrMode::DropAExpectation) < 0.05);
  CHECK(dr_probe(z, truth, DrMode::DropR) < 0.05);
}

TEST_CASE("centered factor vanishes when A is a function of the projection") {
  std::mt19937_64 rng(7);
  const Index n = 400;
  MatrixXd xu(n, 3);
  xu.leftCols(2) = testing::gaussian(n, 2, rng);
  xu.col(2) = xu.col(0).cwiseProduct(xu.col(1));
  MatrixXd xi(n, 1);
  xi.col(0) = xu.col(0) + xu.col(1).array().square().matrix();
  VectorXd y = testing::gaussian(n, 1, rng);
  Dataset data(y, xi, xu);
  EstimatingEquation eq(data, 2);
  Params params{VectorXd::Ones(1), MatrixXd::Identity(3, 2)};
  const Nuisances nu = eq.nuisances(params, VectorXd::Constant(2, 1e-5));
  CHECK(nu.a_centered.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(eq.residual(params, VectorXd::Constant(2, 1e-5)).norm() < 1e-8);
}

TEST_CASE("objective is invariant to row order") {
  Simulated sim = [] {
    SimSpec spec;
    spec.model = 3;
    spec.n = 300;
    spec.seed = 8;
    return generate(spec);
  }();
  auto [z, st] = validate_and_standardize(sim.data);
  const Params truth = standardized_params(sim.truth, st);
  std::vector<Index> perm(static_cast<std::size_t>(z.n()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(8);
  std::shuffle(perm.begin(), perm.end(), rng);
  const Dataset zp = z.rows(perm);
  const double a = estimating_residual(truth, z).squaredNorm();
  const double b = estimating_residual(truth, zp).squaredNorm();
  CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, a));
}

TEST_CASE("double robustness probes at the truth") {
  const Standardized s = standardized_truth(noiseless_model1(5000, 3));
  Simulated sim = noiseless_model1(5000, 3);
  auto [z, st] = validate_and_standardize(sim.data);
  const VectorXd r_true = sim.mean - z.x_int() * s.truth.psi;
  CHECK(dr_probe(s.data, s.truth, DrMode::DropAExpectation, r_true) < 0.05);
  // the kernel r is not exact, so the unmodified probe is larger
  CHECK(dr_probe(s.data, s.truth, DrMode::DropR) > 0.0);
  EstimatingEquation eq(s.data, 2);
  CHECK_THROWS_AS(eq.probe(s.truth, DrMode::DropAExpectation, VectorXd::Zero(3)), Error);
}

TEST_CASE("fit honours the chart constraints") {
  SimSpec spec;
  spec.model = 1;
  spec.n = 300;
  spec.seed = 10;
  const Simulated sim = generate(spec);
  FitConfig cfg;
  cfg.optimizer.max_evals = 600;
  cfg.optimizer.restarts = 1;
  cfg.seed = 10;

  const FittedModel m = fit(sim.data, cfg);
  CHECK(orthonormality_residual(m.params.gamma) <= 1e-8);
  CHECK(m.params.gamma.cwiseAbs().maxCoeff() <= 1.0);
  CHECK((m.params.psi - m.psi_init).cwiseAbs().maxCoeff() < cfg.delta);
  CHECK(m.objective_value <= m.initial_objective);
  CHECK(m.evaluations <= cfg.optimizer.max_evals + 16);
  CHECK(m.train_proj.cols() == 2);
  CHECK(m.bandwidth.size() == 2);

  cfg.delta = 0.0;
  const FittedModel frozen = fit(sim.data, cfg);
  CHECK(frozen.params.psi == frozen.psi_init);
  CHECK(frozen.objective_value <= frozen.initial_objective);
}

TEST_CASE("fit is deterministic") {
  SimSpec spec;
  spec.model = 3;
  spec.n = 200;
  spec.seed = 11;
  const Simulated sim = generate(spec);
  FitConfig cfg;
  cfg.optimizer.max_evals = 300;
  cfg.seed = 4;
  const FittedModel a = fit(sim.data, cfg);
  const FittedModel b = fit(sim.data, cfg);
  CHECK(a.params.gamma == b.params.gamma);
  CHECK(a.params.psi == b.params.psi);
  CHECK(a.objective_value == b.objective_value);
}

TEST_CASE("fit rejects bad configurations") {
  SimSpec spec;
  spec.n = 50;
  const Simulated sim = generate(spec);
  FitConfig cfg;
  cfg.d = 6;
  CHECK_THROWS_WITH_AS(fit(sim.data, cfg), "d must be < q", Error);
  cfg.d = 2;
  cfg.delta = -1;
  CHECK_THROWS_WITH_AS(fit(sim.data, cfg), "delta must be nonnegative", Error);
}
