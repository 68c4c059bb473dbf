#include <doctest.h>

#include "semifit/nelder_mead.hpp"

#include <cmath>
#include <limits>

using namespace semifit;

TEST_CASE("minimizes a shifted quadratic") {
  VectorXd target(3);
  target << 1.0, -2.0, 0.5;
  int calls = 0;
  auto f = [&](const VectorXd& x) {
    ++calls;
    return (x - target).squaredNorm();
  };
  NelderMeadOptions opt;
  opt.f_tol = 1e-16;
  opt.x_tol = 1e-10;
  const auto r = nelder_mead(f, VectorXd::Zero(3), VectorXd::Constant(3, 0.5), opt);
  CHECK(r.converged);
  CHECK((r.x - target).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(r.evaluations == calls);
}

TEST_CASE("minimizes the Rosenbrock function") {
  auto f = [](const VectorXd& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  NelderMeadOptions opt;
  opt.f_tol = 1e-20;
  opt.x_tol = 1e-12;
  VectorXd x0(2);
  x0 << -1.2, 1.0;
  const auto r = nelder_mead(f, x0, VectorXd::Constant(2, 0.1), opt);
  CHECK(std::abs(r.x[0] - 1.0) < 1e-5);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-5);
  CHECK(r.f <= f(x0));
}

TEST_CASE("respects the evaluation budget") {
  auto f = [](const VectorXd& x) { return x.squaredNorm() + std::sin(50.0 * x.sum()); };
  NelderMeadOptions opt;
  opt.max_evals = 40;
  opt.f_tol = 1e-30;
  opt.x_tol = 1e-30;
  const auto r = nelder_mead(f, VectorXd::Ones(4), VectorXd::Constant(4, 1.0), opt);
  CHECK_FALSE(r.converged);
  CHECK(r.evaluations <= opt.max_evals + 4 + 1);
}

TEST_CASE("non-finite values act as walls") {
  auto f = [](const VectorXd& x) {
    if (x[0] < 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (x[0] - 0.3) * (x[0] - 0.3);
  };
  NelderMeadOptions opt;
  opt.f_tol = 1e-14;
  VectorXd x0(1);
  x0 << 2.0;
  const auto r = nelder_mead(f, x0, VectorXd::Constant(1, 3.0), opt);
  CHECK(std::isfinite(r.f));
  CHECK(std::abs(r.x[0] - 0.3) < 1e-4);
}

TEST_CASE("never returns worse than the start") {
  auto f = [](const VectorXd& x) { return std::abs(x[0]) + std::abs(x[1] - 1.0); };
  VectorXd x0(2);
  x0 << 0.0, 1.0;
  const auto r = nelder_mead(f, x0, VectorXd::Constant(2, 1.0), NelderMeadOptions{});
  CHECK(r.f <= 0.0);
  CHECK(r.x == x0);
}

TEST_CASE("zero-dimensional problem evaluates once") {
  int calls = 0;
  const auto r = nelder_mead([&](const VectorXd&) { return ++calls, 4.0; }, VectorXd(0),
                             VectorXd(0), NelderMeadOptions{});
  CHECK(calls == 1);
  CHECK(r.f == 4.0);
  CHECK(r.converged);
}

TEST_CASE("step size must match") {
  CHECK_THROWS_AS(nelder_mead([](const VectorXd&) { return 0.0; }, VectorXd::Zero(2),
                              VectorXd::Ones(3), NelderMeadOptions{}),
                  Error);
}
