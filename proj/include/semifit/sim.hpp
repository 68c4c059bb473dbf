#pragma once

// Simulation designs with known truth: two covariate cases crossed with four
// outcome models, p = 2 interpretable and q = 6 uninterpretable features.
//
//   h(x)      = x_int^T psi*
//   r1(z)     = z1^2 + z2^2
//   r2(z)     = z1 / (0.5 + (z2 + 1.5)^2),   z = x_uint^T gamma*
//   Model I   : Y = h + r1 + eps
//   Model II  : Y = h + r1 + |z1| |x_int,1| eps
//   Model III : Y = h + r2 + eps
//   Model IV  : Y = h + r2 + |z1| eps

#include "semifit/core.hpp"

#include <cstdint>
#include <string>

namespace semifit {

enum class SimCase { I, II };

struct SimSpec {
  SimCase sim_case = SimCase::I;
  int model = 1;
  Index n = 2000;
  std::uint64_t seed = 0;
  bool noiseless = false;  // outcome noise forced to zero; covariates unchanged

  void validate() const;
};

struct Simulated {
  Dataset data;
  Params truth;   // raw-scale psi* and gamma*
  VectorXd mean;  // E[Y | X] at each row
};

VectorXd true_psi();
MatrixXd true_gamma();

double r1(double z1, double z2);
double r2(double z1, double z2);

/// Standard normal CDF.
double normal_cdf(double x);

Simulated generate(const SimSpec& spec);

/// E[Y | X = x] for the spec's model.
double true_surface(const SimSpec& spec, const VectorXd& x_int, const VectorXd& x_uint);
VectorXd true_surface(const SimSpec& spec, const MatrixXd& x_int, const MatrixXd& x_uint);

SimCase parse_case(const std::string& text);
std::string to_string(SimCase c);

}  // namespace semifit
