#pragma once

#include <string>
#include <vector>

namespace chlab {

/// Parameters of the logarithmic potential
///   Psi(r) = (theta/2)[(1-r)ln(1-r) + (1+r)ln(1+r)] + (theta0/2)(1-r^2)
/// and of its kappa-regularization (kappa = 0 selects the exact potential).
struct PotentialParams {
  double theta = 1.0;
  double theta0 = 2.0;
  double a0 = 0.5;
  double kappa = 0.0;

  /// theta0 - theta, must be positive.
  double K() const { return theta0 - theta; }

  /// Human-readable list of violated constraints; empty when valid.
  std::vector<std::string> violations() const;
};

// Convex singular part, Psi0(0) = 0.
double psi0(double r, const PotentialParams& p);
double psi0_prime(double r, const PotentialParams& p);
double psi0_second(double r, const PotentialParams& p);

// Full double-well potential.
double psi(double r, const PotentialParams& p);
double psi_prime(double r, const PotentialParams& p);
double psi_second(double r, const PotentialParams& p);

/// Psi0' on |r| <= 1 - kappa, extended by its tangent lines outside. Defined on all of R.
double psi0_prime_reg(double r, const PotentialParams& p);
/// Derivative of psi0_prime_reg (constant outside the knots).
double psi0_second_reg(double r, const PotentialParams& p);
/// Antiderivative of psi0_prime_reg vanishing at 0.
double psi0_reg(double r, const PotentialParams& p);
/// psi0_reg(r) + (theta0/2)(1 - r^2)
double psi_reg(double r, const PotentialParams& p);

/// Solves r + lambda * Psi0'(r) = c for r in (-1, 1), lambda > 0.
/// Roots closer to +-1 than one ulp are returned as the nearest interior double.
double newton_scalar_solve(double c, double lambda, const PotentialParams& p);

}  // namespace chlab
