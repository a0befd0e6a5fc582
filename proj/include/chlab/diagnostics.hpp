#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chlab/dynamics.hpp"

namespace chlab {

/// Per-step scalars. The CSV writer emits every field except G and
/// energy_balance_signed.
struct DiagnosticsRecord {
  double t = 0.0;
  double phi_mean = 0.0;
  double sigma_mean = 0.0;
  double E = 0.0;
  double F = 0.0;
  double D = 0.0;
  double energy_balance_residual = 0.0;
  double min_phi = 0.0;
  double max_phi = 0.0;
  double delta = 0.0;
  int newton_iters = 0;
  double htilde_sup = 0.0;
  double G = 0.0;
  double energy_balance_signed = 0.0;
};

/// Free energy
///   E = int (A Psi(phi) - chi sigma phi) + (B/2)||grad phi||^2 + (1/2)||sigma||^2.
/// Uses the regularized potential when mp.potential.kappa > 0, otherwise the
/// exact one (throws OutOfDomain for |phi| > 1).
double energy_E(const ScalarField& phi, const ScalarField& sigma, const ModelParams& mp);
double energy_E(const State& state, const ModelParams& mp);

/// D = ||grad mu||^2 + ||grad(sigma - chi phi)||^2 + eps ||phi_t||^2 with the
/// stepper's mu and the backward difference quotient.
double dissipation_D(const State& state, const ModelParams& mp);

/// E(n+1) - E(n) + dt (D + alpha int (phi - c0) mu) for the step that produced `state`.
double energy_balance_signed(const State& state, const ModelParams& mp);
double energy_balance_residual(const State& state, const ModelParams& mp);

/// F = E + (alpha/2) ||phi - mean phi||_{V0'}^2
double lyapunov_F(const State& state, const ModelParams& mp);

/// mu~ = A Psi'(phi) - B Delta phi - chi sigma + eps phi_t + alpha N(phi - mean phi)
ScalarField tilde_mu(const State& state, const ModelParams& mp);

/// G = ||grad mu~||^2 + ||grad(sigma - chi phi)||^2 + eps ||phi_t||^2
double dissipation_G(const State& state, const ModelParams& mp);

/// Right-hand side h~ of eps phi_t - B Delta phi + A Psi0'(phi) = h~:
///   chi (sigma - mean sigma) + A mean(Psi'(phi)) + eps mean(phi_t)
///   - N(phi_t - mean phi_t) - alpha N(phi - mean phi) + A theta0 phi.
/// The sigma and theta0 terms are read at the previous level, matching the
/// stepper's explicit treatment. Throws EpsZero when eps = 0.
ScalarField tilde_h(const State& state, const ModelParams& mp);
double htilde_sup(const State& state, const ModelParams& mp);

/// Full record for `state`; the energy balance needs a state produced by a step.
DiagnosticsRecord make_record(const State& state, const ModelParams& mp, bool with_htilde);

struct BarrierSample {
  double t = 0.0;
  double min_phi = 0.0;
  double max_phi = 0.0;
  double htilde_sup = 0.0;
};

BarrierSample barrier_sample(const State& state, const ModelParams& mp);

struct BarrierTrace {
  std::vector<double> t;
  std::vector<double> y_plus;
  std::vector<double> y_minus;
  std::vector<double> min_phi;
  std::vector<double> max_phi;
  double C_h = 0.0;
  double delta0 = 0.0;
  /// 1 - sup_t max(|y+|, |y-|)
  double delta = 0.0;
  bool holds = true;
  std::size_t violations = 0;
  double worst_excess = 0.0;
};

/// Integrates eps y' + A Psi0'(y) = +-C_h, y(0) = +-(1 - delta0) by implicit
/// Euler at step dt and checks y- <= min phi <= max phi <= y+ at every sample.
/// C_h is the supremum of htilde_sup over the samples after the first.
/// Throws EpsZero when eps = 0 and OutOfDomain when the first sample is not
/// within 1 - delta0.
BarrierTrace barrier_check(std::span<const BarrierSample> samples, const ModelParams& mp,
                           double delta0, double dt, double tolerance = 1e-9);

struct DualDistance {
  double d_phi = 0.0;
  double d_sigma = 0.0;
  double d_total = 0.0;
};

/// d_total^2 = ||dphi||_{(H1)'}^2 + eps ||dphi||^2 + ||dsigma||_{(H1)'}^2. Throws GridMismatch.
DualDistance dual_distance(const State& a, const State& b, const ModelParams& mp);

}  // namespace chlab
