#pragma once

#include <vector>

#include "chlab/diagnostics.hpp"

namespace chlab {

struct SteadyTolerances {
  double rate = 1e-9;      // ||dphi||/dt + ||dsigma||/dt
  double residual = 1e-8;  // every SteadyReport residual
  double t_max = 1e4;      // relaxation horizon beyond state0.t
};

struct SteadyReport {
  double residual_phi = 0.0;    // (H1)' norm of the phi-equation residual
  double residual_sigma = 0.0;  // ||grad(sigma - chi phi)||
  double mean_phi_err = 0.0;    // |mean phi - c0|
  double mean_sigma_err = 0.0;  // |mean sigma - mean sigma0|
  double delta_inf = 0.0;       // 1 - ||phi||_inf
  double rate = 0.0;            // last rate norm seen by the relaxation driver
  double t_final = 0.0;
  long steps = 0;
  bool converged = false;
  double wall_time = 0.0;
};

/// Residual field of the stationary phi-equation
///   -B Delta phi + A Psi'(phi) - chi sigma + alpha N(phi - mean phi)
///     - (A mean Psi'(phi) - chi mean sigma).
ScalarField stationary_phi_residual(const ScalarField& phi, const ScalarField& sigma,
                                    const ModelParams& mp);

/// Residual norms of the stationary system. `converged` is set when every
/// residual is within `tol`. Throws OutOfDomain for |phi| >= 1.
SteadyReport stationary_residual(const ScalarField& phi, const ScalarField& sigma,
                                 const ModelParams& mp, double sigma_bar0, double tol = 1e-8);

/// chi phi + (sigma_bar0 - chi mean phi): the unique sigma pairing with phi in
/// the stationary nutrient equation with the prescribed mean.
ScalarField sigma_from_phi(const ScalarField& phi, const ModelParams& mp, double sigma_bar0);

/// Runs the stepper until the rate norm drops below tol.rate (or t_max is
/// reached) and evaluates the stationary residual of the final state.
struct RelaxResult {
  State state;
  SteadyReport report;
  std::vector<DiagnosticsRecord> history;  // one record per accepted step
};

RelaxResult relax_to_steady(const State& state0, const ModelParams& mp, const SolverConfig& cfg,
                            const SteadyTolerances& tol, const StopRequested& stop = {});

struct ProbeSample {
  double t = 0.0;
  ScalarField phi;
  ScalarField sigma;
};

struct OmegaLimitReport {
  std::vector<double> consecutive_distances;  // L2 distance of (phi, sigma) between samples
  std::vector<double> distances_to_last;
  std::vector<double> window_dissipation;     // integral of G over [t_j, t_{j+1}]
  bool distances_decreasing = false;
  bool dissipation_decreasing = false;
};

/// Cauchy-type probe of sampled trajectory points. `dissipation` holds
/// (t, G) per step; windows are delimited by consecutive sample times.
/// Throws std::invalid_argument with fewer than 3 samples.
OmegaLimitReport omega_limit_probe(const std::vector<ProbeSample>& samples,
                                   const std::vector<std::pair<double, double>>& dissipation);

}  // namespace chlab
