#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chlab/field.hpp"
#include "chlab/potential.hpp"

namespace chlab {

/// Coefficients of the coupled phase/nutrient system.
struct ModelParams {
  double A = 1.0;
  double B = 1.0;
  double eps = 0.1;
  double chi = 0.0;
  double alpha = 0.1;
  double c0 = 0.0;
  PotentialParams potential;

  /// Hard constraint violations (A > 0, B > 0, eps >= 0, alpha >= 0, c0 in (-1,1), H1).
  std::vector<std::string> violations() const;
  /// Admissible but outside the analyzed regime (eps = 0 or alpha = 0).
  std::vector<std::string> warnings() const;
};

enum class Scheme { ExactLog, Regularized };

const char* to_string(Scheme s);
std::optional<Scheme> parse_scheme(const std::string& s);

struct SolverConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::ExactLog;
  double newton_tol = 1e-10;
  int newton_max_iters = 50;
  double barrier_margin = 1e-12;
  std::vector<double> kappa_schedule;
  double linear_rel_tol = 1e-8;
  int linear_max_iters = 500;

  std::vector<std::string> violations() const;
};

struct StepStats {
  int newton_iters = 0;
  int linear_iters = 0;
  int backtracks = 0;
  double residual = 0.0;
};

/// Solution snapshot. prev_* hold the previous accepted level (equal to the
/// current fields for an initial state) and mu is the chemical potential the
/// last step produced.
struct State {
  ScalarField phi;
  ScalarField sigma;
  ScalarField prev_phi;
  ScalarField prev_sigma;
  ScalarField mu;
  double t = 0.0;
  double dt = 0.0;  // step that produced this state, 0 for initial data
  long step_index = 0;
  StepStats stats;

  static State initial(ScalarField phi, ScalarField sigma, double t = 0.0);

  const Grid& grid() const { return phi.grid(); }
  /// Backward difference quotient (phi - prev_phi) / dt, zero for initial data.
  ScalarField phi_t() const;
};

/// Discrete Oono mean law: (m + dt alpha c0) / (1 + dt alpha).
double next_phi_mean(double phi_mean, const ModelParams& mp, double dt);

/// Scales weak-type data with ||phi||_inf <= 1 into the interior:
/// phi <- (1 - 1e-6) phi when ||phi||_inf > 1 - 1e-6. Throws OutOfDomain when ||phi||_inf > 1.
ScalarField admit_initial_phi(ScalarField phi);

/// The implicit phi-subproblem of one step:
///   (u - phi_old)/dt = Delta_h mu - alpha (u - c0),
///   mu = A F0'(u) - B Delta_h u + eps (u - phi_old)/dt - explicit_source,
/// where F0' is Psi0' (exact) or its kappa-regularization.
struct ImplicitProblem {
  ScalarField phi_old;
  ScalarField explicit_source;  // A theta0 phi_old + chi sigma_old for the time stepper
  double dt = 0.0;
  bool regularized = false;
};

struct FieldSolveResult {
  ScalarField phi;
  ScalarField mu;
  StepStats stats;
};

/// Mean-free residual in potential form: N R(u) with R the strong residual.
/// Its gradient norm equals the dual norm ||R||_{V0'}.
ScalarField implicit_residual(const ImplicitProblem& prob, const ScalarField& u,
                              const ModelParams& mp);

/// Chemical potential mu(u) of the subproblem.
ScalarField implicit_chemical_potential(const ImplicitProblem& prob, const ScalarField& u,
                                        const ModelParams& mp);

/// Damped Newton on the subproblem; linear systems by PCG with the
/// constant-coefficient operator (diagonal in cosine space) as preconditioner.
/// Exact-log iterates are kept inside ||u||_inf <= 1 - barrier_margin by backtracking.
/// Throws NewtonDiverged or BarrierBreach.
FieldSolveResult newton_field_solve(const ImplicitProblem& prob, const ModelParams& mp,
                                    const SolverConfig& cfg,
                                    const ScalarField* initial_guess = nullptr);

/// One step with the exact logarithmic potential.
State step(const State& state, const ModelParams& mp, const SolverConfig& cfg);

/// One step with Psi0' replaced by the kappa-regularization (kappa = mp.potential.kappa > 0).
State step_regularized(const State& state, const ModelParams& mp, const SolverConfig& cfg);

/// Dispatches on cfg.scheme.
State advance(const State& state, const ModelParams& mp, const SolverConfig& cfg);

using Observer = std::function<void(const State&)>;
using StopRequested = std::function<bool()>;

/// Steps until t >= t_end; the observer sees every accepted state.
/// When `stop` returns true the loop ends early with the last accepted state.
State run(const State& state0, const ModelParams& mp, const SolverConfig& cfg, double t_end,
          const Observer& observer = {}, const StopRequested& stop = {});

/// Growth rates of a cosine mode with -Delta eigenvalue q about (c0, sigma_bar):
/// eigenvalues of the 2x2 problem
///   lambda (1 + eps q) u = -q (A Psi''(c0) + B q) u + q chi v - alpha u,
///   lambda v = -q v + chi q u,
/// ordered by decreasing real part.
std::array<std::complex<double>, 2> dispersion_rates(const ModelParams& mp, double q);

}  // namespace chlab
