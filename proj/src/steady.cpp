#include "chlab/steady.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "chlab/neumann.hpp"

namespace chlab {

ScalarField stationary_phi_residual(const ScalarField& phi, const ScalarField& sigma,
                                    const ModelParams& mp) {
  require_same_grid(phi, sigma);
  ScalarField r = laplacian_neumann(phi);
  r *= -mp.B;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    r[i] += mp.A * psi_prime(phi[i], mp.potential) - mp.chi * sigma[i];
  }
  if (mp.alpha != 0.0) r.axpy(mp.alpha, inv_laplacian_zero_mean(remove_mean(phi)));
  // right-hand side A mean Psi'(phi) - chi mean sigma is exactly the mean of the rest
  return remove_mean(std::move(r));
}

SteadyReport stationary_residual(const ScalarField& phi, const ScalarField& sigma,
                                 const ModelParams& mp, double sigma_bar0, double tol) {
  SteadyReport rep;
  rep.residual_phi = dual_norm_h1p(stationary_phi_residual(phi, sigma, mp));
  ScalarField w = sigma;
  w.axpy(-mp.chi, phi);
  rep.residual_sigma = grad_norm(w);
  rep.mean_phi_err = std::abs(mean(phi) - mp.c0);
  rep.mean_sigma_err = std::abs(mean(sigma) - sigma_bar0);
  rep.delta_inf = 1.0 - phi.sup_norm();
  rep.converged = rep.residual_phi <= tol && rep.residual_sigma <= tol &&
                  rep.mean_phi_err <= tol && rep.mean_sigma_err <= tol;
  return rep;
}

ScalarField sigma_from_phi(const ScalarField& phi, const ModelParams& mp, double sigma_bar0) {
  ScalarField s = phi;
  s *= mp.chi;
  s += sigma_bar0 - mp.chi * mean(phi);
  return s;
}

RelaxResult relax_to_steady(const State& state0, const ModelParams& mp, const SolverConfig& cfg,
                            const SteadyTolerances& tol, const StopRequested& stop) {
  const auto clock0 = std::chrono::steady_clock::now();
  const double sigma_bar0 = mean(state0.sigma);
  RelaxResult out{state0, {}, {}};

  auto finish = [&](double rate) {
    out.report = stationary_residual(out.state.phi, out.state.sigma, mp, sigma_bar0, tol.residual);
    out.report.rate = rate;
    out.report.t_final = out.state.t;
    out.report.steps = out.state.step_index - state0.step_index;
    out.report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
  };

  if (stationary_residual(state0.phi, state0.sigma, mp, sigma_bar0, tol.residual).converged) {
    finish(0.0);
    return out;
  }

  const double t_stop = state0.t + tol.t_max;
  double rate = INFINITY;
  while (out.state.t < t_stop) {
    if (stop && stop()) break;
    State next = advance(out.state, mp, cfg);
    next.t = state0.t + static_cast<double>(next.step_index - state0.step_index) * cfg.dt;
    rate = (l2_norm(next.phi - next.prev_phi) + l2_norm(next.sigma - next.prev_sigma)) / cfg.dt;
    out.history.push_back(make_record(next, mp, false));
    out.state = std::move(next);
    if (rate <= tol.rate) break;
  }
  finish(rate);
  out.report.converged = out.report.converged && rate <= tol.rate;
  return out;
}

OmegaLimitReport omega_limit_probe(const std::vector<ProbeSample>& samples,
                                   const std::vector<std::pair<double, double>>& dissipation) {
  if (samples.size() < 3) throw std::invalid_argument("omega_limit_probe: need >= 3 samples");
  OmegaLimitReport rep;
  auto distance = [](const ProbeSample& a, const ProbeSample& b) {
    const double dp = l2_norm(a.phi - b.phi);
    const double ds = l2_norm(a.sigma - b.sigma);
    return std::sqrt(dp * dp + ds * ds);
  };
  for (std::size_t j = 0; j + 1 < samples.size(); ++j) {
    rep.consecutive_distances.push_back(distance(samples[j], samples[j + 1]));
    rep.distances_to_last.push_back(distance(samples[j], samples.back()));
    // left-endpoint rule per step: G at t_k covers (t_{k-1}, t_k]
    double acc = 0.0;
    double t_prev = samples[j].t;
    for (const auto& [t, g] : dissipation) {
      if (t <= samples[j].t || t > samples[j + 1].t) continue;
      acc += g * (t - t_prev);
      t_prev = t;
    }
    rep.window_dissipation.push_back(acc);
  }
  rep.distances_decreasing = true;
  rep.dissipation_decreasing = true;
  for (std::size_t j = 1; j < rep.consecutive_distances.size(); ++j) {
    if (!(rep.consecutive_distances[j] < rep.consecutive_distances[j - 1])) {
      rep.distances_decreasing = false;
    }
    if (!(rep.window_dissipation[j] <= rep.window_dissipation[j - 1])) {
      rep.dissipation_decreasing = false;
    }
  }
  return rep;
}

}  // namespace chlab
