#include "chlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chlab/errors.hpp"
#include "chlab/neumann.hpp"

namespace chlab {

namespace {

double bulk_density(double r, const ModelParams& mp) {
  return mp.potential.kappa > 0.0 ? psi_reg(r, mp.potential) : psi(r, mp.potential);
}

void require_eps(const ModelParams& mp, const char* fn) {
  if (!(mp.eps > 0.0)) throw EpsZero(std::string(fn) + ": requires eps > 0");
}

ScalarField nutrient_flux_potential(const ScalarField& phi, const ScalarField& sigma,
                                    const ModelParams& mp) {
  ScalarField w = sigma;
  w.axpy(-mp.chi, phi);
  return w;
}

}  // namespace

double energy_E(const ScalarField& phi, const ScalarField& sigma, const ModelParams& mp) {
  require_same_grid(phi, sigma);
  const auto w = phi.grid().weights();
  double bulk = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    bulk += w[i] * (mp.A * bulk_density(phi[i], mp) - mp.chi * sigma[i] * phi[i] +
                    0.5 * sigma[i] * sigma[i]);
  }
  return bulk + 0.5 * mp.B * grad_inner(phi, phi);
}

double energy_E(const State& state, const ModelParams& mp) {
  return energy_E(state.phi, state.sigma, mp);
}

double dissipation_D(const State& state, const ModelParams& mp) {
  const ScalarField w = nutrient_flux_potential(state.phi, state.sigma, mp);
  const ScalarField pt = state.phi_t();
  return grad_inner(state.mu, state.mu) + grad_inner(w, w) + mp.eps * inner(pt, pt);
}

double energy_balance_signed(const State& state, const ModelParams& mp) {
  if (!(state.dt > 0.0)) return 0.0;
  const double e_new = energy_E(state.phi, state.sigma, mp);
  const double e_old = energy_E(state.prev_phi, state.prev_sigma, mp);
  ScalarField shifted = state.phi;
  shifted += -mp.c0;
  const double oono = mp.alpha * inner(shifted, state.mu);
  return e_new - e_old + state.dt * (dissipation_D(state, mp) + oono);
}

double energy_balance_residual(const State& state, const ModelParams& mp) {
  return std::abs(energy_balance_signed(state, mp));
}

double lyapunov_F(const State& state, const ModelParams& mp) {
  const double e = energy_E(state, mp);
  if (mp.alpha == 0.0) return e;
  const double d = dual_norm_v0(remove_mean(state.phi));
  return e + 0.5 * mp.alpha * d * d;
}

ScalarField tilde_mu(const State& state, const ModelParams& mp) {
  const ScalarField& phi = state.phi;
  ScalarField out = laplacian_neumann(phi);
  out *= -mp.B;
  const ScalarField pt = state.phi_t();
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out[i] += mp.A * psi_prime(phi[i], mp.potential) - mp.chi * state.sigma[i] + mp.eps * pt[i];
  }
  if (mp.alpha != 0.0) out.axpy(mp.alpha, inv_laplacian_zero_mean(remove_mean(phi)));
  return out;
}

double dissipation_G(const State& state, const ModelParams& mp) {
  const ScalarField mt = tilde_mu(state, mp);
  const ScalarField w = nutrient_flux_potential(state.phi, state.sigma, mp);
  const ScalarField pt = state.phi_t();
  return grad_inner(mt, mt) + grad_inner(w, w) + mp.eps * inner(pt, pt);
}

ScalarField tilde_h(const State& state, const ModelParams& mp) {
  require_eps(mp, "tilde_h");
  const ScalarField& phi = state.phi;
  const Grid& grid = phi.grid();
  const auto w = grid.weights();

  double psi_mean = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) psi_mean += w[i] * psi0_prime(phi[i], mp.potential);
  psi_mean /= grid.volume();
  psi_mean -= mp.potential.theta0 * mean(state.prev_phi);

  const ScalarField pt = state.phi_t();
  const double pt_mean = mean(pt);

  ScalarField out = remove_mean(state.prev_sigma);
  out *= mp.chi;
  out += mp.A * psi_mean + mp.eps * pt_mean;
  out.axpy(-1.0, inv_laplacian_zero_mean(remove_mean(pt)));
  if (mp.alpha != 0.0) out.axpy(-mp.alpha, inv_laplacian_zero_mean(remove_mean(phi)));
  out.axpy(mp.A * mp.potential.theta0, state.prev_phi);
  return out;
}

double htilde_sup(const State& state, const ModelParams& mp) {
  return tilde_h(state, mp).sup_norm();
}

DiagnosticsRecord make_record(const State& state, const ModelParams& mp, bool with_htilde) {
  DiagnosticsRecord r;
  r.t = state.t;
  r.phi_mean = mean(state.phi);
  r.sigma_mean = mean(state.sigma);
  r.E = energy_E(state, mp);
  r.F = mp.alpha == 0.0 ? r.E : r.E + 0.5 * mp.alpha * std::pow(dual_norm_v0(remove_mean(state.phi)), 2);
  r.D = state.dt > 0.0 ? dissipation_D(state, mp) : 0.0;
  if (state.dt > 0.0) {
    r.energy_balance_signed = energy_balance_signed(state, mp);
    r.energy_balance_residual = std::abs(r.energy_balance_signed);
  }
  r.min_phi = state.phi.min();
  r.max_phi = state.phi.max();
  r.delta = 1.0 - std::max(std::abs(r.min_phi), std::abs(r.max_phi));
  r.newton_iters = state.stats.newton_iters;
  const bool exact = mp.potential.kappa == 0.0 && state.phi.sup_norm() < 1.0;
  if (with_htilde && exact && mp.eps > 0.0) r.htilde_sup = htilde_sup(state, mp);
  if (exact) r.G = dissipation_G(state, mp);
  return r;
}

BarrierSample barrier_sample(const State& state, const ModelParams& mp) {
  return {state.t, state.phi.min(), state.phi.max(), htilde_sup(state, mp)};
}

BarrierTrace barrier_check(std::span<const BarrierSample> samples, const ModelParams& mp,
                           double delta0, double dt, double tolerance) {
  require_eps(mp, "barrier_check");
  if (samples.empty()) throw std::invalid_argument("barrier_check: empty trajectory");
  if (!(delta0 > 0.0 && delta0 <= 1.0)) {
    throw std::invalid_argument("barrier_check: delta0 must lie in (0,1]");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("barrier_check: dt must be > 0");
  const BarrierSample& first = samples.front();
  if (std::max(std::abs(first.min_phi), std::abs(first.max_phi)) > 1.0 - delta0 + tolerance) {
    std::ostringstream os;
    os << "barrier_check: initial data exceed 1 - delta0 = " << 1.0 - delta0;
    throw OutOfDomain(os.str());
  }

  BarrierTrace tr;
  tr.delta0 = delta0;
  tr.C_h = samples.size() > 1 ? 0.0 : first.htilde_sup;
  for (std::size_t j = 1; j < samples.size(); ++j) tr.C_h = std::max(tr.C_h, samples[j].htilde_sup);

  // eps (y - y_old)/dt + A Psi0'(y) = C  <=>  y + (A dt/eps) Psi0'(y) = y_old + dt C/eps
  const double lambda = mp.A * dt / mp.eps;
  const double push = dt * tr.C_h / mp.eps;
  double yp = 1.0 - delta0;
  double ym = -(1.0 - delta0);
  double sup_y = std::max(std::abs(yp), std::abs(ym));

  auto record = [&](const BarrierSample& s) {
    tr.t.push_back(s.t);
    tr.y_plus.push_back(yp);
    tr.y_minus.push_back(ym);
    tr.min_phi.push_back(s.min_phi);
    tr.max_phi.push_back(s.max_phi);
    const double excess = std::max(s.max_phi - yp, ym - s.min_phi);
    if (excess > tolerance) {
      tr.holds = false;
      ++tr.violations;
    }
    tr.worst_excess = std::max(tr.worst_excess, excess);
  };

  record(first);
  for (std::size_t j = 1; j < samples.size(); ++j) {
    const long substeps =
        std::max(1L, std::lround((samples[j].t - samples[j - 1].t) / dt));
    for (long k = 0; k < substeps; ++k) {
      yp = newton_scalar_solve(yp + push, lambda, mp.potential);
      ym = newton_scalar_solve(ym - push, lambda, mp.potential);
      sup_y = std::max(sup_y, std::max(std::abs(yp), std::abs(ym)));
    }
    record(samples[j]);
  }
  tr.delta = 1.0 - sup_y;
  return tr;
}

DualDistance dual_distance(const State& a, const State& b, const ModelParams& mp) {
  require_same_grid(a.phi, b.phi);
  const ScalarField dphi = a.phi - b.phi;
  const ScalarField dsigma = a.sigma - b.sigma;
  DualDistance d;
  d.d_phi = dual_norm_h1p(dphi);
  d.d_sigma = dual_norm_h1p(dsigma);
  const double l2 = l2_norm(dphi);
  d.d_total = std::sqrt(d.d_phi * d.d_phi + mp.eps * l2 * l2 + d.d_sigma * d.d_sigma);
  return d;
}

}  // namespace chlab
