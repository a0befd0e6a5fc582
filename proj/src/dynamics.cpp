#include "chlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chlab/errors.hpp"
#include "chlab/neumann.hpp"

namespace chlab {

std::vector<std::string> ModelParams::violations() const {
  std::vector<std::string> out;
  if (!(A > 0.0)) out.emplace_back("H2: A must be > 0");
  if (!(B > 0.0)) out.emplace_back("H2: B must be > 0");
  if (!(eps >= 0.0)) out.emplace_back("H2: eps must be >= 0");
  if (!(alpha >= 0.0)) out.emplace_back("H2: alpha must be >= 0");
  if (!std::isfinite(chi)) out.emplace_back("H2: chi must be a finite real");
  if (!(c0 > -1.0 && c0 < 1.0)) out.emplace_back("H2: c0 must lie in (-1,1)");
  for (auto& v : potential.violations()) out.push_back(std::move(v));
  return out;
}

std::vector<std::string> ModelParams::warnings() const {
  std::vector<std::string> out;
  if (eps == 0.0) out.emplace_back("H2 expects eps > 0; barrier diagnostics are unavailable");
  if (alpha == 0.0) out.emplace_back("H2 expects alpha > 0; running the mass-conserving case");
  return out;
}

const char* to_string(Scheme s) {
  return s == Scheme::ExactLog ? "exact-log" : "regularized";
}

std::optional<Scheme> parse_scheme(const std::string& s) {
  if (s == "exact-log") return Scheme::ExactLog;
  if (s == "regularized") return Scheme::Regularized;
  return std::nullopt;
}

std::vector<std::string> SolverConfig::violations() const {
  std::vector<std::string> out;
  if (!(dt > 0.0)) out.emplace_back("dt must be > 0");
  if (!(newton_tol > 0.0)) out.emplace_back("newton_tol must be > 0");
  if (newton_max_iters < 1) out.emplace_back("newton_max_iters must be >= 1");
  if (!(barrier_margin > 0.0 && barrier_margin <= 1e-6)) {
    out.emplace_back("barrier_margin must lie in (0, 1e-6]");
  }
  for (double k : kappa_schedule) {
    if (!(k > 0.0)) out.emplace_back("kappa_schedule entries must be > 0");
  }
  return out;
}

State State::initial(ScalarField phi, ScalarField sigma, double t) {
  require_same_grid(phi, sigma);
  ScalarField prev_phi = phi;
  ScalarField prev_sigma = sigma;
  ScalarField mu(phi.grid());
  return State{std::move(phi), std::move(sigma), std::move(prev_phi), std::move(prev_sigma),
               std::move(mu), t, 0.0, 0, {}};
}

ScalarField State::phi_t() const {
  ScalarField d = phi - prev_phi;
  if (dt > 0.0) {
    d *= 1.0 / dt;
  } else {
    d *= 0.0;
  }
  return d;
}

double next_phi_mean(double phi_mean, const ModelParams& mp, double dt) {
  return (phi_mean + dt * mp.alpha * mp.c0) / (1.0 + dt * mp.alpha);
}

ScalarField admit_initial_phi(ScalarField phi) {
  const double sup = phi.sup_norm();
  if (!(sup <= 1.0)) {
    std::ostringstream os;
    os << "initial phi has ||phi||_inf = " << sup << " > 1";
    throw OutOfDomain(os.str());
  }
  if (sup > 1.0 - 1e-6) phi *= 1.0 - 1e-6;
  return phi;
}

namespace {

double f0_prime(double r, const ModelParams& mp, bool regularized) {
  return regularized ? psi0_prime_reg(r, mp.potential) : psi0_prime(r, mp.potential);
}

double f0_second(double r, const ModelParams& mp, bool regularized) {
  return regularized ? psi0_second_reg(r, mp.potential) : psi0_second(r, mp.potential);
}

/// Pieces of the subproblem that stay fixed during the Newton iteration.
struct SubproblemData {
  const ImplicitProblem& prob;
  const ModelParams& mp;
  double target_mean = 0.0;
  double eps_dt = 0.0;
  std::vector<double> stiff_symbol;  // B lam + (1/dt + alpha)/lam, 0 for the mean mode
  ScalarField fixed;                 // -P[eps phi_old / dt + g] - N(phi_old)/dt

  SubproblemData(const ImplicitProblem& p, const ModelParams& m)
      : prob(p), mp(m), fixed(p.phi_old.grid()) {
    const double dt = prob.dt;
    target_mean = next_phi_mean(mean(prob.phi_old), mp, dt);
    eps_dt = mp.eps / dt;
    const auto sym = prob.phi_old.grid().symbol();
    stiff_symbol.resize(sym.size());
    const double c = 1.0 / dt + mp.alpha;
    for (std::size_t k = 0; k < sym.size(); ++k) {
      stiff_symbol[k] = sym[k] > 0.0 ? mp.B * sym[k] + c / sym[k] : 0.0;
    }
    ScalarField lin = prob.phi_old;
    lin *= eps_dt;
    lin += prob.explicit_source;
    fixed = remove_mean(std::move(lin));
    fixed *= -1.0;
    ScalarField n_old = inv_laplacian_zero_mean(remove_mean(prob.phi_old));
    fixed.axpy(-1.0 / dt, n_old);
  }

  ScalarField stiff(const ScalarField& v) const {
    ScalarField out(v.grid());
    v.grid().apply_multiplier(v.values(), stiff_symbol, out.values());
    return out;
  }

  ScalarField residual(const ScalarField& u) const {
    ScalarField local(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) {
      local[i] = mp.A * f0_prime(u[i], mp, prob.regularized) + eps_dt * u[i];
    }
    ScalarField out = remove_mean(std::move(local));
    out += stiff(u);
    out += fixed;
    return out;
  }
};

/// J v = P[(A F0''(u) + eps/dt) v] + S v on mean-free v.
class Jacobian {
 public:
  Jacobian(const SubproblemData& d, const ScalarField& u) : d_(d), diag_(u.grid()) {
    double acc = 0.0;
    const auto w = u.grid().weights();
    for (std::size_t i = 0; i < u.size(); ++i) {
      diag_[i] = d.mp.A * f0_second(u[i], d.mp, d.prob.regularized) + d.eps_dt;
      acc += w[i] / diag_[i];
    }
    // harmonic mean: a few nodes near the barrier must not dominate the scale
    const double mean_diag = u.grid().volume() / acc;
    precond_.resize(d.stiff_symbol.size());
    const auto sym = u.grid().symbol();
    for (std::size_t k = 0; k < precond_.size(); ++k) {
      precond_[k] = sym[k] > 0.0 ? 1.0 / (mean_diag + d.stiff_symbol[k]) : 0.0;
    }
  }

  ScalarField apply(const ScalarField& v) const {
    ScalarField local(v.grid());
    for (std::size_t i = 0; i < v.size(); ++i) local[i] = diag_[i] * v[i];
    ScalarField out = remove_mean(std::move(local));
    out += d_.stiff(v);
    return out;
  }

  ScalarField precondition(const ScalarField& r) const {
    ScalarField out(r.grid());
    r.grid().apply_multiplier(r.values(), precond_, out.values());
    return out;
  }

 private:
  const SubproblemData& d_;
  ScalarField diag_;
  std::vector<double> precond_;
};

/// PCG in the weighted inner product on mean-free fields. Returns iterations used.
int pcg_solve(const Jacobian& jac, const ScalarField& rhs, ScalarField& x, double rel_tol,
              int max_iters) {
  x = ScalarField(rhs.grid());
  ScalarField r = remove_mean(rhs);
  const double rhs_norm = l2_norm(r);
  if (rhs_norm == 0.0) return 0;
  ScalarField z = jac.precondition(r);
  ScalarField p = z;
  double rz = inner(r, z);
  for (int it = 1; it <= max_iters; ++it) {
    const ScalarField ap = jac.apply(p);
    const double pap = inner(p, ap);
    if (!(pap > 0.0)) return it;
    const double step = rz / pap;
    x.axpy(step, p);
    r.axpy(-step, ap);
    if (l2_norm(r) <= rel_tol * rhs_norm) return it;
    z = jac.precondition(r);
    const double rz_new = inner(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  return max_iters;
}

ScalarField interior_guess(const ScalarField& phi_old, double target_mean, double margin,
                           bool regularized) {
  ScalarField spread = remove_mean(phi_old);
  ScalarField u = spread;
  u += target_mean;
  if (regularized) return u;
  const double limit = 1.0 - std::max(margin, 1e-9);
  if (u.sup_norm() <= limit) return u;
  // shrink the fluctuation toward the (interior) target mean
  double s = 1.0;
  for (std::size_t i = 0; i < spread.size(); ++i) {
    const double d = spread[i];
    if (d > 0.0) s = std::min(s, (limit - target_mean) / d);
    if (d < 0.0) s = std::min(s, (-limit - target_mean) / d);
  }
  s = std::max(0.0, 0.999 * s);
  u = spread;
  u *= s;
  u += target_mean;
  return u;
}

}  // namespace

ScalarField implicit_residual(const ImplicitProblem& prob, const ScalarField& u,
                              const ModelParams& mp) {
  return SubproblemData(prob, mp).residual(u);
}

ScalarField implicit_chemical_potential(const ImplicitProblem& prob, const ScalarField& u,
                                        const ModelParams& mp) {
  ScalarField mu = laplacian_neumann(u);
  mu *= -mp.B;
  const double eps_dt = mp.eps / prob.dt;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu[i] += mp.A * f0_prime(u[i], mp, prob.regularized) - prob.explicit_source[i] +
             eps_dt * (u[i] - prob.phi_old[i]);
  }
  return mu;
}

FieldSolveResult newton_field_solve(const ImplicitProblem& prob, const ModelParams& mp,
                                    const SolverConfig& cfg, const ScalarField* initial_guess) {
  require_same_grid(prob.phi_old, prob.explicit_source);
  const SubproblemData data(prob, mp);
  const bool exact = !prob.regularized;
  const double limit = 1.0 - cfg.barrier_margin;

  ScalarField u = initial_guess != nullptr
                      ? *initial_guess
                      : interior_guess(prob.phi_old, data.target_mean, cfg.barrier_margin,
                                       prob.regularized);
  if (initial_guess != nullptr) {
    u += data.target_mean - mean(u);
    if (exact && !(u.sup_norm() <= limit)) {
      u = interior_guess(prob.phi_old, data.target_mean, cfg.barrier_margin, false);
    }
  }

  StepStats stats;
  ScalarField F = data.residual(u);
  double res = grad_norm(F);
  while (!(res <= cfg.newton_tol)) {
    if (stats.newton_iters >= cfg.newton_max_iters) {
      std::ostringstream os;
      os << "Newton did not converge in " << cfg.newton_max_iters
         << " iterations (residual " << res << ")";
      throw NewtonDiverged(os.str());
    }
    ++stats.newton_iters;
    const Jacobian jac(data, u);
    ScalarField rhs = F;
    rhs *= -1.0;
    ScalarField delta(u.grid());
    stats.linear_iters += pcg_solve(jac, rhs, delta, cfg.linear_rel_tol, cfg.linear_max_iters);
    // correction below round-off: the residual sits at its floating-point floor
    if (delta.sup_norm() <= 1e-14 * (1.0 + u.sup_norm())) break;

    double t = 1.0;
    if (exact) {
      // fraction to the boundary: stop short of the barrier by a fixed ratio
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (delta[i] > 0.0) t = std::min(t, 0.995 * (limit - u[i]) / delta[i]);
        if (delta[i] < 0.0) t = std::min(t, 0.995 * (-limit - u[i]) / delta[i]);
      }
    }
    bool accepted = false;
    bool barrier_blocked = !(t > 0.0);
    for (int halving = 0; halving < 60 && t > 0.0; ++halving, t *= 0.5) {
      ScalarField cand = u;
      cand.axpy(t, delta);
      if (exact && !(cand.sup_norm() <= limit)) {
        barrier_blocked = true;
        ++stats.backtracks;
        continue;
      }
      barrier_blocked = false;
      ScalarField Fc = data.residual(cand);
      const double rc = grad_norm(Fc);
      if (rc <= (1.0 - 1e-4 * t) * res || rc <= cfg.newton_tol) {
        u = std::move(cand);
        F = std::move(Fc);
        res = rc;
        accepted = true;
        break;
      }
      ++stats.backtracks;
    }
    if (!accepted) {
      std::ostringstream os;
      if (barrier_blocked) {
        os << "barrier safeguard exhausted: no admissible iterate within ||phi||_inf <= "
           << limit;
        throw BarrierBreach(os.str());
      }
      os << "Newton stagnated at residual " << res;
      throw NewtonDiverged(os.str());
    }
  }
  u += data.target_mean - mean(u);
  stats.residual = res;
  ScalarField mu = implicit_chemical_potential(prob, u, mp);
  return {std::move(u), std::move(mu), stats};
}

namespace {

State step_impl(const State& state, const ModelParams& mp, const SolverConfig& cfg,
                bool regularized) {
  const double dt = cfg.dt;
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  if (!regularized && !(state.phi.sup_norm() <= 1.0 - cfg.barrier_margin)) {
    throw BarrierBreach("step: current phi violates ||phi||_inf <= 1 - barrier_margin");
  }
  if (regularized && !(mp.potential.kappa > 0.0)) {
    throw KappaZero("step_regularized: kappa must be > 0");
  }

  ScalarField source = state.phi;
  source *= mp.A * mp.potential.theta0;
  source.axpy(mp.chi, state.sigma);
  ImplicitProblem prob{state.phi, std::move(source), dt, regularized};
  FieldSolveResult sol = newton_field_solve(prob, mp, cfg);

  // nutrient: (I - dt Delta_h) dsigma = dt Delta_h (sigma_old - chi phi_new)
  ScalarField w = state.sigma;
  w.axpy(-mp.chi, sol.phi);
  ScalarField rhs = laplacian_neumann(w);
  rhs *= dt;
  ScalarField dsigma = remove_mean(shifted_helmholtz_inverse(rhs, dt));
  ScalarField sigma_new = state.sigma;
  sigma_new += dsigma;

  State next{std::move(sol.phi), std::move(sigma_new), state.phi, state.sigma,
             std::move(sol.mu), 0.0, dt, state.step_index + 1, sol.stats};
  next.t = state.t + dt;
  if (!next.phi.all_finite() || !next.sigma.all_finite()) {
    throw NewtonDiverged("step produced non-finite values");
  }
  return next;
}

}  // namespace

State step(const State& state, const ModelParams& mp, const SolverConfig& cfg) {
  return step_impl(state, mp, cfg, false);
}

State step_regularized(const State& state, const ModelParams& mp, const SolverConfig& cfg) {
  return step_impl(state, mp, cfg, true);
}

State advance(const State& state, const ModelParams& mp, const SolverConfig& cfg) {
  return cfg.scheme == Scheme::ExactLog ? step(state, mp, cfg) : step_regularized(state, mp, cfg);
}

State run(const State& state0, const ModelParams& mp, const SolverConfig& cfg, double t_end,
          const Observer& observer, const StopRequested& stop) {
  State state = state0;
  const double t0 = state0.t;
  const long k0 = state0.step_index;
  // step count from the time span; tolerate round-off in t_end - t0
  const double span = (t_end - t0) / cfg.dt;
  const long steps = span <= 0.0 ? 0 : static_cast<long>(std::ceil(span - 1e-9));
  for (long k = 1; k <= steps; ++k) {
    if (stop && stop()) break;
    state = advance(state, mp, cfg);
    state.t = t0 + static_cast<double>(k) * cfg.dt;
    state.step_index = k0 + k;
    if (observer) observer(state);
  }
  return state;
}

std::array<std::complex<double>, 2> dispersion_rates(const ModelParams& mp, double q) {
  const double curvature = psi_second(mp.c0, mp.potential);
  const double den = 1.0 + mp.eps * q;
  const double m11 = (-q * (mp.A * curvature + mp.B * q) - mp.alpha) / den;
  const double m12 = q * mp.chi / den;
  const double m21 = mp.chi * q;
  const double m22 = -q;
  const double tr = m11 + m22;
  const double det = m11 * m22 - m12 * m21;
  const double disc = tr * tr - 4.0 * det;
  std::complex<double> l1;
  std::complex<double> l2;
  if (disc < 0.0) {
    const double im = 0.5 * std::sqrt(-disc);
    l1 = {0.5 * tr, im};
    l2 = {0.5 * tr, -im};
  } else {
    // roots of l^2 - tr l + det without cancellation
    const double big = 0.5 * (tr + std::copysign(std::sqrt(disc), tr));
    l1 = big;
    l2 = big != 0.0 ? det / big : 0.0;
  }
  if (l2.real() > l1.real()) std::swap(l1, l2);
  return {l1, l2};
}

}  // namespace chlab
