#include <doctest.h>

#include <cmath>
#include <cstring>

#include "chlab/diagnostics.hpp"
#include "chlab/dynamics.hpp"
#include "chlab/errors.hpp"
#include "chlab/experiments.hpp"
#include "chlab/neumann.hpp"
#include "dense_oracle.hpp"

namespace ch = chlab;
using ch::Grid;
using ch::ScalarField;
using ch::State;

namespace {

ch::ModelParams model(double chi = 0.0, double alpha = 0.1, double eps = 0.1, double c0 = 0.0) {
  ch::ModelParams mp;
  mp.chi = chi;
  mp.alpha = alpha;
  mp.eps = eps;
  mp.c0 = c0;
  return mp;
}

ch::SolverConfig solver(double dt) {
  ch::SolverConfig cfg;
  cfg.dt = dt;
  return cfg;
}

State random_state(const Grid& g, std::uint64_t seed, double mean_phi, double amp,
                   double sigma_amp = 0.1) {
  ScalarField phi = ch::random_fluctuation(g, seed, 1, amp);
  phi += mean_phi;
  ScalarField sigma = ch::random_fluctuation(g, seed, 2, sigma_amp);
  sigma += 0.2;
  return State::initial(phi, sigma);
}

bool bit_equal(const ScalarField& a, const ScalarField& b) {
  return a.size() == b.size() &&
         std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("model parameter validation") {
  CHECK(model().violations().empty());
  ch::ModelParams mp = model();
  mp.B = 0.0;
  auto v = mp.violations();
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "H2: B must be > 0");
  mp = model();
  mp.c0 = 1.0;
  v = mp.violations();
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "H2: c0 must lie in (-1,1)");
  mp = model();
  mp.A = -1.0;
  mp.eps = -0.5;
  mp.potential.theta0 = 0.5;
  CHECK(mp.violations().size() == 3);
  CHECK(model(0.0, 0.0, 0.0).violations().empty());
  CHECK(model(0.0, 0.0, 0.0).warnings().size() == 2);
  CHECK(model().warnings().empty());
}

TEST_CASE("scheme names") {
  CHECK(ch::parse_scheme("exact-log") == ch::Scheme::ExactLog);
  CHECK(ch::parse_scheme("regularized") == ch::Scheme::Regularized);
  CHECK_FALSE(ch::parse_scheme("implicit").has_value());
  CHECK(std::string(ch::to_string(ch::Scheme::Regularized)) == "regularized");
  ch::SolverConfig cfg;
  CHECK(cfg.violations().empty());
  cfg.dt = 0.0;
  cfg.barrier_margin = 1e-3;
  CHECK(cfg.violations().size() == 2);
}

TEST_CASE("mean recursion and initial data admission") {
  CHECK(ch::next_phi_mean(0.5, model(0.0, 1.0), 0.1) == doctest::Approx(0.5 / 1.1).epsilon(1e-15));
  const Grid g = Grid::line(9, 1.0);
  ScalarField phi(g, 1.0 - 1e-7);
  phi[3] = -0.2;
  const ScalarField admitted = ch::admit_initial_phi(phi);
  CHECK(admitted.sup_norm() <= 1.0 - 1e-6);
  CHECK(admitted[3] == doctest::Approx(-0.2 * (1.0 - 1e-6)).epsilon(1e-15));
  ScalarField ok(g, 0.3);
  CHECK(bit_equal(ch::admit_initial_phi(ok), ok));
  phi[0] = 1.0 + 1e-9;
  CHECK_THROWS_AS(ch::admit_initial_phi(phi), ch::OutOfDomain);
}

TEST_CASE("one step of the mean law") {
  const Grid g = Grid::line(33, 1.0);
  ch::ModelParams mp = model(0.0, 1.0);
  State s = random_state(g, 4, 0.5, 0.2);
  const State n = ch::step(s, mp, solver(0.1));
  CHECK(ch::mean(n.phi) == doctest::Approx(0.5 / 1.1).epsilon(1e-12));
  CHECK(std::abs(ch::mean(n.sigma) - ch::mean(s.sigma)) < 1e-12);
  CHECK(n.step_index == 1);
  CHECK(n.t == doctest::Approx(0.1));
  CHECK(bit_equal(n.prev_phi, s.phi));
  CHECK(bit_equal(n.prev_sigma, s.sigma));
}

TEST_CASE("constant state is a fixed point for 100 steps") {
  for (const Grid& g : {Grid::line(17, 1.0), Grid({9, 8}, {1.0, 2.0})}) {
    for (double c0 : {0.0, 0.4, -0.8}) {
      ch::ModelParams mp = model(0.7, 0.3, 0.1, c0);
      State s = State::initial(ScalarField(g, c0), ScalarField(g, 0.25));
      for (int k = 0; k < 100; ++k) s = ch::step(s, mp, solver(0.05));
      CHECK((s.phi - ScalarField(g, c0)).sup_norm() < 1e-12);
      CHECK((s.sigma - ScalarField(g, 0.25)).sup_norm() < 1e-12);
    }
  }
}

TEST_CASE("step satisfies the nonlinear system and the mean laws for both schemes") {
  const Grid g({17, 9}, {1.0, 0.5});
  for (bool regularized : {false, true}) {
    ch::ModelParams mp = model(0.5, 0.4, 0.05, 0.1);
    if (regularized) mp.potential.kappa = 0.1;
    ch::SolverConfig cfg = solver(1e-3);
    cfg.scheme = regularized ? ch::Scheme::Regularized : ch::Scheme::ExactLog;
    State s = random_state(g, 7, 0.3, 0.6, 0.3);
    double m = ch::mean(s.phi);
    const double sbar = ch::mean(s.sigma);
    for (int k = 0; k < 20; ++k) {
      const State n = ch::advance(s, mp, cfg);
      m = ch::next_phi_mean(m, mp, cfg.dt);
      CHECK(std::abs(ch::mean(n.phi) - m) < 1e-12);
      CHECK(std::abs(ch::mean(n.sigma) - sbar) < 1e-12);
      ScalarField src = s.phi;
      src *= mp.A * mp.potential.theta0;
      src.axpy(mp.chi, s.sigma);
      const ch::ImplicitProblem prob{s.phi, src, cfg.dt, regularized};
      CHECK(ch::grad_norm(ch::implicit_residual(prob, n.phi, mp)) <= cfg.newton_tol);
      // mu returned by the step is the chemical potential of the accepted iterate
      CHECK((ch::implicit_chemical_potential(prob, n.phi, mp) - n.mu).sup_norm() < 1e-12);
      // strong form of the phi equation: (u - phi_old)/dt = Delta mu - alpha (u - c0)
      ScalarField lhs = n.phi - s.phi;
      lhs *= 1.0 / cfg.dt;
      ScalarField rhs = ch::laplacian_neumann(n.mu);
      ScalarField shifted = n.phi;
      shifted += -mp.c0;
      rhs.axpy(-mp.alpha, shifted);
      CHECK((lhs - rhs).sup_norm() < 1e-6 * (1.0 + lhs.sup_norm()));
      s = n;
    }
  }
}

TEST_CASE("scheme errors") {
  const Grid g = Grid::line(9, 1.0);
  State s = State::initial(ScalarField(g, 0.1), ScalarField(g));
  CHECK_THROWS_AS(ch::step_regularized(s, model(), solver(1e-3)), ch::KappaZero);
  s.phi[2] = 1.0 - 1e-13;
  CHECK_THROWS_AS(ch::step(s, model(), solver(1e-3)), ch::BarrierBreach);
  CHECK_THROWS_AS(ch::step(s, model(), solver(0.0)), std::invalid_argument);
}

TEST_CASE("newton solve from a fixed point needs no update") {
  const Grid g = Grid::line(17, 1.0);
  const ch::ModelParams mp = model(0.0, 0.1, 0.1, 0.3);
  const ScalarField phi(g, 0.3);
  ScalarField src = phi;
  src *= mp.A * mp.potential.theta0;
  const ch::ImplicitProblem prob{phi, src, 1e-2, false};
  const ch::FieldSolveResult r = ch::newton_field_solve(prob, mp, solver(1e-2));
  CHECK(r.stats.newton_iters <= 1);
  CHECK((r.phi - phi).sup_norm() < 1e-15);
}

TEST_CASE("adversarial source drives iterates to the barrier without leaving the domain") {
  const Grid g = Grid::line(17, 1.0);
  // weak gradient penalty so a single node can approach the barrier
  ch::ModelParams mp = model(0.0, 0.0, 0.1, 0.0);
  mp.B = 1e-6;
  ScalarField phi(g, 0.0);
  phi[8] = 1.0 - 1e-13;
  phi[0] = -0.2;
  phi[16] = -0.8;
  ch::SolverConfig cfg = solver(1.0);
  cfg.barrier_margin = 1e-14;
  cfg.newton_max_iters = 200;

  // root within ~1e-11 of the barrier
  ScalarField src(g, 0.0);
  src[8] = 13.0;
  src[7] = 5.0;
  const ch::FieldSolveResult r = ch::newton_field_solve({phi, src, 1.0, false}, mp, cfg);
  CHECK(r.stats.backtracks > 0);
  CHECK(r.phi.sup_norm() <= 1.0 - cfg.barrier_margin);
  CHECK(r.phi.max() > 1.0 - 1e-9);
  // residual floor: one ulp of phi times the local curvature psi0''
  const double floor = 1e-15 * mp.A * ch::psi0_second(r.phi.max(), mp.potential);
  CHECK(r.stats.residual <= 10.0 * floor);
  CHECK(r.stats.newton_iters < 50);

  // root closer to 1 than any double: the solve fails instead of leaving the domain
  src[8] = 1e4;
  src[7] = 1e3;
  CHECK_THROWS_AS(ch::newton_field_solve({phi, src, 1.0, false}, mp, cfg), ch::Error);
}

TEST_CASE("run bookkeeping and determinism") {
  const Grid g = Grid::line(33, 1.0);
  const ch::ModelParams mp = model(0.5, 0.2);
  const State s0 = random_state(g, 11, 0.1, 0.5);
  const State same = ch::run(s0, mp, solver(1e-3), s0.t);
  CHECK(bit_equal(same.phi, s0.phi));
  CHECK(same.step_index == 0);

  int seen = 0;
  const State a = ch::run(s0, mp, solver(1e-3), 0.05, [&](const State& st) {
    ++seen;
    CHECK(st.step_index == seen);
  });
  CHECK(seen == 50);
  CHECK(a.t == doctest::Approx(0.05).epsilon(1e-14));
  const State b = ch::run(s0, mp, solver(1e-3), 0.05);
  CHECK(bit_equal(a.phi, b.phi));
  CHECK(bit_equal(a.sigma, b.sigma));

  int calls = 0;
  const State c = ch::run(s0, mp, solver(1e-3), 0.05, {}, [&] { return ++calls > 10; });
  CHECK(c.step_index == 10);
}

TEST_CASE("energy is nonincreasing without the Oono term") {
  const Grid g = Grid::line(65, 1.0);
  for (double chi : {0.0, 0.5}) {
    for (double dt : {1e-3, 1e-4}) {
      const ch::ModelParams mp = model(chi, 0.0, 0.05);
      State s = random_state(g, 3, 0.0, 0.4, 0.2);
      double e = ch::energy_E(s, mp);
      for (int k = 0; k < 200; ++k) {
        s = ch::step(s, mp, solver(dt));
        const double en = ch::energy_E(s, mp);
        CHECK(en <= e + 1e-10 * (1.0 + std::abs(e)));
        e = en;
      }
    }
  }
}

TEST_CASE("dispersion rates closed forms") {
  ch::ModelParams mp = model(0.0, 0.3, 0.1, 0.2);
  auto r = ch::dispersion_rates(mp, 0.0);
  CHECK(r[0].real() == doctest::Approx(0.0));
  CHECK(r[1].real() == doctest::Approx(-0.3).epsilon(1e-15));

  mp = model(0.0, 0.0, 0.0, 0.2);
  for (double q : {0.5, 3.0, 40.0}) {
    r = ch::dispersion_rates(mp, q);
    const double l1 = -q * (mp.A * ch::psi_second(mp.c0, mp.potential) + mp.B * q);
    const double l2 = -q;
    const double hi = std::max(l1, l2), lo = std::min(l1, l2);
    CHECK(r[0].real() == doctest::Approx(hi).epsilon(1e-14));
    CHECK(r[1].real() == doctest::Approx(lo).epsilon(1e-14));
    CHECK(r[0].imag() == 0.0);
  }

  // A = B = 1, theta = 1, theta0 = 2, c0 = 0, chi = 1, eps = 0.1, alpha = 0.1, q = 1
  mp = model(1.0, 0.1, 0.1, 0.0);
  r = ch::dispersion_rates(mp, 1.0);
  // Psi''(0) = -1: m11 = (-(1)(-1 + 1) - 0.1)/1.1, m12 = 1/1.1, m21 = 1, m22 = -1
  const auto ev = oracle::eig2(-0.1 / 1.1, 1.0 / 1.1, 1.0, -1.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(r[i] - ev[i]) < 1e-14);
  }
  // frozen values of the oracle
  CHECK(ev[0].real() == doctest::Approx(0.51081363987475).epsilon(1e-12));
  CHECK(ev[1].real() == doctest::Approx(-1.60172273078384).epsilon(1e-12));

  // strong coupling
  mp = model(2.0, 0.0, 0.0, 0.0);
  mp.potential.theta0 = 1.2;
  mp.c0 = 0.0;
  r = ch::dispersion_rates(mp, 0.5);
  const double m11 = -0.5 * (-0.2 + 0.5);
  const auto ev2 = oracle::eig2(m11, 1.0, 1.0, -0.5);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(r[i] - ev2[i]) < 1e-14);
}

TEST_CASE("single-mode amplification follows the linear theory") {
  const Grid g = Grid::line(65, 1.0);
  const ch::ModelParams mp = model(0.8, 0.2, 0.1, 0.3);
  for (int k : {1, 2}) {
    const ch::ModeRates m = ch::measure_mode_rates(g, mp, solver(1e-4), k, 0.1);
    for (int i = 0; i < 2; ++i) {
      // implicit Euler bias of the raw rate is about theory^2 dt / 2
      CHECK(std::abs(m.raw[i] - m.theory[i]) <= std::norm(m.theory[i]) * 1e-4);
      CHECK(std::abs(m.measured[i] - m.theory[i]) <= 0.01 * std::abs(m.theory[i]));
    }
  }
}
