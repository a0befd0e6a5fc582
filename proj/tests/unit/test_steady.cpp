#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "chlab/diagnostics.hpp"
#include "chlab/experiments.hpp"
#include "chlab/neumann.hpp"
#include "chlab/steady.hpp"

namespace ch = chlab;
using ch::Grid;
using ch::ScalarField;
using ch::State;

TEST_CASE("constant steady states are exactly stationary for random admissible parameters") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid g({9, 7}, {1.0, 1.3});
  for (int draw = 0; draw < 50; ++draw) {
    ch::ModelParams mp;
    mp.A = 0.1 + 3.0 * u(rng);
    mp.B = 0.01 + 2.0 * u(rng);
    mp.eps = 0.01 + u(rng);
    mp.chi = -2.0 + 4.0 * u(rng);
    mp.alpha = 0.01 + 2.0 * u(rng);
    mp.c0 = -0.95 + 1.9 * u(rng);
    mp.potential.theta = 0.2 + 2.0 * u(rng);
    mp.potential.theta0 = mp.potential.theta + 0.05 + 2.0 * u(rng);
    REQUIRE(mp.violations().empty());
    const double sbar = -1.0 + 2.0 * u(rng);
    const auto rep = ch::stationary_residual(ScalarField(g, mp.c0), ScalarField(g, sbar), mp, sbar, 1e-12);
    CHECK(rep.residual_phi <= 1e-12);
    CHECK(rep.residual_sigma <= 1e-12);
    CHECK(rep.mean_phi_err <= 1e-12);
    CHECK(rep.mean_sigma_err <= 1e-12);
    CHECK(rep.converged);
    CHECK(rep.delta_inf == doctest::Approx(1.0 - std::abs(mp.c0)));
  }
}

TEST_CASE("stationary residual rejects phi outside the domain") {
  const Grid g = Grid::line(9, 1.0);
  ch::ModelParams mp;
  CHECK_THROWS_AS(ch::stationary_residual(ScalarField(g, 1.0), ScalarField(g), mp, 0.0), ch::OutOfDomain);
}

TEST_CASE("sigma from phi") {
  const Grid g = Grid::line(17, 1.0);
  ch::ModelParams mp;
  mp.chi = 0.0;
  const ScalarField phi = ch::random_fluctuation(g, 9, 1, 0.4);
  const ScalarField s0 = ch::sigma_from_phi(phi, mp, 0.3);
  for (std::size_t i = 0; i < s0.size(); ++i) CHECK(s0[i] == doctest::Approx(0.3).epsilon(1e-15));
  mp.chi = 1.0;
  const ScalarField s1 = ch::sigma_from_phi(phi, mp, 0.3);
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == doctest::Approx(phi[i] + 0.3).epsilon(1e-14));
  for (double chi : {-1.3, 0.4, 2.0}) {
    mp.chi = chi;
    ScalarField p = phi;
    p += 0.2;
    const auto rep = ch::stationary_residual(p, ch::sigma_from_phi(p, mp, -0.4), mp, -0.4);
    CHECK(rep.residual_sigma <= 1e-13);
    CHECK(rep.mean_sigma_err <= 1e-13);
  }
}

TEST_CASE("relaxation from the constant state stops immediately") {
  const Grid g = Grid::line(17, 1.0);
  ch::ModelParams mp;
  mp.c0 = 0.2;
  ch::SolverConfig cfg;
  const State s0 = State::initial(ScalarField(g, 0.2), ScalarField(g, 0.5));
  const auto rr = ch::relax_to_steady(s0, mp, cfg, {});
  CHECK(rr.report.converged);
  CHECK(rr.report.steps == 0);
  CHECK(rr.report.residual_phi <= 1e-12);
  CHECK(rr.history.empty());
}

TEST_CASE("stable relaxation reaches the constant state and the probe sees convergence") {
  const Grid g = Grid::line(33, 1.0);
  ch::ModelParams mp;
  mp.potential.theta = 1.0;
  mp.potential.theta0 = 1.5;
  mp.c0 = 0.7;
  mp.alpha = 1.0;
  mp.chi = 0.3;
  REQUIRE(ch::psi_second(mp.c0, mp.potential) > 0.0);
  ch::SolverConfig cfg;
  cfg.dt = 0.05;
  ScalarField phi = ch::random_fluctuation(g, 2, 1, 0.1);
  phi += 0.65;
  const State s0 = State::initial(phi, ch::random_fluctuation(g, 2, 2, 0.1));
  ch::SteadyTolerances tol;
  tol.t_max = 200.0;
  const auto rr = ch::relax_to_steady(s0, mp, cfg, tol);
  CHECK(rr.report.converged);
  CHECK(rr.report.residual_phi <= 1e-8);
  CHECK(rr.report.mean_phi_err <= 1e-8);
  CHECK(rr.report.delta_inf > 0.0);
  CHECK(rr.history.size() == static_cast<std::size_t>(rr.report.steps));

  // probe on a trajectory sampled every 2 time units
  std::vector<ch::ProbeSample> samples{{s0.t, s0.phi, s0.sigma}};
  std::vector<std::pair<double, double>> diss;
  ch::run(s0, mp, cfg, 10.0, [&](const State& st) {
    diss.emplace_back(st.t, ch::dissipation_G(st, mp));
    if (st.step_index % 40 == 0) samples.push_back({st.t, st.phi, st.sigma});
  });
  const auto rep = ch::omega_limit_probe(samples, diss);
  CHECK(rep.distances_decreasing);
  CHECK(rep.dissipation_decreasing);
  CHECK(rep.window_dissipation.back() <= 1e-10);
  CHECK(rep.distances_to_last.front() > rep.distances_to_last[1]);
}

TEST_CASE("omega-limit probe on a steady trajectory") {
  const Grid g = Grid::line(9, 1.0);
  const ScalarField p(g, 0.1), q(g, 0.2);
  std::vector<ch::ProbeSample> samples{{0.0, p, q}, {1.0, p, q}, {2.0, p, q}};
  const auto rep = ch::omega_limit_probe(samples, {{0.5, 0.0}, {1.5, 0.0}});
  for (double d : rep.consecutive_distances) CHECK(d == 0.0);
  for (double d : rep.distances_to_last) CHECK(d == 0.0);
  CHECK_THROWS_AS(ch::omega_limit_probe({samples[0], samples[1]}, {}), std::invalid_argument);
}
