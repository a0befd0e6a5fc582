#include "chlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "chlab/errors.hpp"

namespace chlab {

namespace {

void require_open_interval(double r, const char* fn) {
  if (!(std::abs(r) < 1.0)) {
    std::ostringstream os;
    os << fn << ": argument " << r << " outside (-1,1)";
    throw OutOfDomain(os.str());
  }
}

void require_kappa(const PotentialParams& p, const char* fn) {
  if (!(p.kappa > 0.0)) {
    throw KappaZero(std::string(fn) + ": regularization needs kappa > 0");
  }
}

}  // namespace

std::vector<std::string> PotentialParams::violations() const {
  std::vector<std::string> out;
  if (!(theta > 0.0)) out.emplace_back("H1: theta must be > 0");
  if (!(theta0 - theta > 0.0)) out.emplace_back("H1: theta0 - theta := K must be > 0");
  if (!(a0 > 0.0 && a0 < 1.0)) out.emplace_back("H1: a0 must lie in (0,1)");
  if (!(kappa >= 0.0 && kappa < a0)) out.emplace_back("kappa must lie in [0, a0)");
  return out;
}

double psi0(double r, const PotentialParams& p) {
  if (!(std::abs(r) <= 1.0)) {
    std::ostringstream os;
    os << "psi0: argument " << r << " outside [-1,1]";
    throw OutOfDomain(os.str());
  }
  // (1 -+ r) ln(1 -+ r) with the 0 ln 0 = 0 limit
  const double a = (r == 1.0) ? 0.0 : (1.0 - r) * std::log1p(-r);
  const double b = (r == -1.0) ? 0.0 : (1.0 + r) * std::log1p(r);
  return 0.5 * p.theta * (a + b);
}

double psi0_prime(double r, const PotentialParams& p) {
  require_open_interval(r, "psi0_prime");
  return p.theta * std::atanh(r);
}

double psi0_second(double r, const PotentialParams& p) {
  require_open_interval(r, "psi0_second");
  return p.theta / ((1.0 - r) * (1.0 + r));
}

double psi(double r, const PotentialParams& p) {
  return psi0(r, p) + 0.5 * p.theta0 * (1.0 - r * r);
}

double psi_prime(double r, const PotentialParams& p) { return psi0_prime(r, p) - p.theta0 * r; }

double psi_second(double r, const PotentialParams& p) { return psi0_second(r, p) - p.theta0; }

double psi0_prime_reg(double r, const PotentialParams& p) {
  require_kappa(p, "psi0_prime_reg");
  const double knot = 1.0 - p.kappa;
  if (r > knot) return psi0_prime(knot, p) + psi0_second(knot, p) * (r - knot);
  if (r < -knot) return psi0_prime(-knot, p) + psi0_second(-knot, p) * (r + knot);
  return psi0_prime(r, p);
}

double psi0_second_reg(double r, const PotentialParams& p) {
  require_kappa(p, "psi0_second_reg");
  const double knot = 1.0 - p.kappa;
  const double rc = std::max(-knot, std::min(knot, r));
  return psi0_second(rc, p);
}

double psi0_reg(double r, const PotentialParams& p) {
  require_kappa(p, "psi0_reg");
  const double knot = 1.0 - p.kappa;
  if (std::abs(r) <= knot) return psi0(r, p);
  const double k = (r > 0.0) ? knot : -knot;
  const double d = r - k;
  return psi0(k, p) + psi0_prime(k, p) * d + 0.5 * psi0_second(k, p) * d * d;
}

double psi_reg(double r, const PotentialParams& p) {
  return psi0_reg(r, p) + 0.5 * p.theta0 * (1.0 - r * r);
}

double newton_scalar_solve(double c, double lambda, const PotentialParams& p) {
  if (!(lambda > 0.0)) throw std::invalid_argument("newton_scalar_solve: lambda must be > 0");
  const double lt = lambda * p.theta;
  const double tol = 1e-12 * (1.0 + std::abs(c));

  // Substituting r = tanh(s) turns the problem into tanh(s) + lt*s = c on all of R,
  // strictly increasing, with the root bracketed by (c -+ 1) / lt.
  double lo = (c - 1.0) / lt;
  double hi = (c + 1.0) / lt;
  double s = c / (1.0 + lt);  // linearized guess, inside the bracket
  s = std::max(lo, std::min(hi, s));

  int it = 0;
  for (; it < 100; ++it) {
    const double th = std::tanh(s);
    const double g = th + lt * s - c;
    if (std::abs(g) <= 0.25 * tol) break;
    if (g > 0.0) hi = s; else lo = s;
    const double dg = (1.0 - th) * (1.0 + th) + lt;
    double next = s - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(s))) {
      s = next;
      break;
    }
    s = next;
  }
  if (it == 100) {
    throw NoConvergence("newton_scalar_solve: no convergence in 100 iterations");
  }

  constexpr double kTop = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  double r = std::tanh(s);
  r = std::max(-kTop, std::min(kTop, r));

  // Polish in r: tanh loses relative accuracy of 1 - |r| near the poles.
  for (int k = 0; k < 3; ++k) {
    const double g = r + lambda * psi0_prime(r, p) - c;
    if (std::abs(g) <= tol) break;
    double next = r - g / (1.0 + lambda * psi0_second(r, p));
    next = std::max(-kTop, std::min(kTop, next));
    if (next == r) break;
    r = next;
  }
  return r;
}

}  // namespace chlab
