#include "chlab/neumann.hpp"

#include <array>
#include <cmath>
#include <string>

#include "chlab/errors.hpp"

namespace chlab {

namespace {

std::array<std::size_t, 3> strides_of(const Grid& g) {
  std::array<std::size_t, 3> s{1, 1, 1};
  const auto n = g.n_per_axis();
  for (int a = 1; a < g.ndim(); ++a) s[a] = s[a - 1] * static_cast<std::size_t>(n[a - 1]);
  return s;
}

void require_zero_mean(const ScalarField& f, const char* op) {
  const double m = mean(f);
  if (std::abs(m) > 1e-10 * (1.0 + f.sup_norm())) {
    throw NonZeroMean(std::string(op) + ": argument has mean " + std::to_string(m) +
                      "; subtract the mean first");
  }
}

ScalarField apply_symbol_function(const ScalarField& f, double (*g)(double, double),
                                  double param) {
  const auto sym = f.grid().symbol();
  std::vector<double> mult(sym.size());
  for (std::size_t k = 0; k < sym.size(); ++k) mult[k] = g(sym[k], param);
  ScalarField out(f.grid());
  f.grid().apply_multiplier(f.values(), mult, out.values());
  return out;
}

}  // namespace

double mean(const ScalarField& f) {
  const auto w = f.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
  return s / f.grid().volume();
}

ScalarField remove_mean(ScalarField f) {
  f += -mean(f);
  return f;
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f, g);
  const auto w = f.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] * g[i];
  return s;
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

ScalarField laplacian_neumann(const ScalarField& f) {
  const Grid& grid = f.grid();
  const auto n = grid.n_per_axis();
  const auto stride = strides_of(grid);
  ScalarField out(grid);
  for (int a = 0; a < grid.ndim(); ++a) {
    const double inv_h2 = 1.0 / (grid.spacing(a) * grid.spacing(a));
    const std::size_t s = stride[a];
    const int na = n[a];
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      const int i = static_cast<int>((idx / s) % na);
      const double left = (i == 0) ? f[idx + s] : f[idx - s];
      const double right = (i == na - 1) ? f[idx - s] : f[idx + s];
      out[idx] += (left - 2.0 * f[idx] + right) * inv_h2;
    }
  }
  return out;
}

ScalarField inv_laplacian_zero_mean(const ScalarField& f) {
  require_zero_mean(f, "inv_laplacian_zero_mean");
  return apply_symbol_function(
      f, [](double lam, double) { return lam > 0.0 ? 1.0 / lam : 0.0; }, 0.0);
}

ScalarField helmholtz_inverse(const ScalarField& f) {
  return apply_symbol_function(f, [](double lam, double) { return 1.0 / (1.0 + lam); }, 0.0);
}

ScalarField shifted_helmholtz_inverse(const ScalarField& f, double tau) {
  return apply_symbol_function(
      f, [](double lam, double t) { return 1.0 / (1.0 + t * lam); }, tau);
}

double dual_norm_v0(const ScalarField& f) {
  const ScalarField u = inv_laplacian_zero_mean(f);
  return std::sqrt(std::max(0.0, inner(f, u)));
}

double dual_norm_h1p(const ScalarField& f) {
  const double m = mean(f);
  ScalarField fluct = f;
  fluct += -m;
  const double v = dual_norm_v0(fluct);
  return std::sqrt(v * v + m * m);
}

H1Products h1_products(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f, g);
  const Grid& grid = f.grid();
  const auto n = grid.n_per_axis();
  const auto w = grid.weights();
  const auto stride = strides_of(grid);
  H1Products out;
  out.l2_inner = inner(f, g);
  for (int a = 0; a < grid.ndim(); ++a) {
    const double h = grid.spacing(a);
    const std::size_t s = stride[a];
    const int na = n[a];
    double acc = 0.0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      const int i = static_cast<int>((idx / s) % na);
      if (i == na - 1) continue;
      // transverse weight = node weight with this axis' factor removed
      const double wa = (i == 0) ? 0.5 * h : h;
      const double transverse = w[idx] / wa;
      acc += transverse * (f[idx + s] - f[idx]) * (g[idx + s] - g[idx]) / h;
    }
    out.grad_inner += acc;
  }
  return out;
}

double grad_inner(const ScalarField& f, const ScalarField& g) {
  return h1_products(f, g).grad_inner;
}

double grad_norm(const ScalarField& f) { return std::sqrt(std::max(0.0, grad_inner(f, f))); }

}  // namespace chlab
