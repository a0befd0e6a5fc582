#pragma once

#include "chlab/field.hpp"

namespace chlab {

/// |Omega|^{-1} sum_i w_i f_i with trapezoidal weights.
double mean(const ScalarField& f);

/// f - mean(f)
ScalarField remove_mean(ScalarField f);

/// Weighted L2 inner product sum_i w_i f_i g_i.
double inner(const ScalarField& f, const ScalarField& g);
double l2_norm(const ScalarField& f);

/// Delta_h f with mirrored ghosts, second order per axis.
ScalarField laplacian_neumann(const ScalarField& f);

/// The inverse Neumann Laplacian on mean-zero data: u with -Delta_h u = f, mean(u) = 0.
/// Throws NonZeroMean when |mean(f)| > 1e-10 (1 + ||f||_inf).
ScalarField inv_laplacian_zero_mean(const ScalarField& f);

/// (I - Delta_h)^{-1} f
ScalarField helmholtz_inverse(const ScalarField& f);

/// (I - tau Delta_h)^{-1} f, tau >= 0. Used by the nutrient update.
ScalarField shifted_helmholtz_inverse(const ScalarField& f, double tau);

/// ||f||_{V0'} = <f, N f>^{1/2}. Throws NonZeroMean.
double dual_norm_v0(const ScalarField& f);

/// (||f - mean f||_{V0'}^2 + |mean f|^2)^{1/2}
double dual_norm_h1p(const ScalarField& f);

struct H1Products {
  double l2_inner = 0.0;
  double grad_inner = 0.0;
};

/// Weighted L2 and gradient inner products. The gradient pairing uses forward
/// differences on grid edges and satisfies <-Delta_h f, g> = grad_inner(f, g)
/// exactly (summation by parts). Throws GridMismatch.
H1Products h1_products(const ScalarField& f, const ScalarField& g);

double grad_inner(const ScalarField& f, const ScalarField& g);
double grad_norm(const ScalarField& f);

}  // namespace chlab
