// Metric-dependent geometry on the flat torus: conformal metrics (one complex
// dimension), potential metrics (one or two), scalar curvature, the evolving
// Laplace-Beltrami operator, volume densities, form traces, and the
// metric-equivalence monitor.
//
// Matrix convention: a real (1,1)-form beta is represented pointwise by the
// Hermitian matrix with trace normalized so that the flat form omega_0 maps to
// the identity. Under that normalization the matrix of i*ddbar(f) has trace
// laplacian_flat(f), and the volume ratio omega^n/omega_0^n is det of the
// metric matrix.
#pragma once

#include "lyz/grid.hpp"

namespace lyz {

// Hermitian 2x2 matrix field: [[a11, a12], [conj(a12), a22]], a12 = re12 + i*im12.
struct Herm2 {
  Field a11, a22, re12, im12;
};

// Matrix of i*ddbar(f) in the convention above (two complex dimensions).
Herm2 normalized_hessian(const Field& f);

Field herm2_trace(const Herm2& h);
// Pointwise determinant (no filtering; quadrature weight or log input).
Field herm2_det(const Herm2& h);
// Extreme eigenvalues over the whole grid.
void herm2_eigen_range(const Herm2& h, double& lo, double& hi);

// ---- conformal metric, one complex dimension: omega = e^phi omega_0 --------

// Scalar curvature R = -e^{-phi} laplacian_flat(phi) (flat background),
// dealiased for use in the dynamics.
Field scalar_curvature_conformal(const Field& phi);

// Laplace-Beltrami under e^phi omega_0: e^{-phi} laplacian_flat(f), dealiased.
Field laplace_beltrami_conformal(const Field& f, const Field& phi);

// Pointwise volume density e^phi (quadrature weight, not filtered).
Field conformal_weight(const Field& phi);

// Unfiltered variants for diagnostic quadratures. Exact identities such as
// integral(R * e^phi) = 0 hold only when the integrand keeps its alias band;
// the filtered versions above are for right-hand sides that feed the stepper.
Field scalar_curvature_conformal_pointwise(const Field& phi);
Field laplace_beltrami_conformal_pointwise(const Field& f, const Field& phi);
Field laplace_beltrami_potential_pointwise(const Field& f, const Field& varphi);
Field trace_form_potential_pointwise(const Field& varphi, double c, const Field& u);

// Smallest K >= 1 with K^-1 omega_0 <= omega <= K omega_0 and
// -K omega <= alpha <= K omega for alpha = tau * omega.
double k_equivalence_conformal(const Field& phi, const Field& tau);

// ---- potential metric, n in {1,2}: omega = omega_0 + i ddbar(varphi) -------

// Pointwise volume density omega^n/omega_0^n: 1 + laplacian_flat(varphi) for
// one complex dimension, det(I + hessian) for two. Not filtered.
Field volume_density(const Field& varphi);

// Smallest eigenvalue of the metric matrix over the grid.
double metric_min_eigenvalue(const Field& varphi);

// Throws MetricDegenerateError recording `when` if the smallest metric
// eigenvalue is <= 1e-8.
void require_metric_positive(const Field& varphi, double when);

// Laplace-Beltrami of f under the potential metric, dealiased.
Field laplace_beltrami_potential(const Field& f, const Field& varphi);

// Trace of the closed form c*omega_0 + i*ddbar(u) against the potential
// metric, dealiased. Traced against itself (c = 1, u = varphi) this returns
// the constant n_complex.
Field trace_form_potential(const Field& varphi, double c, const Field& u);

// Smallest K >= 1 with K^-1 omega_0 <= omega <= K omega_0 and
// -K omega <= alpha <= K omega, alpha = c*omega_0 + i*ddbar(u_alpha).
double k_equivalence_potential(const Field& varphi, double c, const Field& u_alpha);

// ---- form algebra for quadratures (two complex dimensions) -----------------
// Pointwise products throughout; these feed integrals, not the stepper.

// Metric matrix I + hessian(varphi).
Herm2 metric_form(const Field& varphi);

// Matrix of i d(phi) ^ dbar(phi) (rank one, 2 v v^* with v the (1,0) part of
// the gradient). Its trace is gradient_squared_flat(phi).
Herm2 gradient_form(const Field& phi);

// integral of a ^ b over the torus: (1/2) int [tr(a) tr(b) - tr(a b)].
// Normalized so that wedge_integral(metric_form(0), metric_form(0)) is the
// volume. The weighted variant integrates f * (a ^ b).
double wedge_integral(const Herm2& a, const Herm2& b);
double wedge_integral(const Herm2& a, const Herm2& b, const Field& weight);

}  // namespace lyz
