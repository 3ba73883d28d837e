// Potential formulation of the coupled flow on the flat torus, n = 1 or 2.
//
// The metric is omega_0 + i ddbar(varphi) and the coupled form is
// alpha_0 - i ddbar(F).  With alpha_0 = c*omega_0 + i ddbar(u) the pair
// (varphi, F) evolves by
//
//   d varphi / dt = log(det ratio) - H0 + lambda*varphi - F
//   d F      / dt = kappa * (laplace_beltrami(F) - trace_form(alpha_0) + b/V)
//
// H0 is the flat-background potential of -alpha_0 - lambda*omega_0,
// normalized so integral(e^{H0}) = V.  The constant b is the class integral
// n * int alpha_0 ^ omega_0^{n-1}; dividing by V keeps the mean of dF/dt
// against the evolving volume form at zero for any period (b and b/V agree
// on the unit torus).

#pragma once

#include "lyz/geometry.hpp"

namespace lyz {

// Closed (1,1)-form coeff*omega_0 + i ddbar(potential_u).  Its class is
// coeff*[omega_0]; the exact part never contributes to class integrals.
struct ClosedForm {
  double coeff = 0.0;
  Field potential_u;

  ClosedForm(double coefficient, Field u)
      : coeff(coefficient), potential_u(std::move(u)) {}
  explicit ClosedForm(const Grid& grid, double coefficient = 0.0)
      : coeff(coefficient), potential_u(grid) {}
};

// n = 1 only: the form equals density * omega_0 with
// density = coeff + laplacian_flat(u).
Field closed_form_density(const ClosedForm& a);

// int alpha ^ omega_0^{n-1} by quadrature.  Equals coeff * V up to roundoff
// regardless of potential_u.
double class_integral(const ClosedForm& a);

struct PotentialState {
  Field varphi;
  Field F;
  double t = 0.0;

  PotentialState(Field v, Field f, double time = 0.0)
      : varphi(std::move(v)), F(std::move(f)), t(time) {}
  explicit PotentialState(const Grid& grid) : varphi(grid), F(grid) {}
};

// Static data of one flow: background class, normalized potential H0 and the
// class constant b.  Build with make_problem; the pieces are exposed for
// tests that want to assemble them separately.
struct FlowProblem {
  Grid grid;
  double lambda = -1.0;
  double kappa = 2.0;
  ClosedForm alpha0;
  Field H0;
  double b = 0.0;
  double V = 0.0;
};

// H0 = -u + c with c fixed by integral(e^{H0}) = V.  Throws
// CohomologyMismatchError unless the class of alpha0 is -lambda*[omega_0].
Field build_H0(const Grid& grid, double lambda, const ClosedForm& alpha0);

// b = n * int alpha0 ^ omega_0^{n-1}.
double build_b(const ClosedForm& alpha0, const Grid& grid);

FlowProblem make_problem(const Grid& grid, double lambda, double kappa,
                         const ClosedForm& alpha0);

// Flow right-hand sides.  Both check metric positivity and throw
// MetricDegenerateError tagged with s.t if it fails.
Field rhs_varphi(const PotentialState& s, const FlowProblem& p);
Field rhs_F(const PotentialState& s, const FlowProblem& p);

// Shared-work variant that validates once and fills both.
void potential_rhs(const PotentialState& s, const FlowProblem& p,
                   Field& dvarphi, Field& dF);

// sup |varphi + F|.  The sum stays bounded along the flow; logged per sample
// and checked for boundedness, not monotonicity.
double phi_plus_F_sup(const PotentialState& s);

// Sup norms of the two stationary-equation residuals, (sup|rhs_varphi|,
// sup|rhs_F| / kappa).  Both vanish exactly at a fixed point.
void stationarity_residual(const PotentialState& s, const FlowProblem& p,
                           double& metric_residual, double& form_residual);

// Mean of dF/dt against the evolving volume form, (1/V) int rhs_F rho.
// Computed with unfiltered pointwise products so the discrete quadrature
// reproduces the normalization that defines b; zero to roundoff for
// band-limited states.  Diagnostic only, the stepper uses the filtered rhs.
double rhs_F_mean(const PotentialState& s, const FlowProblem& p);

// Spatially constant data (u = 0, varphi0 and F0 constants): F stays at F0
// and varphi follows varphi' = lambda*varphi - F0.  Closed-form value at t.
double constant_potential_solution(double varphi0, double F0, double lambda,
                                   double t);

}  // namespace lyz
