// Conformal-factor formulation on one complex dimension: the coupled system
//   d/dt phi = -R + lambda + tau,         R = -e^{-phi} lap0(phi)
//   d/dt tau = kappa*LB(tau) - tau*(-R + lambda + tau)
// together with the derived curvature-evolution and combined-heat residual
// diagnostics, maximum-principle monitors, and the scalar comparison ODE.
#pragma once

#include <vector>

#include "lyz/geometry.hpp"

namespace lyz {

struct SurfaceState {
  Field phi;
  Field tau;
  double t = 0.0;
};

struct SurfaceParams {
  double lambda = -1.0;
  double kappa = 2.0;
};

// Both right-hand sides in one pass (shares R and the conformal factor).
void surface_rhs(const SurfaceState& s, const SurfaceParams& p, Field& dphi, Field& dtau);

Field rhs_phi(const SurfaceState& s, const SurfaceParams& p);
Field rhs_tau(const SurfaceState& s, const SurfaceParams& p);

// Sup-norm residual of the derived identity
//   dR/dt = LB(R) - LB(tau) - R*(-R + lambda + tau)
// sampled as a centered difference of two consecutive states, with the
// right-hand side evaluated on the averaged (midpoint) fields.
double r_evolution_residual(const SurfaceState& before, const SurfaceState& after,
                            const SurfaceParams& p);

// Same residual for W = R + tau/(kappa-1), which satisfies the pure heat
// identity dW/dt = LB(W) - W*(-R + lambda + tau). Throws KappaOneError when
// kappa = 1 (W is undefined there).
double combined_heat_residual(const SurfaceState& before, const SurfaceState& after,
                              const SurfaceParams& p);

struct MaxPrincipleRecord {
  double tau_min = 0.0;
  double tau_max = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double combined_max = 0.0;  // max of R + tau/(kappa-1); NaN at kappa = 1
  bool tau_positive = false;  // tau > 0 everywhere right now
  bool r_nonpositive = false; // R <= 0 everywhere right now
};
MaxPrincipleRecord max_principle_monitors(const SurfaceState& s, const SurfaceParams& p);

// Closed-form solution of the scalar comparison problem
//   f' = -(kappa/(kappa-1)) f^2 - lambda f, f(0) = a > 0,
// evaluated at the given times. If cap is non-null it receives the long-time
// bound C(a, lambda) = max(a, (kappa-1)|lambda|/kappa). Throws KappaRangeError
// for kappa <= 1.
std::vector<double> tau_ode_comparison(double a, double lambda, double kappa,
                                       const std::vector<double>& ts, double* cap = nullptr);

// Closed forms for spatially constant data: tau' = -tau(lambda + tau) and
// phi' = lambda + tau give tau(t) = 1/u(t) with u = (1/tau0 + 1/lambda)e^{lambda t}
// - 1/lambda, and phi(t) = phi0 + log(tau0 / tau(t)).
double constant_tau_solution(double tau0, double lambda, double t);
double constant_phi_solution(double phi0, double tau0, double lambda, double t);

}  // namespace lyz
