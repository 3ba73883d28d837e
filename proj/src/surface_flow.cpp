#include "lyz/surface_flow.hpp"

#include <cmath>
#include <limits>

namespace lyz {

namespace {

Field exp_neg_pointwise(const Field& phi) {
  Field out(phi.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(-phi[i]);
  return out;
}

bool kappa_is_one(double kappa) { return std::abs(kappa - 1.0) < 1e-12; }

}  // namespace

void surface_rhs(const SurfaceState& s, const SurfaceParams& p, Field& dphi, Field& dtau) {
  Field eneg = exp_neg_pointwise(s.phi);
  Field lap_phi = laplacian_flat(s.phi);
  lap_phi *= -1.0;
  Field r = multiply(lap_phi, eneg);  // scalar curvature

  dphi = s.tau - r;
  dphi += p.lambda;

  Field lb_tau = multiply(laplacian_flat(s.tau), eneg);
  dtau = lb_tau * p.kappa - multiply(s.tau, dphi);
}

Field rhs_phi(const SurfaceState& s, const SurfaceParams& p) {
  Field dphi, dtau;
  surface_rhs(s, p, dphi, dtau);
  return dphi;
}

Field rhs_tau(const SurfaceState& s, const SurfaceParams& p) {
  Field dphi, dtau;
  surface_rhs(s, p, dphi, dtau);
  return dtau;
}

namespace {

// Residual of d/dt(X) = LB(X) - X * (-R + lambda + tau) for X built from the
// averaged fields by `build`, with the time derivative taken as the centered
// difference of X(before), X(after).
template <typename BuildX>
double heat_identity_residual(const SurfaceState& before, const SurfaceState& after,
                              const SurfaceParams& p, BuildX build) {
  const double dt = after.t - before.t;
  Field x_before = build(before);
  Field x_after = build(after);

  SurfaceState mid{(before.phi + after.phi) * 0.5, (before.tau + after.tau) * 0.5,
                   0.5 * (before.t + after.t)};
  Field x_mid = build(mid);
  Field fdot = rhs_phi(mid, p);
  Field theory = laplace_beltrami_conformal(x_mid, mid.phi) - multiply(x_mid, fdot);

  Field fd = (x_after - x_before) * (1.0 / dt);
  return sup_norm(fd - theory);
}

}  // namespace

double r_evolution_residual(const SurfaceState& before, const SurfaceState& after,
                            const SurfaceParams& p) {
  // dR/dt = LB(R) - LB(tau) - R*(-R + lambda + tau), centered at the midpoint.
  const double dt = after.t - before.t;
  Field r_before = scalar_curvature_conformal(before.phi);
  Field r_after = scalar_curvature_conformal(after.phi);

  SurfaceState mid{(before.phi + after.phi) * 0.5, (before.tau + after.tau) * 0.5,
                   0.5 * (before.t + after.t)};
  Field r_mid = scalar_curvature_conformal(mid.phi);
  Field fdot = rhs_phi(mid, p);
  Field theory = laplace_beltrami_conformal(r_mid, mid.phi)
                 - laplace_beltrami_conformal(mid.tau, mid.phi)
                 - multiply(r_mid, fdot);

  Field fd = (r_after - r_before) * (1.0 / dt);
  return sup_norm(fd - theory);
}

double combined_heat_residual(const SurfaceState& before, const SurfaceState& after,
                              const SurfaceParams& p) {
  if (kappa_is_one(p.kappa))
    throw KappaOneError("combined heat quantity undefined at kappa = 1");
  const double w = 1.0 / (p.kappa - 1.0);
  return heat_identity_residual(before, after, p, [&](const SurfaceState& s) {
    return scalar_curvature_conformal(s.phi) + s.tau * w;
  });
}

MaxPrincipleRecord max_principle_monitors(const SurfaceState& s, const SurfaceParams& p) {
  MaxPrincipleRecord rec;
  rec.tau_min = field_min(s.tau);
  rec.tau_max = field_max(s.tau);
  Field r = scalar_curvature_conformal(s.phi);
  rec.r_min = field_min(r);
  rec.r_max = field_max(r);
  if (kappa_is_one(p.kappa)) {
    rec.combined_max = std::numeric_limits<double>::quiet_NaN();
  } else {
    rec.combined_max = field_max(r + s.tau * (1.0 / (p.kappa - 1.0)));
  }
  rec.tau_positive = rec.tau_min > 0.0;
  rec.r_nonpositive = rec.r_max <= 0.0;
  return rec;
}

std::vector<double> tau_ode_comparison(double a, double lambda, double kappa,
                                       const std::vector<double>& ts, double* cap) {
  if (kappa <= 1.0)
    throw KappaRangeError("comparison ODE needs kappa > 1");
  if (!(a > 0.0))
    throw FlowError("comparison ODE needs a positive initial value");
  const double beta = kappa / (kappa - 1.0);
  std::vector<double> out(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double u;
    if (lambda == 0.0) {
      u = 1.0 / a + beta * ts[i];
    } else {
      u = (1.0 / a + beta / lambda) * std::exp(lambda * ts[i]) - beta / lambda;
    }
    out[i] = 1.0 / u;
  }
  if (cap) *cap = std::max(a, (kappa - 1.0) * std::abs(lambda) / kappa);
  return out;
}

double constant_tau_solution(double tau0, double lambda, double t) {
  if (lambda == 0.0) return 1.0 / (1.0 / tau0 + t);
  const double u = (1.0 / tau0 + 1.0 / lambda) * std::exp(lambda * t) - 1.0 / lambda;
  return 1.0 / u;
}

double constant_phi_solution(double phi0, double tau0, double lambda, double t) {
  return phi0 + std::log(tau0 / constant_tau_solution(tau0, lambda, t));
}

}  // namespace lyz
