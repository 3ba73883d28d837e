#include "lyz/functionals.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "lyz/errors.hpp"

namespace lyz {

namespace {

constexpr double kKappaTol = 1e-12;

void require_tau_positive(const Field& tau, const char* what) {
  if (field_min(tau) <= 0.0)
    throw NonPositiveTauError(std::string(what) + ": tau is not strictly positive");
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Unfiltered |grad f|^2_0 for quadratures (the grid op filters its output
// because it feeds right-hand sides).
Field grad_sq_pointwise(const Field& f) {
  const Grid& g = f.grid();
  Field acc(g, 0.0);
  for (int a = 0; a < g.real_axes(); ++a) {
    Field d = derivative(f, a);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i] * d[i];
  }
  acc *= 0.5;
  return acc;
}

Field log_pointwise(const Field& f, const char* what) {
  Field out(f.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(f[i] > 0.0))
      throw NonFiniteError(std::string(what) + ": non-positive density");
    out[i] = std::log(f[i]);
  }
  return out;
}

Herm2 flat_form(const Grid& g) {
  return Herm2{Field(g, 1.0), Field(g, 1.0), Field(g, 0.0), Field(g, 0.0)};
}

// Gauss-Legendre nodes and weights on [0, 1], by Newton iteration on the
// Legendre recurrence.
void gauss_legendre_unit(int k, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(k);
  weights.resize(k);
  for (int i = 0; i < k; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = k * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = 0.5 * (1.0 + x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

double i_minus_j(const Field& varphi) {
  return i_functional(varphi) - j_functional(varphi);
}

}  // namespace

double liouville_entropy_E(const SurfaceState& s, const SurfaceParams& p) {
  return liouville_entropy_E(s, p, Field(s.phi.grid(), 0.0));
}

double liouville_entropy_E(const SurfaceState& s, const SurfaceParams& p,
                           const Field& R0) {
  require_tau_positive(s.tau, "liouville_entropy_E");
  Field gsq = grad_sq_pointwise(s.phi);
  Field integrand(s.phi.grid());
  for (std::size_t i = 0; i < integrand.size(); ++i) {
    const double w = std::exp(s.phi[i]);
    integrand[i] = 0.5 * gsq[i] + R0[i] * s.phi[i]
                   + (-p.lambda - s.tau[i] + xlogx(s.tau[i])) * w;
  }
  return integrate(integrand);
}

double dE_dt_theory(const SurfaceState& s, const SurfaceParams& p) {
  require_tau_positive(s.tau, "dE_dt_theory");
  Field r = rhs_phi(s, p);
  Field gtau = grad_sq_pointwise(s.tau);
  Field integrand(s.phi.grid());
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = r[i] * r[i] * std::exp(s.phi[i]) + p.kappa * gtau[i] / s.tau[i];
  return -integrate(integrand);
}

double q_functional(const SurfaceState& s, const SurfaceParams& p) {
  Field r = rhs_phi(s, p);
  Field gtau = grad_sq_pointwise(s.tau);
  Field integrand(s.phi.grid());
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = r[i] * r[i] * std::exp(s.phi[i]) + gtau[i];
  return integrate(integrand);
}

double enhanced_E_hat(const SurfaceState& s, const SurfaceParams& p) {
  const double e = liouville_entropy_E(s, p);
  Field rr = scalar_curvature_conformal_pointwise(s.phi);
  Field integrand(s.phi.grid());
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = rr[i] * rr[i] / s.tau[i] * std::exp(s.phi[i]);
  return e + integrate(integrand);
}

double dE_hat_dt_theory(const SurfaceState& s, const SurfaceParams& p) {
  if (std::abs(p.kappa - 1.0) >= kKappaTol)
    throw KappaNotOneError("dE_hat_dt_theory: identity requires kappa = 1");
  require_tau_positive(s.tau, "dE_hat_dt_theory");
  const Grid& g = s.phi.grid();

  Field r = rhs_phi(s, p);
  Field rr = scalar_curvature_conformal_pointwise(s.phi);
  Field gtau = grad_sq_pointwise(s.tau);

  // |grad R - (1/2 + R/tau) grad tau|^2_0, axis by axis.
  Field cross(g, 0.0);
  for (int a = 0; a < g.real_axes(); ++a) {
    Field dR = derivative(rr, a);
    Field dT = derivative(s.tau, a);
    for (std::size_t i = 0; i < cross.size(); ++i) {
      const double v = dR[i] - (0.5 + rr[i] / s.tau[i]) * dT[i];
      cross[i] += v * v;
    }
  }
  cross *= 0.5;

  Field integrand(g);
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = r[i] * r[i] * std::exp(s.phi[i])
                   + 0.5 * gtau[i] / s.tau[i]
                   + 2.0 * cross[i] / s.tau[i];
  return -integrate(integrand);
}

EnergyLowerBound lower_bound_terms(const SurfaceState& s) {
  Field gsq = grad_sq_pointwise(s.phi);
  gsq *= 0.25;
  return EnergyLowerBound{integrate(gsq), mean(s.phi)};
}

double entropy_surface(const SurfaceState& s) {
  Field integrand(s.phi.grid());
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = s.phi[i] * std::exp(s.phi[i]);
  return integrate(integrand);
}

double entropy_potential(const Field& varphi) {
  Field rho = volume_density(varphi);
  Field integrand(varphi.grid());
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = xlogx(rho[i]);
  return integrate(integrand);
}

double i_functional(const Field& varphi) {
  require_metric_positive(varphi, 0.0);
  Field rho = volume_density(varphi);
  Field integrand(varphi.grid());
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = varphi[i] * (1.0 - rho[i]);
  return integrate(integrand) / varphi.grid().volume();
}

double j_functional(const Field& varphi) {
  require_metric_positive(varphi, 0.0);
  const Grid& g = varphi.grid();
  const double V = g.volume();
  if (g.n_complex() == 1) {
    return 0.5 * integrate(grad_sq_pointwise(varphi)) / V;
  }
  Herm2 gamma = gradient_form(varphi);
  const double k0 = wedge_integral(gamma, flat_form(g));
  const double k1 = wedge_integral(gamma, metric_form(varphi));
  return (2.0 / 3.0 * k0 + 1.0 / 3.0 * k1) / V;
}

double j_functional_by_path(const Field& varphi, int nodes) {
  require_metric_positive(varphi, 0.0);
  const Grid& g = varphi.grid();
  std::vector<double> xs, ws;
  gauss_legendre_unit(nodes, xs, ws);
  long double acc = 0.0L;
  for (int q = 0; q < nodes; ++q) {
    Field rho = volume_density(varphi * xs[q]);
    Field integrand(g);
    for (std::size_t i = 0; i < integrand.size(); ++i)
      integrand[i] = varphi[i] * (1.0 - rho[i]);
    acc += ws[q] * integrate(integrand);
  }
  return double(acc) / g.volume();
}

double mabuchi_mu(const Field& varphi, const FlowProblem& p) {
  require_metric_positive(varphi, 0.0);
  const double V = p.V;
  Field rho = volume_density(varphi);
  long double ent = 0.0L, h_phi = 0.0L;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    ent += xlogx(rho[i]);
    h_phi += p.H0[i] * rho[i];
  }
  const double cell = varphi.grid().cell_volume();
  return double(ent) * cell / V - p.lambda * i_minus_j(varphi)
         - double(h_phi) * cell / V + integrate(p.H0) / V;
}

double mabuchi_mu_by_path(const Field& varphi, const FlowProblem& p, int nodes) {
  require_metric_positive(varphi, 0.0);
  const Grid& g = varphi.grid();
  const double V = p.V;
  const double c = p.alpha0.coeff;
  std::vector<double> xs, ws;
  gauss_legendre_unit(nodes, xs, ws);

  long double acc = 0.0L;
  if (g.n_complex() == 1) {
    Field a_density = closed_form_density(p.alpha0);
    for (int q = 0; q < nodes; ++q) {
      Field rho = volume_density(varphi * xs[q]);
      Field ric = laplacian_flat(log_pointwise(rho, "mabuchi_mu_by_path"));
      ric *= -1.0;
      Field integrand(g);
      for (std::size_t i = 0; i < integrand.size(); ++i)
        integrand[i] = varphi[i] * (ric[i] - p.lambda * rho[i] - a_density[i]);
      acc += ws[q] * (-integrate(integrand) / V);
    }
    return double(acc);
  }

  Herm2 m_alpha = normalized_hessian(p.alpha0.potential_u);
  m_alpha.a11 += c;
  m_alpha.a22 += c;
  for (int q = 0; q < nodes; ++q) {
    Herm2 gs = metric_form(varphi * xs[q]);
    Field rho = herm2_det(gs);
    Herm2 beta = normalized_hessian(log_pointwise(rho, "mabuchi_mu_by_path"));
    for (std::size_t i = 0; i < rho.size(); ++i) {
      beta.a11[i] = -beta.a11[i] - p.lambda * gs.a11[i] - m_alpha.a11[i];
      beta.a22[i] = -beta.a22[i] - p.lambda * gs.a22[i] - m_alpha.a22[i];
      beta.re12[i] = -beta.re12[i] - p.lambda * gs.re12[i] - m_alpha.re12[i];
      beta.im12[i] = -beta.im12[i] - p.lambda * gs.im12[i] - m_alpha.im12[i];
    }
    acc += ws[q] * (-2.0 / V * wedge_integral(beta, gs, varphi));
  }
  return double(acc);
}

double m_functional(const PotentialState& s, const FlowProblem& p) {
  const double mu = mabuchi_mu(s.varphi, p);
  Field rho = volume_density(s.varphi);
  return mu - integrate(s.F, rho) / p.V;
}

double dM_dt_theory(const PotentialState& s, const FlowProblem& p) {
  Field vdot = rhs_varphi(s, p);
  const Grid& g = s.varphi.grid();
  if (g.n_complex() == 1)
    return -integrate(grad_sq_pointwise(vdot)) / p.V;
  return -2.0 * wedge_integral(metric_form(s.varphi), gradient_form(vdot)) / p.V;
}

FunctionalSample surface_sample(const SurfaceState& s, const SurfaceParams& p) {
  FunctionalSample out;
  out.t = s.t;
  out.E = liouville_entropy_E(s, p);
  out.E_hat = enhanced_E_hat(s, p);
  out.Q = q_functional(s, p);
  out.dE_dt_theory = dE_dt_theory(s, p);
  if (std::abs(p.kappa - 1.0) < kKappaTol)
    out.dE_hat_dt_theory = dE_hat_dt_theory(s, p);
  out.entropy = entropy_surface(s);
  EnergyLowerBound lb = lower_bound_terms(s);
  out.lower_bound_E = lb.gradient_term;
  out.phi_mean = lb.phi_mean;
  return out;
}

FunctionalSample potential_sample(const PotentialState& s, const FlowProblem& p) {
  FunctionalSample out;
  out.t = s.t;
  out.I = i_functional(s.varphi);
  out.J = j_functional(s.varphi);
  out.mu = mabuchi_mu(s.varphi, p);
  out.M = m_functional(s, p);
  out.dM_dt_theory = dM_dt_theory(s, p);
  out.entropy = entropy_potential(s.varphi);
  out.phi_mean = mean(s.varphi);
  return out;
}

}  // namespace lyz
