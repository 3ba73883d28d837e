#include "lyz/potential_flow.hpp"

#include <cmath>

#include "lyz/errors.hpp"

namespace lyz {

namespace {

void require_grid(const ClosedForm& a, const Grid& g, const char* what) {
  if (!a.potential_u.grid().compatible(g))
    throw ShapeMismatchError(std::string(what) + ": form lives on a different grid");
}

}  // namespace

Field closed_form_density(const ClosedForm& a) {
  const Grid& g = a.potential_u.grid();
  if (g.n_complex() != 1)
    throw ShapeMismatchError("closed_form_density: defined for one complex dimension only");
  Field d = laplacian_flat(a.potential_u);
  d += a.coeff;
  return d;
}

double class_integral(const ClosedForm& a) {
  const Grid& g = a.potential_u.grid();
  if (g.n_complex() == 1) return integrate(closed_form_density(a));
  // n = 2: int alpha ^ omega_0 = (1/2) int [tr(M) tr(I) - tr(M I)]
  //      = (1/2) int tr(M), with tr(M) = 2 coeff + laplacian_flat(u).
  Field tr = laplacian_flat(a.potential_u);
  tr += 2.0 * a.coeff;
  return 0.5 * integrate(tr);
}

Field build_H0(const Grid& grid, double lambda, const ClosedForm& alpha0) {
  require_grid(alpha0, grid, "build_H0");
  const double V = grid.volume();
  const double cls = class_integral(alpha0);
  const double want = -lambda * V;
  if (std::abs(cls - want) > 1e-8 * std::max(1.0, std::abs(want)))
    throw CohomologyMismatchError("build_H0: class integral " + std::to_string(cls) +
                                  " does not match -lambda*V = " + std::to_string(want));

  // Flat background: i ddbar H0 = -lambda*omega_0 - alpha_0 = -i ddbar(u),
  // so H0 = -u + c with e^c = V / integral(e^{-u}).
  const Field& u = alpha0.potential_u;
  Field eneg(grid);
  {
    auto uv = u.values();
    auto ev = eneg.values();
    for (std::size_t i = 0; i < uv.size(); ++i) ev[i] = std::exp(-uv[i]);
  }
  const double c = -std::log(integrate(eneg) / V);
  Field H0 = u * (-1.0);
  H0 += c;
  return H0;
}

double build_b(const ClosedForm& alpha0, const Grid& grid) {
  require_grid(alpha0, grid, "build_b");
  return grid.n_complex() * class_integral(alpha0);
}

FlowProblem make_problem(const Grid& grid, double lambda, double kappa,
                         const ClosedForm& alpha0) {
  FlowProblem p{grid, lambda, kappa, alpha0, build_H0(grid, lambda, alpha0),
                build_b(alpha0, grid), grid.volume()};
  return p;
}

Field rhs_varphi(const PotentialState& s, const FlowProblem& p) {
  require_metric_positive(s.varphi, s.t);
  Field out = log_field(volume_density(s.varphi));
  out -= p.H0;
  out += s.varphi * p.lambda;
  out -= s.F;
  return out;
}

Field rhs_F(const PotentialState& s, const FlowProblem& p) {
  require_metric_positive(s.varphi, s.t);
  Field out = laplace_beltrami_potential(s.F, s.varphi);
  out -= trace_form_potential(s.varphi, p.alpha0.coeff, p.alpha0.potential_u);
  out += p.b / p.V;
  out *= p.kappa;
  return out;
}

void potential_rhs(const PotentialState& s, const FlowProblem& p,
                   Field& dvarphi, Field& dF) {
  require_metric_positive(s.varphi, s.t);

  dvarphi = log_field(volume_density(s.varphi));
  dvarphi -= p.H0;
  dvarphi += s.varphi * p.lambda;
  dvarphi -= s.F;

  dF = laplace_beltrami_potential(s.F, s.varphi);
  dF -= trace_form_potential(s.varphi, p.alpha0.coeff, p.alpha0.potential_u);
  dF += p.b / p.V;
  dF *= p.kappa;
}

double phi_plus_F_sup(const PotentialState& s) {
  return sup_norm(s.varphi + s.F);
}

void stationarity_residual(const PotentialState& s, const FlowProblem& p,
                           double& metric_residual, double& form_residual) {
  metric_residual = sup_norm(rhs_varphi(s, p));
  form_residual = sup_norm(rhs_F(s, p)) / p.kappa;
}

double rhs_F_mean(const PotentialState& s, const FlowProblem& p) {
  require_metric_positive(s.varphi, s.t);
  Field rhs = laplace_beltrami_potential_pointwise(s.F, s.varphi);
  rhs -= trace_form_potential_pointwise(s.varphi, p.alpha0.coeff,
                                        p.alpha0.potential_u);
  rhs += p.b / p.V;
  rhs *= p.kappa;
  return integrate(rhs, volume_density(s.varphi)) / p.V;
}

double constant_potential_solution(double varphi0, double F0, double lambda,
                                   double t) {
  if (lambda == 0.0) return varphi0 - F0 * t;
  const double fixed = F0 / lambda;
  return fixed + (varphi0 - fixed) * std::exp(lambda * t);
}

}  // namespace lyz
