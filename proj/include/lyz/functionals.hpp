// Monotone and diagnostic functionals of both formulations together with
// their theoretical time derivatives.  Every quadrature here uses pointwise
// products of unfiltered fields; the only filtered ingredients are the flow
// right-hand sides themselves, taken exactly as the stepper sees them so the
// theory derivatives track the discrete trajectory.

#pragma once

#include <limits>

#include "lyz/potential_flow.hpp"
#include "lyz/surface_flow.hpp"

namespace lyz {

// One row of the diagnostic series.  Entries that do not apply to the
// formulation (or parameter regime) being run are quiet NaN.
struct FunctionalSample {
  double t = 0.0;
  double E = std::numeric_limits<double>::quiet_NaN();
  double E_hat = std::numeric_limits<double>::quiet_NaN();
  double Q = std::numeric_limits<double>::quiet_NaN();
  double I = std::numeric_limits<double>::quiet_NaN();
  double J = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  double M = std::numeric_limits<double>::quiet_NaN();
  double dE_dt_theory = std::numeric_limits<double>::quiet_NaN();
  double dM_dt_theory = std::numeric_limits<double>::quiet_NaN();
  double dE_hat_dt_theory = std::numeric_limits<double>::quiet_NaN();
  double entropy = std::numeric_limits<double>::quiet_NaN();
  double lower_bound_E = std::numeric_limits<double>::quiet_NaN();
  double phi_mean = std::numeric_limits<double>::quiet_NaN();
};

// ---- surface formulation ---------------------------------------------------

// E = int (1/2 |grad phi|^2_0 + R0 phi - lambda e^phi - tau e^phi) omega_0
//     + int tau log(tau) e^phi omega_0.
// The overload without R0 takes the flat background R0 = 0.  Throws
// NonPositiveTauError when min tau <= 0 (tau log tau itself is extended by 0
// at tau = 0, but the flow hypotheses require positivity).
double liouville_entropy_E(const SurfaceState& s, const SurfaceParams& p);
double liouville_entropy_E(const SurfaceState& s, const SurfaceParams& p,
                           const Field& R0);

// -int phidot^2 omega - kappa int (|grad tau|^2_omega / tau) omega, with
// phidot the surface rhs.  Nonpositive by construction.
double dE_dt_theory(const SurfaceState& s, const SurfaceParams& p);

// Q = int (-R + lambda + tau)^2 omega + int |grad tau|^2_omega omega.
double q_functional(const SurfaceState& s, const SurfaceParams& p);

// E_hat = E + int (R^2 / tau) omega.  Defined for every kappa.
double enhanced_E_hat(const SurfaceState& s, const SurfaceParams& p);

// -int phidot^2 omega - int (|grad tau|^2 / 2 tau) omega
// - int (2/tau) |grad R - (1/2 + R/tau) grad tau|^2 omega.
// The identity holds only at kappa = 1; throws KappaNotOneError otherwise.
double dE_hat_dt_theory(const SurfaceState& s, const SurfaceParams& p);

// The two terms of the a-priori lower bound on E: the reduced gradient
// energy int (1/4)|grad phi|^2_0 omega_0 and the flat mean of phi.  Logged,
// not asserted (the Euler characteristic term vanishes on the torus).
struct EnergyLowerBound {
  double gradient_term = 0.0;
  double phi_mean = 0.0;
};
EnergyLowerBound lower_bound_terms(const SurfaceState& s);

// int log(omega^n / omega_0^n) omega^n: int phi e^phi for the conformal
// metric, int log(rho) rho for the potential metric.
double entropy_surface(const SurfaceState& s);
double entropy_potential(const Field& varphi);

// ---- potential formulation -------------------------------------------------

// I = (1/V) int phi (omega_0^n - omega_phi^n).
double i_functional(const Field& varphi);

// J by its closed sum form,
// (1/V) sum_k (n-k)/(n+1) int i d(phi) ^ dbar(phi) ^ omega_0^{n-1-k} ^ omega_phi^k.
double j_functional(const Field& varphi);

// J by numerical integration along the linear path s -> s*phi
// (Gauss-Legendre in s).  Reference evaluation for validating the sum form.
double j_functional_by_path(const Field& varphi, int nodes = 64);

// mu by its closed form: (1/V) int log(rho) rho - lambda (I - J)
// - (1/V) int H0 rho + (1/V) int H0.
double mabuchi_mu(const Field& varphi, const FlowProblem& p);

// mu by quadrature of its defining path integral along s -> s*phi.
// Reference evaluation: agreement with the closed form demonstrates path
// independence.
double mabuchi_mu_by_path(const Field& varphi, const FlowProblem& p,
                          int nodes = 64);

// M = mu(varphi) - (1/V) int F omega_phi^n.
double m_functional(const PotentialState& s, const FlowProblem& p);

// -(1/V) int |grad varphidot|^2_omega omega^n, varphidot from rhs_varphi.
double dM_dt_theory(const PotentialState& s, const FlowProblem& p);

// ---- assembly ---------------------------------------------------------------

// Everything applicable to the given formulation in one record; the rest NaN.
FunctionalSample surface_sample(const SurfaceState& s, const SurfaceParams& p);
FunctionalSample potential_sample(const PotentialState& s, const FlowProblem& p);

}  // namespace lyz
