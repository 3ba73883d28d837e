#include "lyz/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lyz/errors.hpp"
#include "lyz/geometry.hpp"

namespace lyz {

namespace {

constexpr double kImexHeadroom = 10.0;  // dt cap relative to the rk4 limit
constexpr int kGrowAfter = 50;          // clean steps before dt grows by 1.2

// Implicit Euler on c * lap0, explicit Euler on the remainder, done per
// Fourier mode. sym holds -(1/2)|k|^2, so the denominator is 1 + dt c |k|^2/2.
Field imex_field_update(const Field& u, const Field& du, double c, double dt) {
  const SpectralEngine& e = u.grid().engine();
  std::vector<std::complex<double>> uh(e.spec_size());
  std::vector<std::complex<double>> rh(e.spec_size());
  e.forward(u.values(), uh);
  e.forward(du.values(), rh);
  const std::vector<double>& sym = e.laplace_symbol();
  for (std::size_t i = 0; i < uh.size(); ++i) {
    const double s = c * sym[i];
    uh[i] = (uh[i] + dt * rh[i] - (dt * s) * uh[i]) / (1.0 - dt * s);
  }
  Field out(u.grid());
  e.inverse(uh, out.values());
  return spectral_clean(out);
}

}  // namespace

const char* to_string(Scheme s) { return s == Scheme::imex ? "imex" : "rk4"; }

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "Converged";
    case Termination::TimeExhausted:
      return "TimeExhausted";
    case Termination::MetricDegenerate:
      return "MetricDegenerate";
    case Termination::NonFinite:
      return "NonFinite";
  }
  return "TimeExhausted";
}

double FlowSystem::stationarity(const Field& a, const Field& b, double t) const {
  Field da, db;
  rhs(a, b, t, da, db);
  return sup_norm(da) + sup_norm(db);
}

// ---- surface adapter -------------------------------------------------------

SurfaceSystem::SurfaceSystem(const Grid& g, SurfaceParams params)
    : grid_(g), params_(params) {
  if (g.n_complex() != 1)
    throw ShapeMismatchError("surface flow needs one complex dimension");
}

void SurfaceSystem::rhs(const Field& a, const Field& b, double t, Field& da,
                        Field& db) const {
  SurfaceState s{a, b, t};
  surface_rhs(s, params_, da, db);
}

void SurfaceSystem::validate(const Field& a, const Field& b, double) const {
  require_finite(a, "phi");
  require_finite(b, "tau");
}

void SurfaceSystem::stiffness(const Field& a, const Field&, double& max_a,
                              double& max_b, double& min_a,
                              double& min_b) const {
  // Both equations diffuse through e^{-phi} lap0; tau carries the extra kappa.
  const double lo = std::exp(-field_max(a));
  const double hi = std::exp(-field_min(a));
  max_a = hi;
  min_a = lo;
  max_b = params_.kappa * hi;
  min_b = params_.kappa * lo;
}

// ---- potential adapter -----------------------------------------------------

PotentialSystem::PotentialSystem(FlowProblem problem)
    : problem_(std::move(problem)) {}

void PotentialSystem::rhs(const Field& a, const Field& b, double t, Field& da,
                          Field& db) const {
  PotentialState s{a, b, t};
  potential_rhs(s, problem_, da, db);
}

void PotentialSystem::validate(const Field& a, const Field& b, double t) const {
  require_finite(a, "varphi");
  require_finite(b, "F");
  require_metric_positive(a, t);
}

void PotentialSystem::stiffness(const Field& a, const Field&, double& max_a,
                                double& max_b, double& min_a,
                                double& min_b) const {
  // The metric Laplacian scales like the inverse metric eigenvalues.
  double lo = 0.0, hi = 0.0;
  if (problem_.grid.n_complex() == 1) {
    Field rho = volume_density(a);
    lo = field_min(rho);
    hi = field_max(rho);
  } else {
    herm2_eigen_range(metric_form(a), lo, hi);
  }
  if (!(lo > 0.0))
    throw MetricDegenerateError("metric degenerate in stiffness bound");
  max_a = 1.0 / lo;
  min_a = 1.0 / hi;
  max_b = problem_.kappa / lo;
  min_b = problem_.kappa / hi;
}

// ---- steppers --------------------------------------------------------------

double cfl_dt_limit(const FlowSystem& sys, const Field& a, const Field& b,
                    double cfl_safety) {
  const Grid& g = sys.grid();
  const int populated = std::max(max_populated_mode(a), max_populated_mode(b));
  // Quadratic terms reach twice the populated band, nothing survives past the
  // dealias cutoff.
  const int reach = std::min(2 * populated, g.dealias_cutoff());
  double max_a, max_b, min_a, min_b;
  sys.stiffness(a, b, max_a, max_b, min_a, min_b);
  const double diff = std::max(max_a, max_b);
  const double sym = laplace_symbol_bound(g, reach);
  if (reach == 0 || diff <= 0.0 || sym <= 0.0)
    return std::numeric_limits<double>::infinity();
  return cfl_safety / (diff * sym);
}

void step_rk4(const FlowSystem& sys, const Field& a, const Field& b, double t,
              double dt, Field& na, Field& nb) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("step_rk4: dt must be positive and finite");
  const double hard = cfl_dt_limit(sys, a, b, 1.0);
  if (dt > hard)
    throw CflViolationError("rk4 step size above diffusion stability limit",
                            hard);
  Field k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
  sys.rhs(a, b, t, k1a, k1b);
  sys.rhs(a + (0.5 * dt) * k1a, b + (0.5 * dt) * k1b, t + 0.5 * dt, k2a, k2b);
  sys.rhs(a + (0.5 * dt) * k2a, b + (0.5 * dt) * k2b, t + 0.5 * dt, k3a, k3b);
  sys.rhs(a + dt * k3a, b + dt * k3b, t + dt, k4a, k4b);
  na = spectral_clean(a + (dt / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a));
  nb = spectral_clean(b + (dt / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b));
  require_finite(na, "rk4 step");
  require_finite(nb, "rk4 step");
}

void step_imex(const FlowSystem& sys, const Field& a, const Field& b, double t,
               double dt, Field& na, Field& nb) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("step_imex: dt must be positive and finite");
  Field da, db;
  sys.rhs(a, b, t, da, db);
  double max_a, max_b, min_a, min_b;
  sys.stiffness(a, b, max_a, max_b, min_a, min_b);
  na = imex_field_update(a, da, std::max(0.0, min_a), dt);
  nb = imex_field_update(b, db, std::max(0.0, min_b), dt);
  require_finite(na, "imex step");
  require_finite(nb, "imex step");
}

// ---- run loop ---------------------------------------------------------------

RunResult::RunResult(Field a0, Field b0, double t0)
    : a(std::move(a0)),
      b(std::move(b0)),
      t(t0),
      stationarity_final(std::numeric_limits<double>::quiet_NaN()) {}

RunResult run(const FlowSystem& sys, const Field& a0, const Field& b0,
              double t0, const StepperConfig& cfg, const SampleFn& on_sample) {
  if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
    throw std::invalid_argument("run: cfl_safety must lie in (0, 1]");
  if (!(cfg.t_end >= t0))
    throw std::invalid_argument("run: t_end below start time");
  if (cfg.sample_stride < 1)
    throw std::invalid_argument("run: sample_stride must be >= 1");

  RunResult out(a0, b0, t0);
  try {
    sys.validate(out.a, out.b, out.t);
  } catch (const MetricDegenerateError&) {
    out.termination = Termination::MetricDegenerate;
    return out;
  } catch (const NonFiniteError&) {
    out.termination = Termination::NonFinite;
    return out;
  }

  const bool adaptive = cfg.dt <= 0.0;
  const double span = cfg.t_end - t0;
  const double headroom = cfg.scheme == Scheme::imex ? kImexHeadroom : 1.0;

  auto sample_now = [&](long step) {
    if (on_sample) on_sample(out.a, out.b, out.t, step);
    ++out.sample_count;
  };
  auto converged_now = [&]() {
    if (cfg.stop_tolerance <= 0.0) return false;
    out.stationarity_final = sys.stationarity(out.a, out.b, out.t);
    return out.stationarity_final < cfg.stop_tolerance;
  };

  double dt = cfg.dt;
  if (adaptive) {
    const double fallback = span > 0.0 ? span / 100.0 : 1.0;
    dt = std::min(headroom * cfl_dt_limit(sys, out.a, out.b, cfg.cfl_safety),
                  fallback);
    if (!(dt > 0.0) || !std::isfinite(dt)) dt = fallback;
  }
  out.dt_final = dt;

  sample_now(0);
  if (converged_now()) {
    out.termination = Termination::Converged;
    return out;
  }

  long clean = 0;
  const double t_eps = 1e-12 * std::max(1.0, std::abs(cfg.t_end));
  while (out.t < cfg.t_end - t_eps) {
    const double limit =
        headroom * cfl_dt_limit(sys, out.a, out.b, cfg.cfl_safety);
    if (adaptive) {
      dt = std::min(dt, limit);
    } else if (cfg.scheme == Scheme::rk4 && dt > limit) {
      throw CflViolationError("run: fixed dt above the rk4 stability limit",
                              limit);
    }
    const double dt_try = std::min(dt, cfg.t_end - out.t);
    Field na, nb;
    try {
      if (cfg.scheme == Scheme::imex)
        step_imex(sys, out.a, out.b, out.t, dt_try, na, nb);
      else
        step_rk4(sys, out.a, out.b, out.t, dt_try, na, nb);
      sys.validate(na, nb, out.t + dt_try);
    } catch (const NonFiniteError&) {
      if (adaptive && dt > 1e-13 * std::max(1.0, span)) {
        dt *= 0.5;
        clean = 0;
        continue;
      }
      out.termination = Termination::NonFinite;
      out.dt_final = dt;
      return out;
    } catch (const MetricDegenerateError&) {
      out.termination = Termination::MetricDegenerate;
      out.dt_final = dt;
      return out;
    }
    out.a = std::move(na);
    out.b = std::move(nb);
    out.t += dt_try;
    ++out.steps;
    if (adaptive && ++clean >= kGrowAfter) {
      dt *= 1.2;
      clean = 0;
    }
    const bool at_end = out.t >= cfg.t_end - t_eps;
    if (out.steps % cfg.sample_stride == 0 || at_end) {
      sample_now(out.steps);
      if (converged_now()) {
        out.termination = Termination::Converged;
        out.dt_final = dt;
        return out;
      }
    }
  }
  out.termination = Termination::TimeExhausted;
  out.dt_final = dt;
  return out;
}

}  // namespace lyz
