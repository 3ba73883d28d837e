#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "lyz/errors.hpp"
#include "lyz/geometry.hpp"
#include "lyz/integrator.hpp"

using namespace lyz;

namespace {

constexpr double pi = std::numbers::pi;

Field random_bandlimited(const Grid& g, unsigned seed, double amplitude, int max_mode) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> mode(-max_mode, max_mode);
  Field out(g, 0.0);
  for (int j = 0; j < 5; ++j) {
    const int mx = mode(rng), my = mode(rng);
    const double a = amplitude * unit(rng), ph = pi * unit(rng);
    Field w = Field::sample(g, [&](const auto& x) {
      return a * std::cos(2.0 * pi * (mx * x[0] + my * x[1]) + ph);
    });
    out += w;
  }
  return out;
}

double sup_diff(const Field& a, const Field& b) { return sup_norm(a - b); }

// Pure diffusion in the second field, first field frozen. Linear, so the
// exact per-mode decay is known and the stiffness bounds are constants.
class HeatSystem : public FlowSystem {
 public:
  HeatSystem(const Grid& g, double kappa) : g_(g), kappa_(kappa) {}
  const Grid& grid() const override { return g_; }
  void rhs(const Field&, const Field& b, double, Field& da, Field& db) const override {
    da = Field(g_);
    db = kappa_ * laplacian_flat(b);
  }
  void validate(const Field& a, const Field& b, double) const override {
    require_finite(a, "a");
    require_finite(b, "b");
  }
  void stiffness(const Field&, const Field&, double& max_a, double& max_b,
                 double& min_a, double& min_b) const override {
    max_a = min_a = 0.0;
    max_b = min_b = kappa_;
  }
  const char* field_name_a() const override { return "a"; }
  const char* field_name_b() const override { return "b"; }

 private:
  Grid g_;
  double kappa_;
};

// da/dt = speed, db/dt = 0, no diffusion. Past the cap the rhs turns NaN,
// which exercises the non-finite retry path.
class DriftSystem : public FlowSystem {
 public:
  DriftSystem(const Grid& g, double speed, double cap) : g_(g), speed_(speed), cap_(cap) {}
  const Grid& grid() const override { return g_; }
  void rhs(const Field& a, const Field&, double, Field& da, Field& db) const override {
    const double v = field_max(a) > cap_ ? std::numeric_limits<double>::quiet_NaN() : speed_;
    da = Field(g_, v);
    db = Field(g_);
  }
  void validate(const Field& a, const Field& b, double) const override {
    require_finite(a, "a");
    require_finite(b, "b");
  }
  void stiffness(const Field&, const Field&, double& max_a, double& max_b,
                 double& min_a, double& min_b) const override {
    max_a = max_b = min_a = min_b = 0.0;
  }
  const char* field_name_a() const override { return "a"; }
  const char* field_name_b() const override { return "b"; }

 private:
  Grid g_;
  double speed_;
  double cap_;
};

// Sinks at unit speed and declares the state degenerate below the floor.
class SinkSystem : public FlowSystem {
 public:
  explicit SinkSystem(const Grid& g) : g_(g) {}
  const Grid& grid() const override { return g_; }
  void rhs(const Field&, const Field&, double, Field& da, Field& db) const override {
    da = Field(g_, -1.0);
    db = Field(g_);
  }
  void validate(const Field& a, const Field&, double t) const override {
    if (field_min(a) < -0.5) throw MetricDegenerateError("sank below the floor", t);
  }
  void stiffness(const Field&, const Field&, double& max_a, double& max_b,
                 double& min_a, double& min_b) const override {
    max_a = max_b = min_a = min_b = 0.0;
  }
  const char* field_name_a() const override { return "a"; }
  const char* field_name_b() const override { return "b"; }

 private:
  Grid g_;
};

}  // namespace

TEST_CASE("stationary surface state is preserved bit for bit by both schemes") {
  Grid g(1, 32);
  SurfaceSystem sys(g, {-1.0, 2.0});
  Field phi(g, 0.0), tau(g, 1.0);
  for (Scheme sch : {Scheme::rk4, Scheme::imex}) {
    StepperConfig cfg;
    cfg.scheme = sch;
    cfg.dt = 0.01;
    cfg.t_end = 2.0;
    cfg.sample_stride = 50;
    RunResult r = run(sys, phi, tau, 0.0, cfg);
    CHECK(r.termination == Termination::TimeExhausted);
    CHECK(r.steps == 200);
    CHECK(sup_diff(r.a, phi) == 0.0);
    CHECK(sup_diff(r.b, tau) == 0.0);
  }
}

TEST_CASE("stationary potential seed converges at the first sample") {
  Grid g(1, 32);
  PotentialSystem sys(make_problem(g, -1.0, 2.0, ClosedForm(g, 1.0)));
  Field varphi(g, 0.0), F(g, 0.0);

  StepperConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.stop_tolerance = 1e-10;
  RunResult r = run(sys, varphi, F, 0.0, cfg);
  CHECK(r.termination == Termination::Converged);
  CHECK(r.steps == 0);
  CHECK(r.sample_count == 1);
  CHECK(r.stationarity_final == 0.0);

  // Without the stop the state still never moves.
  cfg.stop_tolerance = 0.0;
  cfg.t_end = 0.1;
  RunResult r2 = run(sys, varphi, F, 0.0, cfg);
  CHECK(r2.termination == Termination::TimeExhausted);
  CHECK(sup_diff(r2.a, varphi) == 0.0);
  CHECK(sup_diff(r2.b, F) == 0.0);
}

TEST_CASE("constant data reproduces the closed forms at fourth order") {
  Grid g(1, 16);
  const double lambda = -1.0, tau0 = 0.5, phi0 = 0.2, t_end = 1.0;
  SurfaceSystem sys(g, {lambda, 2.0});
  Field phi(g, phi0), tau(g, tau0);

  auto error_at = [&](double dt) {
    StepperConfig cfg;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.sample_stride = 1000000;
    RunResult r = run(sys, phi, tau, 0.0, cfg);
    const double tau_exact = constant_tau_solution(tau0, lambda, t_end);
    const double phi_exact = constant_phi_solution(phi0, tau0, lambda, t_end);
    return std::max(sup_norm(r.b - Field(g, tau_exact)),
                    sup_norm(r.a - Field(g, phi_exact)));
  };

  const double e1 = error_at(4e-3);
  const double e2 = error_at(2e-3);
  CHECK(e1 / e2 > 10.0);
  CHECK(e1 / e2 < 30.0);
  CHECK(error_at(1e-3) < 1e-9);
}

TEST_CASE("frozen heat mode decays at the exact spectral rate") {
  Grid g(1, 32);
  const double kappa = 0.7;
  HeatSystem sys(g, kappa);
  Field a(g, 0.0);
  Field b = Field::sample(g, [](const auto& x) {
    return 0.8 * std::cos(2.0 * pi * (2.0 * x[0] + x[1]));
  });
  const double mu = 0.5 * (2.0 * pi) * (2.0 * pi) * 5.0;  // (1/2)|k|^2

  StepperConfig cfg;
  cfg.dt = 1e-5;
  cfg.t_end = 0.02;
  cfg.sample_stride = 1000000;
  RunResult r = run(sys, a, b, 0.0, cfg);
  Field exact = std::exp(-kappa * mu * cfg.t_end) * b;
  CHECK(sup_diff(r.b, exact) < 1e-8);
}

TEST_CASE("imex damps each mode by the implicit Euler factor") {
  Grid g(1, 32);
  const double kappa = 0.7;
  HeatSystem sys(g, kappa);
  Field a(g, 0.0);
  Field b = Field::sample(g, [](const auto& x) {
    return std::cos(2.0 * pi * (2.0 * x[0] + x[1]));
  });
  const double mu = 0.5 * (2.0 * pi) * (2.0 * pi) * 5.0;

  const double dt = 0.3;
  Field na, nb;
  step_imex(sys, a, b, 0.0, dt, na, nb);
  Field expected = (1.0 / (1.0 + kappa * mu * dt)) * b;
  CHECK(sup_diff(nb, expected) < 1e-12);
  CHECK(sup_norm(na) == 0.0);

  // Far beyond any explicit limit the scheme just keeps contracting.
  Field cur = b;
  double prev = sup_norm(cur);
  for (int i = 0; i < 5; ++i) {
    step_imex(sys, a, cur, 0.0, 10.0, na, nb);
    cur = nb;
    const double now = sup_norm(cur);
    CHECK(now < prev);
    prev = now;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("rk4 refuses a step beyond the diffusion stability limit") {
  Grid g(1, 64);
  SurfaceSystem sys(g, {-1.0, 2.0});
  Field phi = random_bandlimited(g, 11, 0.1, 4);
  Field tau = Field(g, 1.0) + random_bandlimited(g, 12, 0.1, 4);

  const double raw = cfl_dt_limit(sys, phi, tau, 1.0);
  CHECK(raw > 0.0);
  CHECK(std::isfinite(raw));

  Field na, nb;
  CHECK_THROWS_AS(step_rk4(sys, phi, tau, 0.0, 3.0 * raw, na, nb), CflViolationError);
  try {
    step_rk4(sys, phi, tau, 0.0, 3.0 * raw, na, nb);
  } catch (const CflViolationError& e) {
    CHECK(e.dt_limit == doctest::Approx(raw));
  }

  StepperConfig cfg;
  cfg.dt = 3.0 * raw;
  cfg.t_end = 1.0;
  CHECK_THROWS_AS(run(sys, phi, tau, 0.0, cfg), CflViolationError);

  // A step inside the limit goes through.
  step_rk4(sys, phi, tau, 0.0, 0.5 * raw, na, nb);
  CHECK(std::isfinite(sup_norm(na)));
}

TEST_CASE("adaptive run grows the step and lands exactly on t_end") {
  Grid g(1, 8);
  DriftSystem sys(g, 1.0, std::numeric_limits<double>::infinity());
  Field a(g, 0.0), b(g, 0.0);

  StepperConfig cfg;
  cfg.dt = 0.0;  // adaptive
  cfg.t_end = 10.0;
  cfg.sample_stride = 7;
  std::vector<double> ts;
  RunResult r = run(sys, a, b, 0.0, cfg,
                    [&](const Field&, const Field&, double t, long) { ts.push_back(t); });
  CHECK(r.termination == Termination::TimeExhausted);
  CHECK(r.dt_final > 0.1);  // grew past the span/100 start
  CHECK(std::abs(r.t - 10.0) < 1e-9);
  // The field integrates the drift exactly, so it tracks accumulated time.
  CHECK(sup_norm(r.a - Field(g, r.t)) < 1e-12);
  REQUIRE(ts.size() >= 2);
  CHECK(ts.front() == 0.0);
  CHECK(std::abs(ts.back() - 10.0) < 1e-9);
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);
}

TEST_CASE("adaptive run halves on non-finite trials and stops cleanly") {
  Grid g(1, 8);
  DriftSystem sys(g, 1e6, 5.0);
  Field a(g, 0.0), b(g, 0.0);

  StepperConfig cfg;
  cfg.dt = 0.0;
  cfg.t_end = 1.0;
  cfg.sample_stride = 4;
  RunResult r = run(sys, a, b, 0.0, cfg);
  CHECK(r.termination == Termination::NonFinite);
  CHECK(r.steps > 0);
  CHECK(r.t < 1.0);
  CHECK(r.dt_final < 0.01);  // repeatedly halved from the span/100 start
  CHECK(std::isfinite(field_max(r.a)));
  CHECK(field_max(r.a) <= 5.0 + 1e-9);
}

TEST_CASE("mid-run degeneracy keeps the partial record and last good state") {
  Grid g(1, 8);
  SinkSystem sys(g);
  Field a(g, 0.0), b(g, 0.0);

  StepperConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 2.0;
  cfg.sample_stride = 10;
  std::vector<double> ts;
  RunResult r = run(sys, a, b, 0.0, cfg,
                    [&](const Field&, const Field&, double t, long) { ts.push_back(t); });
  CHECK(r.termination == Termination::MetricDegenerate);
  CHECK(r.t > 0.3);
  CHECK(r.t < 0.6);
  CHECK(field_min(r.a) >= -0.5);
  CHECK(r.sample_count >= 2);
  CHECK(ts.size() == static_cast<std::size_t>(r.sample_count));
}

TEST_CASE("degenerate potential seed aborts before stepping") {
  Grid g(1, 32);
  FlowProblem p = make_problem(g, -1.0, 2.0, ClosedForm(g, 1.0));
  // Large single mode pushes 1 + lap0(varphi) negative somewhere.
  Field varphi = Field::sample(g, [](const auto& x) {
    return 0.2 * std::cos(2.0 * pi * (3.0 * x[0] + 2.0 * x[1]));
  });
  REQUIRE(metric_min_eigenvalue(varphi) <= 0.0);
  PotentialSystem sys(p);

  StepperConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 1.0;
  RunResult r = run(sys, varphi, Field(g), 0.0, cfg);
  CHECK(r.termination == Termination::MetricDegenerate);
  CHECK(r.steps == 0);
  CHECK(r.sample_count == 0);
}

TEST_CASE("adaptive runs are deterministic") {
  Grid g(1, 32);
  SurfaceSystem sys(g, {-1.0, 2.0});
  Field phi = random_bandlimited(g, 21, 0.05, 3);
  Field tau = Field(g, 1.0) + random_bandlimited(g, 22, 0.05, 3);

  StepperConfig cfg;
  cfg.scheme = Scheme::imex;
  cfg.dt = 0.0;
  cfg.t_end = 0.05;
  cfg.sample_stride = 9;
  RunResult r1 = run(sys, phi, tau, 0.0, cfg);
  RunResult r2 = run(sys, phi, tau, 0.0, cfg);
  CHECK(r1.steps == r2.steps);
  CHECK(r1.sample_count == r2.sample_count);
  CHECK(r1.t == r2.t);
  CHECK(sup_diff(r1.a, r2.a) == 0.0);
  CHECK(sup_diff(r1.b, r2.b) == 0.0);
}

TEST_CASE("rk4 and imex agree on a resolved run") {
  Grid g(1, 32);
  SurfaceSystem sys(g, {-1.0, 2.0});
  Field phi = random_bandlimited(g, 31, 0.05, 3);
  Field tau = Field(g, 1.0) + random_bandlimited(g, 32, 0.05, 3);

  StepperConfig cfg;
  cfg.dt = 2e-6;
  cfg.t_end = 0.02;
  cfg.sample_stride = 1000000;
  RunResult rk = run(sys, phi, tau, 0.0, cfg);
  cfg.scheme = Scheme::imex;
  RunResult ix = run(sys, phi, tau, 0.0, cfg);
  CHECK(sup_diff(rk.a, ix.a) < 1e-4);
  CHECK(sup_diff(rk.b, ix.b) < 1e-4);
}

TEST_CASE("doubling the resolution leaves the trajectory unchanged") {
  auto seed_phi = [](const std::array<double, kMaxRealAxes>& x) {
    return 0.05 * std::cos(2.0 * pi * (2.0 * x[0] + x[1])) -
           0.03 * std::sin(2.0 * pi * (x[0] - 3.0 * x[1]));
  };
  auto seed_tau = [](const std::array<double, kMaxRealAxes>& x) {
    return 1.0 + 0.04 * std::cos(2.0 * pi * (x[0] + x[1]));
  };

  // Inside the stability limit of the fine grid, whose dealiased band is wider.
  StepperConfig cfg;
  cfg.dt = 1.5e-5;
  cfg.t_end = 0.03;
  cfg.sample_stride = 1000000;

  Grid coarse(1, 32), fine(1, 64);
  SurfaceSystem sc(coarse, {-1.0, 2.0}), sf(fine, {-1.0, 2.0});
  RunResult rc = run(sc, Field::sample(coarse, seed_phi), Field::sample(coarse, seed_tau), 0.0, cfg);
  RunResult rf = run(sf, Field::sample(fine, seed_phi), Field::sample(fine, seed_tau), 0.0, cfg);

  // Fine grid points with even indices coincide with the coarse points.
  double worst = 0.0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const std::size_t ci = static_cast<std::size_t>(y) * 32 + x;
      const std::size_t fi = static_cast<std::size_t>(2 * y) * 64 + 2 * x;
      worst = std::max(worst, std::abs(rc.a[ci] - rf.a[fi]));
      worst = std::max(worst, std::abs(rc.b[ci] - rf.b[fi]));
    }
  CHECK(worst < 1e-6);
}

TEST_CASE("pde residuals shrink with dt and vanish at stationarity") {
  Grid g(1, 64);
  SurfaceParams p{-1.0, 2.0};
  SurfaceSystem sys(g, p);
  Field phi = random_bandlimited(g, 41, 0.08, 3);
  Field tau = Field(g, 1.0) + random_bandlimited(g, 42, 0.08, 3);

  auto residuals_at = [&](double dt, double& r_res, double& w_res) {
    Field na, nb;
    step_rk4(sys, phi, tau, 0.0, dt, na, nb);
    SurfaceState s0{phi, tau, 0.0}, s1{na, nb, dt};
    r_res = r_evolution_residual(s0, s1, p);
    w_res = combined_heat_residual(s0, s1, p);
  };
  double r1, w1, r2, w2;
  residuals_at(2e-5, r1, w1);
  residuals_at(1e-5, r2, w2);
  CHECK(r1 / r2 > 2.0);  // at least first order, expected near second
  CHECK(w1 / w2 > 2.0);

  SurfaceState flat0{Field(g, 0.0), Field(g, 1.0), 0.0};
  SurfaceState flat1{Field(g, 0.0), Field(g, 1.0), 1e-3};
  CHECK(r_evolution_residual(flat0, flat1, p) < 1e-12);
  CHECK(combined_heat_residual(flat0, flat1, p) < 1e-12);
}

TEST_CASE("perturbed surface run converges to the flat state") {
  Grid g(1, 32);
  SurfaceSystem sys(g, {-1.0, 2.0});
  Field phi = random_bandlimited(g, 51, 0.05, 3);
  Field tau = Field(g, 1.0) + random_bandlimited(g, 52, 0.05, 3);
  REQUIRE(field_min(tau) > 0.0);

  StepperConfig cfg;
  cfg.scheme = Scheme::imex;
  cfg.dt = 0.0;
  cfg.t_end = 60.0;
  cfg.sample_stride = 25;
  cfg.stop_tolerance = 1e-7;
  RunResult r = run(sys, phi, tau, 0.0, cfg);
  CHECK(r.termination == Termination::Converged);
  CHECK(r.t < 60.0);
  CHECK(r.stationarity_final < 1e-7);
  CHECK(sup_norm(r.b - Field(g, 1.0)) < 1e-5);
  CHECK(field_max(r.a) - field_min(r.a) < 1e-5);  // metric flattens
}

TEST_CASE("invalid stepper configuration is rejected") {
  Grid g(1, 8);
  SurfaceSystem sys(g, {-1.0, 2.0});
  Field phi(g, 0.0), tau(g, 1.0);

  StepperConfig cfg;
  cfg.cfl_safety = 0.0;
  CHECK_THROWS_AS(run(sys, phi, tau, 0.0, cfg), std::invalid_argument);
  cfg.cfl_safety = 1.5;
  CHECK_THROWS_AS(run(sys, phi, tau, 0.0, cfg), std::invalid_argument);
  cfg.cfl_safety = 0.8;
  cfg.sample_stride = 0;
  CHECK_THROWS_AS(run(sys, phi, tau, 0.0, cfg), std::invalid_argument);
  cfg.sample_stride = 1;
  cfg.t_end = -1.0;
  CHECK_THROWS_AS(run(sys, phi, tau, 0.0, cfg), std::invalid_argument);

  Field na, nb;
  CHECK_THROWS_AS(step_rk4(sys, phi, tau, 0.0, 0.0, na, nb), std::invalid_argument);
  CHECK_THROWS_AS(step_imex(sys, phi, tau, 0.0, -1.0, na, nb), std::invalid_argument);
}
