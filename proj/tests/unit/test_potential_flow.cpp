#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lyz/potential_flow.hpp"

using namespace lyz;

namespace {

constexpr double pi = std::numbers::pi;

// Band-limited trig mix over all real axes of the grid.  Mode range is kept
// tiny so pointwise quadratures of pairwise products are exact.
Field random_bandlimited(const Grid& g, unsigned seed, double amplitude, int max_mode) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> mode(-max_mode, max_mode);
  Field out(g, 0.0);
  const std::size_t axes = g.real_axes();
  for (int j = 0; j < 5; ++j) {
    std::array<int, 4> m{0, 0, 0, 0};
    for (std::size_t a = 0; a < axes; ++a) m[a] = mode(rng);
    const double amp = amplitude * unit(rng), ph = pi * unit(rng);
    Field w = Field::sample(g, [&](const auto& x) {
      double arg = ph;
      for (std::size_t a = 0; a < axes; ++a) arg += 2.0 * pi * m[a] * x[a] / g.period();
      return amp * std::cos(arg);
    });
    out += w;
  }
  return out;
}

// Metric potential: rescaled so the metric keeps a comfortable margin of
// positivity (the minimum eigenvalue depends linearly on the potential).
Field safe_potential(const Grid& g, unsigned seed, double amplitude, int max_mode) {
  Field v = random_bandlimited(g, seed, amplitude, max_mode);
  const double e = metric_min_eigenvalue(v);
  if (e < 0.3) v *= 0.7 / (1.0 - e);
  return v;
}

template <typename F>
double rk4_scalar(F f, double y0, double t_end, int steps) {
  double y = y0;
  const double h = t_end / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace

TEST_CASE("class integral sees only the flat multiple of the form") {
  Grid g(1, 64);
  ClosedForm flat(g, 1.0);
  CHECK(class_integral(flat) == doctest::Approx(1.0).epsilon(1e-14));

  Field u = Field::sample(g, [](const auto& x) {
    return 0.1 * std::cos(2.0 * pi * x[0]) + 0.07 * std::sin(4.0 * pi * x[1]);
  });
  ClosedForm bent(1.0, u);
  CHECK(std::abs(class_integral(bent) - class_integral(flat)) < 1e-10);

  // Density recovers coeff + flat laplacian of the potential part.
  Field d = closed_form_density(bent);
  Field want = laplacian_flat(u) + 1.0;
  CHECK(sup_norm(d - want) < 1e-13);

  // n = 2, period 2: volume 16, so the class integral scales with it.
  Grid g2(2, 16, 2.0);
  Field u2 = random_bandlimited(g2, 11, 0.05, 2);
  ClosedForm bent2(0.7, u2);
  CHECK(class_integral(bent2) == doctest::Approx(0.7 * 16.0).epsilon(1e-12));
  CHECK(std::abs(class_integral(bent2) - class_integral(ClosedForm(g2, 0.7))) < 1e-10);
  CHECK_THROWS_AS(closed_form_density(bent2), ShapeMismatchError);
}

TEST_CASE("flat-matched form gives an identically zero background potential") {
  for (int n : {1, 2}) {
    Grid g(n, n == 1 ? 32 : 16);
    Field H0 = build_H0(g, -1.0, ClosedForm(g, 1.0));
    CHECK(sup_norm(H0) == 0.0);
    CHECK(build_b(ClosedForm(g, 1.0), g) == doctest::Approx(double(n)).epsilon(1e-15));
  }
}

TEST_CASE("background potential is the negated form potential plus a normalizing constant") {
  Grid g(1, 64);
  Field u = Field::sample(g, [](const auto& x) { return 0.1 * std::cos(2.0 * pi * x[0]); });
  ClosedForm a(1.0, u);
  Field H0 = build_H0(g, -1.0, a);

  // H0 + u must be spatially constant, and the constant is pinned by the
  // quadrature of e^{-u}.
  Field shift = H0 + u;
  CHECK(sup_norm(shift - mean(shift)) < 1e-13);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i) acc += std::exp(-u[i]);
  const double c = -std::log(double(acc) * g.cell_volume() / g.volume());
  CHECK(mean(shift) == doctest::Approx(c).epsilon(1e-13));

  // Normalization: integral of e^{H0} equals the volume.
  Field eH = Field(g);
  for (std::size_t i = 0; i < eH.size(); ++i) eH[i] = std::exp(H0[i]);
  CHECK(integrate(eH) == doctest::Approx(g.volume()).epsilon(1e-12));
}

TEST_CASE("normalization of the background potential holds on the 4-torus too") {
  Grid g(2, 16);
  Field u = random_bandlimited(g, 7, 0.08, 2);
  FlowProblem p = make_problem(g, -1.0, 2.0, ClosedForm(1.0, u));
  Field eH(g);
  for (std::size_t i = 0; i < eH.size(); ++i) eH[i] = std::exp(p.H0[i]);
  CHECK(integrate(eH) == doctest::Approx(p.V).epsilon(1e-12));
  CHECK(p.b == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("class mismatch with the flow constant is rejected") {
  Grid g(1, 32);
  CHECK_THROWS_AS(build_H0(g, -1.0, ClosedForm(g, 0.5)), CohomologyMismatchError);
  CHECK_THROWS_AS(make_problem(g, 0.0, 2.0, ClosedForm(g, 1.0)), CohomologyMismatchError);
  // lambda = 0 goes with a purely exact form.
  Field u = Field::sample(g, [](const auto& x) { return 0.05 * std::sin(2.0 * pi * x[0]); });
  FlowProblem p0 = make_problem(g, 0.0, 2.0, ClosedForm(0.0, u));
  CHECK(p0.b == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("adding an exact part to the form leaves the flow constant unchanged") {
  Grid g(2, 16);
  Field u = random_bandlimited(g, 3, 0.06, 2);
  const double b0 = build_b(ClosedForm(g, 2.0), g);
  const double b1 = build_b(ClosedForm(2.0, u), g);
  CHECK(b0 == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(std::abs(b1 - b0) < 1e-10);
}

TEST_CASE("stationary seed has exactly vanishing right-hand sides") {
  for (int n : {1, 2}) {
    Grid g(n, n == 1 ? 32 : 16);
    FlowProblem p = make_problem(g, -1.0, 2.0, ClosedForm(g, 1.0));
    PotentialState s(g);
    CHECK(sup_norm(rhs_varphi(s, p)) == 0.0);
    CHECK(sup_norm(rhs_F(s, p)) == 0.0);
    double rm = -1.0, rf = -1.0;
    stationarity_residual(s, p, rm, rf);
    CHECK(rm == 0.0);
    CHECK(rf == 0.0);
  }
}

TEST_CASE("right-hand sides on constant states follow by direct substitution") {
  Grid g(1, 32);
  FlowProblem p = make_problem(g, -1.0, 2.0, ClosedForm(g, 1.0));

  PotentialState s(Field(g, 0.0), Field(g, 0.7));
  Field r = rhs_varphi(s, p);
  CHECK(sup_norm(r + Field(g, 0.7)) < 1e-15);
  CHECK(sup_norm(rhs_F(s, p)) < 1e-14);

  // varphi constant: metric unchanged, only the zeroth-order terms act.
  PotentialState s2(Field(g, 0.4), Field(g, -0.3));
  CHECK(sup_norm(rhs_varphi(s2, p) - Field(g, -1.0 * 0.4 + 0.3)) < 1e-14);
  CHECK(sup_norm(rhs_F(s2, p)) < 1e-14);
}

TEST_CASE("form equation reduces to a flat heat term on the unperturbed metric") {
  for (int n : {1, 2}) {
    Grid g(n, n == 1 ? 64 : 16);
    Field u = random_bandlimited(g, 17, 0.04, 2);
    FlowProblem p = make_problem(g, -1.0, 3.0, ClosedForm(1.0, u));
    PotentialState s(g);
    // varphi = 0, F = 0: rhs_F = -kappa * (flat laplacian of u).
    Field want = laplacian_flat(u) * (-p.kappa);
    CHECK(sup_norm(rhs_F(s, p) - want) < 1e-11);
  }
}

TEST_CASE("right-hand sides match their composition from public pieces") {
  Grid g(2, 16);
  Field u = random_bandlimited(g, 23, 0.04, 2);
  FlowProblem p = make_problem(g, -1.0, 2.0, ClosedForm(1.0, u));
  Field varphi = safe_potential(g, 29, 0.01, 2);
  Field F = random_bandlimited(g, 31, 0.2, 2);
  PotentialState s(varphi, F, 0.0);

  Field want_v = log_field(volume_density(varphi));
  want_v -= p.H0;
  want_v += varphi * p.lambda;
  want_v -= F;
  CHECK(sup_norm(rhs_varphi(s, p) - want_v) < 1e-14);

  Field want_f = laplace_beltrami_potential(F, varphi);
  want_f -= trace_form_potential(varphi, p.alpha0.coeff, p.alpha0.potential_u);
  want_f += p.b / p.V;
  want_f *= p.kappa;
  CHECK(sup_norm(rhs_F(s, p) - want_f) < 1e-14);

  Field dv(g), df(g);
  potential_rhs(s, p, dv, df);
  CHECK(sup_norm(dv - rhs_varphi(s, p)) == 0.0);
  CHECK(sup_norm(df - rhs_F(s, p)) == 0.0);
}

TEST_CASE("form equation integrates to zero against the evolving volume") {
  // The defining property of the flow constant.  Pointwise quadrature, so the
  // discrete identity holds to roundoff for band-limited states.
  for (int n : {1, 2}) {
    Grid g(n, n == 1 ? 64 : 16);
    for (unsigned seed : {1u, 2u, 3u, 4u}) {
      Field u = random_bandlimited(g, 100 + seed, 0.05, 2);
      FlowProblem p = make_problem(g, -1.0, 2.0, ClosedForm(1.0, u));
      Field varphi = safe_potential(g, 200 + seed, 0.012, 2);
      Field F = random_bandlimited(g, 300 + seed, 0.3, 2);
      PotentialState s(varphi, F, 0.0);
      CHECK(std::abs(rhs_F_mean(s, p)) < 1e-10);
    }
  }
}

TEST_CASE("degenerate metric aborts the right-hand sides with the flow time") {
  Grid g(1, 64);
  FlowProblem p = make_problem(g, -1.0, 2.0, ClosedForm(g, 1.0));
  Field bad = Field::sample(g, [](const auto& x) { return 0.1 * std::cos(2.0 * pi * x[0]); });
  PotentialState s(bad, Field(g), 2.5);
  CHECK_THROWS_AS(rhs_varphi(s, p), MetricDegenerateError);
  try {
    rhs_F(s, p);
    CHECK(false);
  } catch (const MetricDegenerateError& e) {
    CHECK(e.time == doctest::Approx(2.5));
  }
}

TEST_CASE("sum of the potentials is monitored in sup norm") {
  Grid g(1, 32);
  PotentialState cancel(Field(g, 1.0), Field(g, -1.0));
  CHECK(phi_plus_F_sup(cancel) == 0.0);
  Field a = Field::sample(g, [](const auto& x) { return 0.01 * std::cos(2.0 * pi * x[0]); });
  Field b = Field::sample(g, [](const auto& x) { return 0.02 * std::sin(2.0 * pi * x[1]); });
  PotentialState s(a, b);
  CHECK(phi_plus_F_sup(s) == doctest::Approx(sup_norm(a + b)).epsilon(1e-15));
}

TEST_CASE("stationarity residual reports the sup norms of both equations") {
  Grid g(1, 32);
  FlowProblem p = make_problem(g, -1.0, 2.0, ClosedForm(g, 1.0));
  Field varphi = safe_potential(g, 41, 0.008, 2);
  Field F = random_bandlimited(g, 43, 0.1, 2);
  PotentialState s(varphi, F, 0.0);
  double rm = 0.0, rf = 0.0;
  stationarity_residual(s, p, rm, rf);
  CHECK(rm == doctest::Approx(sup_norm(rhs_varphi(s, p))).epsilon(1e-15));
  CHECK(rf == doctest::Approx(sup_norm(rhs_F(s, p)) / p.kappa).epsilon(1e-15));
  CHECK(rm > 0.0);
}

TEST_CASE("spatially constant data reduces to the scalar linear equation") {
  // varphi' = lambda*varphi - F0 with F frozen.  Closed form against a fine
  // scalar integration, and against the grid right-hand sides.
  const double lam = -1.0, F0 = 1.0, v0 = 2.0;
  for (double t : {0.3, 0.7, 2.0}) {
    const double fine = rk4_scalar([&](double y) { return lam * y - F0; }, v0, t, 200000);
    CHECK(constant_potential_solution(v0, F0, lam, t) == doctest::Approx(fine).epsilon(1e-12));
  }
  CHECK(constant_potential_solution(v0, F0, 0.0, 1.5) == doctest::Approx(v0 - F0 * 1.5));
  // Equilibrium of the scalar equation.
  CHECK(constant_potential_solution(F0 / lam, F0, lam, 4.0) == doctest::Approx(F0 / lam));

  Grid g(1, 32);
  FlowProblem p = make_problem(g, lam, 2.0, ClosedForm(g, -lam));
  PotentialState s(Field(g, v0), Field(g, F0));
  CHECK(sup_norm(rhs_varphi(s, p) - Field(g, lam * v0 - F0)) < 1e-14);
  CHECK(sup_norm(rhs_F(s, p)) < 1e-14);
}

TEST_CASE("mismatched grids are rejected") {
  Grid g(1, 32), h(1, 64);
  ClosedForm a(h, 1.0);
  CHECK_THROWS_AS(build_H0(g, -1.0, a), ShapeMismatchError);
  CHECK_THROWS_AS(build_b(a, g), ShapeMismatchError);
}
