#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lyz/grid.hpp"

using namespace lyz;

namespace {

constexpr double pi = std::numbers::pi;

// Small band-limited test field: fixed modes, seeded random amplitudes.
Field random_bandlimited(const Grid& g, unsigned seed, int max_mode = 5) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  struct Wave {
    std::array<int, kMaxRealAxes> m;
    double a, phase;
  };
  std::vector<Wave> waves;
  std::uniform_int_distribution<int> mode(-max_mode, max_mode);
  for (int j = 0; j < 6; ++j) {
    Wave w;
    for (int a = 0; a < kMaxRealAxes; ++a)
      w.m[a] = a < g.real_axes() ? mode(rng) : 0;
    w.a = amp(rng);
    w.phase = pi * amp(rng);
    waves.push_back(w);
  }
  return Field::sample(g, [&](const std::array<double, kMaxRealAxes>& x) {
    double v = 0.0;
    for (const auto& w : waves) {
      double arg = w.phase;
      for (int a = 0; a < kMaxRealAxes; ++a) arg += 2.0 * pi * w.m[a] * x[a] / 1.0;
      v += w.a * std::cos(arg);
    }
    return v;
  });
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("grid basics and validation") {
  Grid g(1, 32);
  CHECK(g.real_axes() == 2);
  CHECK(g.point_count() == 32u * 32u);
  CHECK(g.volume() == doctest::Approx(1.0));
  CHECK(g.cell_volume() == doctest::Approx(1.0 / 1024.0));
  CHECK(g.dealias_cutoff() == 10);

  Grid g2(2, 16, 2.0);
  CHECK(g2.real_axes() == 4);
  CHECK(g2.point_count() == 65536u);
  CHECK(g2.volume() == doctest::Approx(16.0));

  CHECK_THROWS_AS(Grid(3, 32), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1, 12), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1, 4), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1, 32, -1.0), std::invalid_argument);

  Field a(g), b(Grid(1, 16));
  CHECK_THROWS_AS(a += b, ShapeMismatchError);
}

TEST_CASE("flat laplacian matches analytic oracle, one complex dimension") {
  Grid g(1, 32);
  // f = cos(2 pi x): Euclidean laplacian -4 pi^2 f, halved by convention.
  Field f = Field::sample(g, [](const auto& x) { return std::cos(2.0 * pi * x[0]); });
  Field lap = laplacian_flat(f);
  Field want = f * (-2.0 * pi * pi);
  CHECK(max_abs_diff(lap, want) < 1e-11);

  // f = sin(2 pi x) sin(4 pi y): Euclidean -(4+16) pi^2 f, halved -> -10 pi^2 f.
  Field h = Field::sample(g, [](const auto& x) {
    return std::sin(2.0 * pi * x[0]) * std::sin(4.0 * pi * x[1]);
  });
  Field lap_h = laplacian_flat(h);
  Field want_h = h * (-10.0 * pi * pi);
  CHECK(max_abs_diff(lap_h, want_h) < 1e-10);
}

TEST_CASE("flat laplacian matches analytic oracle, two complex dimensions") {
  Grid g(2, 16);
  Field f = Field::sample(g, [](const auto& x) { return std::cos(2.0 * pi * x[2]); });
  Field lap = laplacian_flat(f);
  Field want = f * (-2.0 * pi * pi);
  CHECK(max_abs_diff(lap, want) < 1e-11);
}

TEST_CASE("period scaling of derivatives") {
  Grid g(1, 32, 2.0);
  Field f = Field::sample(g, [](const auto& x) { return std::cos(pi * x[0]); });
  // One full wave over period 2: laplacian_flat = -(1/2) pi^2 f.
  Field lap = laplacian_flat(f);
  CHECK(max_abs_diff(lap, f * (-0.5 * pi * pi)) < 1e-12);
}

TEST_CASE("first and second derivatives against mode oracles") {
  Grid g(1, 32);
  Field f = Field::sample(g, [](const auto& x) {
    return std::sin(2.0 * pi * 3.0 * x[0]) + 0.25 * std::cos(2.0 * pi * x[1]);
  });
  Field dx = derivative(f, 0);
  Field want_dx = Field::sample(g, [](const auto& x) {
    return 6.0 * pi * std::cos(2.0 * pi * 3.0 * x[0]);
  });
  CHECK(max_abs_diff(dx, want_dx) < 1e-10);

  Field dy = derivative(f, 1);
  Field want_dy = Field::sample(g, [](const auto& x) {
    return -0.5 * pi * std::sin(2.0 * pi * x[1]);
  });
  CHECK(max_abs_diff(dy, want_dy) < 1e-10);

  Field fxy = Field::sample(g, [](const auto& x) {
    return std::sin(2.0 * pi * x[0]) * std::sin(2.0 * pi * x[1]);
  });
  Field mixed = second_derivative(fxy, 0, 1);
  Field want_mixed = Field::sample(g, [](const auto& x) {
    return 4.0 * pi * pi * std::cos(2.0 * pi * x[0]) * std::cos(2.0 * pi * x[1]);
  });
  CHECK(max_abs_diff(mixed, want_mixed) < 1e-10);

  Field pure = second_derivative(fxy, 0, 0);
  CHECK(max_abs_diff(pure, fxy * (-4.0 * pi * pi)) < 1e-10);
}

TEST_CASE("gradient squared and integration by parts") {
  Grid g(1, 32);
  Field f = Field::sample(g, [](const auto& x) { return std::sin(2.0 * pi * x[0]); });
  // (1/2)|grad f|^2 = 2 pi^2 cos^2(2 pi x), band-limited below the cutoff.
  Field gs = gradient_squared_flat(f);
  Field want = Field::sample(g, [](const auto& x) {
    double c = std::cos(2.0 * pi * x[0]);
    return 2.0 * pi * pi * c * c;
  });
  CHECK(max_abs_diff(gs, want) < 1e-10);

  Field u = random_bandlimited(g, 7u);
  Field v = random_bandlimited(g, 11u);
  double lhs = integrate(pointwise_multiply(u, laplacian_flat(v)));
  double rhs = integrate(pointwise_multiply(v, laplacian_flat(u)));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

  double energy = integrate(gradient_squared_flat(u));
  double by_parts = -integrate(pointwise_multiply(u, laplacian_flat(u)));
  CHECK(energy == doctest::Approx(by_parts).epsilon(1e-10));
}

TEST_CASE("poisson solve inverts the flat laplacian on mean-zero data") {
  Grid g(1, 32);
  Field rhs = Field::sample(g, [](const auto& x) { return std::cos(2.0 * pi * x[0]); });
  Field u = poisson_solve_flat(rhs);
  // Oracle: u = -cos(2 pi x) / (2 pi^2).
  Field want = rhs * (-1.0 / (2.0 * pi * pi));
  CHECK(max_abs_diff(u, want) < 1e-12);
  CHECK(std::abs(mean(u)) < 1e-14);
  CHECK(max_abs_diff(laplacian_flat(u), rhs) < 1e-11);

  Field bad = rhs + 0.5;
  CHECK_THROWS_AS(poisson_solve_flat(bad), NonZeroMeanError);
}

TEST_CASE("quadrature on flat and weighted measures") {
  Grid g(1, 32);
  Field one(g, 1.0);
  CHECK(integrate(one) == doctest::Approx(1.0).epsilon(1e-14));

  Field s = Field::sample(g, [](const auto& x) { return std::sin(2.0 * pi * x[0]); });
  CHECK(std::abs(integrate(s)) < 1e-14);

  // Constant weight e^{log 2} = 2 doubles the measure.
  Field w(g, 0.0);
  w += std::log(2.0);
  CHECK(integrate(one, exp_field(w)) == doctest::Approx(2.0).epsilon(1e-13));

  Grid g2(2, 16, 2.0);
  Field one2(g2, 1.0);
  CHECK(integrate(one2) == doctest::Approx(16.0).epsilon(1e-13));
}

TEST_CASE("round trip and constant exactness") {
  Grid g(1, 64);
  Field f = random_bandlimited(g, 3u);
  Field back = spectral_roundtrip(f);
  CHECK(max_abs_diff(back, f) < 1e-13 * std::max(1.0, sup_norm(f)));

  // Constants must survive transforms and cleaning bit for bit; the stepper
  // relies on this to hold stationary data exactly.
  Field c(g, 0.3);
  Field rt = spectral_roundtrip(c);
  CHECK(max_abs_diff(rt, c) == 0.0);
  Field cleaned = spectral_clean(c);
  CHECK(max_abs_diff(cleaned, c) == 0.0);
}

TEST_CASE("dealiasing removes only modes past the cutoff") {
  Grid g(1, 32);  // cutoff 10
  Field low = Field::sample(g, [](const auto& x) { return std::cos(2.0 * pi * 9.0 * x[0]); });
  CHECK(max_abs_diff(dealias(low), low) < 1e-12);

  Field high = Field::sample(g, [](const auto& x) { return std::cos(2.0 * pi * 13.0 * x[0]); });
  CHECK(sup_norm(dealias(high)) < 1e-12);

  // sin^2 at mode 8 puts its oscillating part at mode 16, past the cutoff:
  // the dealiased product keeps only the constant 1/2.
  Field s8 = Field::sample(g, [](const auto& x) { return std::sin(2.0 * pi * 8.0 * x[0]); });
  Field prod = multiply(s8, s8);
  Field half(g, 0.5);
  CHECK(max_abs_diff(prod, half) < 1e-12);

  // pointwise_multiply keeps the raw values.
  Field raw = pointwise_multiply(s8, s8);
  double deviation = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i)
    deviation = std::max(deviation, std::abs(raw[i] - s8[i] * s8[i]));
  CHECK(deviation == 0.0);
}

TEST_CASE("populated mode scan and symbol bound") {
  Grid g(1, 32);
  Field c(g, 4.2);
  CHECK(max_populated_mode(c) == 0);

  Field f = Field::sample(g, [](const auto& x) {
    return 1.0 + 0.1 * std::cos(2.0 * pi * 3.0 * x[0]) + 0.05 * std::sin(2.0 * pi * 5.0 * x[1]);
  });
  CHECK(max_populated_mode(f) == 5);

  CHECK(laplace_symbol_bound(g, 4) == doctest::Approx(64.0 * pi * pi));
  Grid g2(2, 16, 2.0);
  CHECK(laplace_symbol_bound(g2, 4) == doctest::Approx(2.0 * 16.0 * pi * pi));
}

TEST_CASE("pointwise exp and log") {
  Grid g(1, 16);
  Field f(g, 0.0);
  CHECK(max_abs_diff(exp_field(f), Field(g, 1.0)) < 1e-14);
  Field two(g, 2.0);
  Field lg = log_field(two);
  CHECK(max_abs_diff(lg, Field(g, std::log(2.0))) < 1e-14);

  Field zero(g, 0.0);
  CHECK_THROWS_AS(log_field(zero), NonFiniteError);

  Field inf(g, 1.0);
  inf[5] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(require_finite(inf, "test"), NonFiniteError);
}
