// Periodic spectral grid on a flat complex torus plus the Field type and the
// flat-background spectral operations everything else is built from.
//
// Conventions (load-bearing, shared by all modules):
//  - n_complex complex dimensions, 2*n_complex real axes, each axis sampled at
//    N uniform points over [0, period). Axis order x1, y1, x2, y2, row-major
//    with the last axis fastest.
//  - omega_0 is identified with the Lebesgue measure, so integrate(f) is the
//    plain uniform quadrature and the total flat volume equals period^(2n).
//    All 2n-form integrals elsewhere carry the matching 1/n! normalization.
//  - The flat Laplacian is the Kahler one: laplacian_flat = (1/2) * (Euclidean
//    Laplacian over all real axes). gradient_squared_flat is (1/2)|grad f|^2
//    Euclidean, so that integral(gradient_squared_flat(f)) =
//    -integral(f * laplacian_flat(f)) exactly.
//  - Nonlinear products that feed the dynamics are 2/3-rule dealiased: modes
//    with any axis index |m| > N/3 are zeroed. multiply/exp_field/log_field do
//    this; integrate() never does (quadratures act on pointwise values).
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "lyz/errors.hpp"

namespace lyz {

class SpectralEngine;

inline constexpr int kMaxRealAxes = 4;

// Lightweight value type; copies share one immutable FFT engine.
class Grid {
 public:
  Grid() = default;
  // N must be a power of two >= 8; n_complex is 1 or 2.
  Grid(int n_complex, int resolution, double period = 1.0);

  int n_complex() const { return n_complex_; }
  int resolution() const { return resolution_; }
  double period() const { return period_; }
  int real_axes() const { return 2 * n_complex_; }
  std::size_t point_count() const { return point_count_; }
  double cell_volume() const;
  // Total flat volume integral(omega_0^n) = period^(2n).
  double volume() const;
  double spacing() const { return period_ / resolution_; }
  // Largest mode index kept by the 2/3 rule.
  int dealias_cutoff() const { return resolution_ / 3; }

  bool compatible(const Grid& other) const;
  const SpectralEngine& engine() const { return *engine_; }
  bool valid() const { return engine_ != nullptr; }

 private:
  int n_complex_ = 0;
  int resolution_ = 0;
  double period_ = 1.0;
  std::size_t point_count_ = 0;
  std::shared_ptr<const SpectralEngine> engine_;
};

// Real scalar field sampled on a Grid. Plain value semantics.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double fill = 0.0);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  // Coordinates of grid point i, length real_axes().
  static void point(const Grid& g, std::size_t i, std::array<double, kMaxRealAxes>& x);

  // Sample a function of the coordinates.
  static Field sample(const Grid& g,
                      const std::function<double(const std::array<double, kMaxRealAxes>&)>& f);

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator+=(double c);
  Field& operator*=(double c);

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator+(Field a, double c);
Field operator+(double c, Field a);
Field operator-(Field a, double c);
Field operator*(Field a, double c);
Field operator*(double c, Field a);

// ---- spectral operations (flat background) --------------------------------

// (1/2) Euclidean Laplacian, computed spectrally. Exact for band-limited input.
Field laplacian_flat(const Field& f);

// (1/2) |grad f|^2 Euclidean, dealiased (it is a product of derivatives).
Field gradient_squared_flat(const Field& f);

// First derivative along a real axis (0..2n-1). Nyquist mode zeroed.
Field derivative(const Field& f, int axis);

// Mixed/pure second derivative along two real axes.
Field second_derivative(const Field& f, int axis_a, int axis_b);

// Solve laplacian_flat(u) = rhs with mean(u) = 0. Throws NonZeroMeanError if
// |mean(rhs)| > 1e-10 * max(sup|rhs|, 1e-300).
Field poisson_solve_flat(const Field& rhs);

// Uniform quadrature of f (exact for periodic band-limited integrands).
double integrate(const Field& f);

// Quadrature of the pointwise product f * weight. The weight is a volume
// density relative to the flat measure; no dealiasing is applied.
double integrate(const Field& f, const Field& weight);

double mean(const Field& f);
double field_min(const Field& f);
double field_max(const Field& f);
double sup_norm(const Field& f);

// 2/3-rule truncation.
Field dealias(const Field& f);

// Pointwise product followed by dealiasing. Use for anything that feeds the
// dynamics; use integrate(f, w) for quadratures.
Field multiply(const Field& a, const Field& b);

// Pointwise ratio a/b followed by dealiasing.
Field divide(const Field& a, const Field& b);

// Pointwise product with NO dealiasing (diagnostic integrands).
Field pointwise_multiply(const Field& a, const Field& b);

// exp/log evaluated pointwise then dealiased. log_field requires a strictly
// positive argument (throws NonFiniteError otherwise).
Field exp_field(const Field& f);
Field log_field(const Field& f);

// Forward + inverse transform (test hook for round-trip accuracy).
Field spectral_roundtrip(const Field& f);

// Dealias and zero every spectral coefficient below floor_rel times the
// largest coefficient magnitude. Stepper hygiene; not used by Field math.
Field spectral_clean(const Field& f, double floor_rel = 1e-14);

// Largest per-axis mode index whose coefficient exceeds rel times the largest
// coefficient magnitude; 0 for (numerically) constant fields.
int max_populated_mode(const Field& f, double rel = 1e-13);

// Largest magnitude of the flat Laplacian symbol over modes with every axis
// index |m| <= mode_limit, i.e. n * (2 pi * mode_limit / period)^2.
double laplace_symbol_bound(const Grid& g, int mode_limit);

// Throws NonFiniteError naming `what` if any value is not finite.
void require_finite(const Field& f, const char* what);

// ---- spectral engine -------------------------------------------------------

// Immutable FFT plans + mode tables for one grid shape. Created once per Grid,
// shared by copies. Transform calls are thread-safe (new-array execute on
// per-thread scratch buffers).
class SpectralEngine {
 public:
  SpectralEngine(int n_complex, int resolution, double period);
  ~SpectralEngine();
  SpectralEngine(const SpectralEngine&) = delete;
  SpectralEngine& operator=(const SpectralEngine&) = delete;

  std::size_t real_size() const { return real_size_; }
  std::size_t spec_size() const { return spec_size_; }

  // Unnormalized forward r2c; inverse normalizes by point count.
  void forward(std::span<const double> real, std::span<std::complex<double>> spec) const;
  void inverse(std::span<const std::complex<double>> spec, std::span<double> real) const;

  // Signed per-axis mode indices for spectral slot s.
  void modes(std::size_t s, std::array<int, kMaxRealAxes>& m) const;
  // Table of -(1/2) sum_a k_a^2 per spectral slot.
  const std::vector<double>& laplace_symbol() const { return laplace_symbol_; }
  // True where every axis index satisfies |m| <= N/3.
  const std::vector<unsigned char>& dealias_mask() const { return dealias_mask_; }
  // k value for a signed mode index.
  double wavenumber(int m) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t real_size_ = 0;
  std::size_t spec_size_ = 0;
  std::vector<double> laplace_symbol_;
  std::vector<unsigned char> dealias_mask_;
};

}  // namespace lyz
