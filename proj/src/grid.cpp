#include "lyz/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

namespace lyz {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW's planner is not thread-safe; guard every plan create/destroy.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Per-thread transform scratch, fftw_malloc-aligned so new-array execution
// matches the alignment the plans were created with.
struct Scratch {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  std::size_t real_cap = 0;
  std::size_t spec_cap = 0;

  void ensure(std::size_t rn, std::size_t sn) {
    if (rn > real_cap) {
      fftw_free(real);
      real = static_cast<double*>(fftw_malloc(sizeof(double) * rn));
      real_cap = rn;
    }
    if (sn > spec_cap) {
      fftw_free(spec);
      spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * sn));
      spec_cap = sn;
    }
  }
  ~Scratch() {
    fftw_free(real);
    fftw_free(spec);
  }
};

Scratch& scratch() {
  static thread_local Scratch s;
  return s;
}

}  // namespace

// ---- SpectralEngine --------------------------------------------------------

struct SpectralEngine::Impl {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  double* plan_real = nullptr;
  fftw_complex* plan_spec = nullptr;
  int axes = 0;
  int resolution = 0;
  int half = 0;  // last-axis spectral extent N/2+1
  double period = 1.0;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
    fftw_free(plan_real);
    fftw_free(plan_spec);
  }
};

SpectralEngine::SpectralEngine(int n_complex, int resolution, double period) {
  impl_ = std::make_unique<Impl>();
  impl_->axes = 2 * n_complex;
  impl_->resolution = resolution;
  impl_->half = resolution / 2 + 1;
  impl_->period = period;

  real_size_ = 1;
  for (int a = 0; a < impl_->axes; ++a) real_size_ *= resolution;
  spec_size_ = real_size_ / resolution * impl_->half;

  impl_->plan_real = static_cast<double*>(fftw_malloc(sizeof(double) * real_size_));
  impl_->plan_spec =
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * spec_size_));
  std::vector<int> dims(impl_->axes, resolution);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    impl_->forward = fftw_plan_dft_r2c(impl_->axes, dims.data(), impl_->plan_real,
                                       impl_->plan_spec, FFTW_ESTIMATE);
    impl_->inverse = fftw_plan_dft_c2r(impl_->axes, dims.data(), impl_->plan_spec,
                                       impl_->plan_real, FFTW_ESTIMATE);
  }

  // Mode tables.
  laplace_symbol_.resize(spec_size_);
  dealias_mask_.resize(spec_size_);
  const int cutoff = resolution / 3;
  std::array<int, kMaxRealAxes> m{};
  for (std::size_t s = 0; s < spec_size_; ++s) {
    modes(s, m);
    double k2 = 0.0;
    bool keep = true;
    for (int a = 0; a < impl_->axes; ++a) {
      const double k = wavenumber(m[a]);
      k2 += k * k;
      if (std::abs(m[a]) > cutoff) keep = false;
    }
    laplace_symbol_[s] = -0.5 * k2;
    dealias_mask_[s] = keep ? 1 : 0;
  }
}

SpectralEngine::~SpectralEngine() = default;

double SpectralEngine::wavenumber(int m) const {
  return 2.0 * std::numbers::pi * m / impl_->period;
}

void SpectralEngine::modes(std::size_t s, std::array<int, kMaxRealAxes>& m) const {
  const int N = impl_->resolution;
  const int axes = impl_->axes;
  std::size_t rest = s;
  int idx = static_cast<int>(rest % impl_->half);
  m[axes - 1] = idx;  // half axis: 0..N/2, always non-negative
  rest /= impl_->half;
  for (int a = axes - 2; a >= 0; --a) {
    idx = static_cast<int>(rest % N);
    m[a] = (idx <= N / 2) ? idx : idx - N;
    rest /= N;
  }
  for (int a = axes; a < kMaxRealAxes; ++a) m[a] = 0;
}

void SpectralEngine::forward(std::span<const double> real,
                             std::span<std::complex<double>> spec) const {
  if (real.size() != real_size_ || spec.size() != spec_size_)
    throw ShapeMismatchError("spectral forward: buffer size mismatch");
  Scratch& s = scratch();
  s.ensure(real_size_, spec_size_);
  std::memcpy(s.real, real.data(), sizeof(double) * real_size_);
  fftw_execute_dft_r2c(impl_->forward, s.real, s.spec);
  // std::complex<double> is layout-compatible with fftw_complex.
  std::memcpy(static_cast<void*>(spec.data()), s.spec, sizeof(fftw_complex) * spec_size_);
}

void SpectralEngine::inverse(std::span<const std::complex<double>> spec,
                             std::span<double> real) const {
  if (real.size() != real_size_ || spec.size() != spec_size_)
    throw ShapeMismatchError("spectral inverse: buffer size mismatch");
  Scratch& s = scratch();
  s.ensure(real_size_, spec_size_);
  std::memcpy(s.spec, static_cast<const void*>(spec.data()), sizeof(fftw_complex) * spec_size_);
  fftw_execute_dft_c2r(impl_->inverse, s.spec, s.real);
  const double norm = 1.0 / static_cast<double>(real_size_);
  for (std::size_t i = 0; i < real_size_; ++i) real[i] = s.real[i] * norm;
}

// ---- Grid ------------------------------------------------------------------

Grid::Grid(int n_complex, int resolution, double period)
    : n_complex_(n_complex), resolution_(resolution), period_(period) {
  if (n_complex != 1 && n_complex != 2)
    throw std::invalid_argument("Grid: n_complex must be 1 or 2");
  if (resolution < 8 || !power_of_two(resolution))
    throw std::invalid_argument("Grid: resolution must be a power of two >= 8");
  if (!(period > 0.0)) throw std::invalid_argument("Grid: period must be positive");
  point_count_ = 1;
  for (int a = 0; a < real_axes(); ++a) point_count_ *= resolution;
  engine_ = std::make_shared<SpectralEngine>(n_complex, resolution, period);
}

double Grid::cell_volume() const {
  double c = 1.0;
  for (int a = 0; a < real_axes(); ++a) c *= spacing();
  return c;
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < real_axes(); ++a) v *= period_;
  return v;
}

bool Grid::compatible(const Grid& other) const {
  return n_complex_ == other.n_complex_ && resolution_ == other.resolution_ &&
         period_ == other.period_;
}

// ---- Field -----------------------------------------------------------------

Field::Field(const Grid& grid, double fill) : grid_(grid), values_(grid.point_count(), fill) {}

void Field::point(const Grid& g, std::size_t i, std::array<double, kMaxRealAxes>& x) {
  const int N = g.resolution();
  const double h = g.spacing();
  std::size_t rest = i;
  for (int a = g.real_axes() - 1; a >= 0; --a) {
    x[a] = h * static_cast<double>(rest % N);
    rest /= N;
  }
  for (int a = g.real_axes(); a < kMaxRealAxes; ++a) x[a] = 0.0;
}

Field Field::sample(const Grid& g,
                    const std::function<double(const std::array<double, kMaxRealAxes>&)>& f) {
  Field out(g);
  std::array<double, kMaxRealAxes> x{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    point(g, i, x);
    out[i] = f(x);
  }
  return out;
}

namespace {
void check_shapes(const Field& a, const Field& b, const char* op) {
  if (!a.grid().compatible(b.grid()))
    throw ShapeMismatchError(std::string(op) + ": fields live on different grids");
}
}  // namespace

Field& Field::operator+=(const Field& o) {
  check_shapes(*this, o, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o[i];
  return *this;
}
Field& Field::operator-=(const Field& o) {
  check_shapes(*this, o, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o[i];
  return *this;
}
Field& Field::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}
Field& Field::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator+(Field a, double c) { return a += c; }
Field operator+(double c, Field a) { return a += c; }
Field operator-(Field a, double c) { return a += -c; }
Field operator*(Field a, double c) { return a *= c; }
Field operator*(double c, Field a) { return a *= c; }

// ---- spectral operations ---------------------------------------------------

namespace {

using Spectrum = std::vector<std::complex<double>>;

Spectrum to_spectrum(const Field& f) {
  const SpectralEngine& e = f.grid().engine();
  Spectrum s(e.spec_size());
  e.forward(f.values(), s);
  return s;
}

Field from_spectrum(const Grid& g, std::span<const std::complex<double>> s) {
  Field out(g);
  g.engine().inverse(s, out.values());
  return out;
}

}  // namespace

void require_finite(const Field& f, const char* what) {
  for (double v : f.values())
    if (!std::isfinite(v))
      throw NonFiniteError(std::string(what) + ": non-finite field value");
}

Field laplacian_flat(const Field& f) {
  const SpectralEngine& e = f.grid().engine();
  Spectrum s = to_spectrum(f);
  const auto& sym = e.laplace_symbol();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= sym[i];
  return from_spectrum(f.grid(), s);
}

Field derivative(const Field& f, int axis) {
  const Grid& g = f.grid();
  if (axis < 0 || axis >= g.real_axes())
    throw std::invalid_argument("derivative: axis out of range");
  const SpectralEngine& e = g.engine();
  Spectrum s = to_spectrum(f);
  const int nyq = g.resolution() / 2;
  std::array<int, kMaxRealAxes> m{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    e.modes(i, m);
    if (std::abs(m[axis]) == nyq) {
      s[i] = 0.0;  // odd derivative has no consistent Nyquist mode
    } else {
      s[i] *= std::complex<double>(0.0, e.wavenumber(m[axis]));
    }
  }
  return from_spectrum(g, s);
}

Field second_derivative(const Field& f, int axis_a, int axis_b) {
  const Grid& g = f.grid();
  if (axis_a < 0 || axis_a >= g.real_axes() || axis_b < 0 || axis_b >= g.real_axes())
    throw std::invalid_argument("second_derivative: axis out of range");
  const SpectralEngine& e = g.engine();
  Spectrum s = to_spectrum(f);
  const int nyq = g.resolution() / 2;
  std::array<int, kMaxRealAxes> m{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    e.modes(i, m);
    if (axis_a != axis_b && (std::abs(m[axis_a]) == nyq || std::abs(m[axis_b]) == nyq)) {
      s[i] = 0.0;  // mixed derivative: drop sign-ambiguous Nyquist modes
    } else {
      s[i] *= -e.wavenumber(m[axis_a]) * e.wavenumber(m[axis_b]);
    }
  }
  return from_spectrum(g, s);
}

Field gradient_squared_flat(const Field& f) {
  const Grid& g = f.grid();
  Field acc(g, 0.0);
  for (int a = 0; a < g.real_axes(); ++a) {
    Field d = derivative(f, a);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i] * d[i];
  }
  acc *= 0.5;
  return dealias(acc);
}

Field poisson_solve_flat(const Field& rhs) {
  const double m = mean(rhs);
  const double scale = std::max(sup_norm(rhs), 1e-300);
  if (std::abs(m) > 1e-10 * scale)
    throw NonZeroMeanError("poisson_solve_flat: right-hand side has non-zero mean");
  const SpectralEngine& e = rhs.grid().engine();
  Spectrum s = to_spectrum(rhs);
  const auto& sym = e.laplace_symbol();
  s[0] = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) s[i] /= sym[i];
  return from_spectrum(rhs.grid(), s);
}

double integrate(const Field& f) {
  long double acc = 0.0L;
  for (double v : f.values()) acc += v;
  return static_cast<double>(acc * f.grid().cell_volume());
}

double integrate(const Field& f, const Field& weight) {
  check_shapes(f, weight, "integrate");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i)
    acc += static_cast<long double>(f[i]) * weight[i];
  return static_cast<double>(acc * f.grid().cell_volume());
}

double mean(const Field& f) {
  long double acc = 0.0L;
  for (double v : f.values()) acc += v;
  return static_cast<double>(acc / static_cast<long double>(f.size()));
}

double field_min(const Field& f) {
  return *std::min_element(f.values().begin(), f.values().end());
}

double field_max(const Field& f) {
  return *std::max_element(f.values().begin(), f.values().end());
}

double sup_norm(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

Field dealias(const Field& f) {
  const SpectralEngine& e = f.grid().engine();
  Spectrum s = to_spectrum(f);
  const auto& mask = e.dealias_mask();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!mask[i]) s[i] = 0.0;
  return from_spectrum(f.grid(), s);
}

Field multiply(const Field& a, const Field& b) {
  check_shapes(a, b, "multiply");
  Field p(a.grid());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = a[i] * b[i];
  Field out = dealias(p);
  require_finite(out, "multiply");
  return out;
}

Field divide(const Field& a, const Field& b) {
  check_shapes(a, b, "divide");
  Field p(a.grid());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = a[i] / b[i];
  require_finite(p, "divide");
  return dealias(p);
}

Field pointwise_multiply(const Field& a, const Field& b) {
  check_shapes(a, b, "pointwise_multiply");
  Field p(a.grid());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = a[i] * b[i];
  return p;
}

Field exp_field(const Field& f) {
  Field p(f.grid());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(f[i]);
  require_finite(p, "exp_field");
  return dealias(p);
}

Field log_field(const Field& f) {
  Field p(f.grid());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(f[i] > 0.0)) throw NonFiniteError("log_field: non-positive argument");
    p[i] = std::log(f[i]);
  }
  return dealias(p);
}

Field spectral_roundtrip(const Field& f) {
  Spectrum s = to_spectrum(f);
  return from_spectrum(f.grid(), s);
}

Field spectral_clean(const Field& f, double floor_rel) {
  const SpectralEngine& e = f.grid().engine();
  Spectrum s = to_spectrum(f);
  const auto& mask = e.dealias_mask();
  double top = 0.0;
  for (const auto& c : s) top = std::max(top, std::abs(c));
  const double floor = floor_rel * top;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!mask[i] || std::abs(s[i]) < floor) s[i] = 0.0;
  return from_spectrum(f.grid(), s);
}

int max_populated_mode(const Field& f, double rel) {
  const SpectralEngine& e = f.grid().engine();
  Spectrum s = to_spectrum(f);
  double top = 0.0;
  for (const auto& c : s) top = std::max(top, std::abs(c));
  if (top == 0.0) return 0;
  const double floor = rel * top;
  int m_max = 0;
  std::array<int, kMaxRealAxes> m{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::abs(s[i]) <= floor) continue;
    e.modes(i, m);
    for (int a = 0; a < f.grid().real_axes(); ++a)
      m_max = std::max(m_max, std::abs(m[a]));
  }
  return m_max;
}

double laplace_symbol_bound(const Grid& g, int mode_limit) {
  const double k = 2.0 * std::numbers::pi * mode_limit / g.period();
  return g.n_complex() * k * k;
}

}  // namespace lyz
