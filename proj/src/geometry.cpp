#include "lyz/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lyz {

namespace {

constexpr double kDegenerateEig = 1e-8;

void require_n2(const Grid& g, const char* what) {
  if (g.n_complex() != 2)
    throw ShapeMismatchError(std::string(what) + ": needs a two-complex-dimension grid");
}

void require_n1(const Grid& g, const char* what) {
  if (g.n_complex() != 1)
    throw ShapeMismatchError(std::string(what) + ": needs a one-complex-dimension grid");
}

// Pointwise e^{-phi} without filtering (internal building block).
Field exp_neg_pointwise(const Field& phi) {
  Field out(phi.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(-phi[i]);
  return out;
}

}  // namespace

Herm2 normalized_hessian(const Field& f) {
  require_n2(f.grid(), "normalized_hessian");
  // Axes: x1 = 0, y1 = 1, x2 = 2, y2 = 3.
  Herm2 h{Field(f.grid()), Field(f.grid()), Field(f.grid()), Field(f.grid())};
  Field fx1x1 = second_derivative(f, 0, 0);
  Field fy1y1 = second_derivative(f, 1, 1);
  Field fx2x2 = second_derivative(f, 2, 2);
  Field fy2y2 = second_derivative(f, 3, 3);
  Field fx1x2 = second_derivative(f, 0, 2);
  Field fy1y2 = second_derivative(f, 1, 3);
  Field fx1y2 = second_derivative(f, 0, 3);
  Field fy1x2 = second_derivative(f, 1, 2);
  for (std::size_t i = 0; i < f.size(); ++i) {
    h.a11[i] = 0.5 * (fx1x1[i] + fy1y1[i]);
    h.a22[i] = 0.5 * (fx2x2[i] + fy2y2[i]);
    h.re12[i] = 0.5 * (fx1x2[i] + fy1y2[i]);
    h.im12[i] = 0.5 * (fx1y2[i] - fy1x2[i]);
  }
  return h;
}

Field herm2_trace(const Herm2& h) { return h.a11 + h.a22; }

Field herm2_det(const Herm2& h) {
  Field out(h.a11.grid());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = h.a11[i] * h.a22[i] - (h.re12[i] * h.re12[i] + h.im12[i] * h.im12[i]);
  return out;
}

void herm2_eigen_range(const Herm2& h, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (std::size_t i = 0; i < h.a11.size(); ++i) {
    const double m = 0.5 * (h.a11[i] + h.a22[i]);
    const double d = 0.5 * (h.a11[i] - h.a22[i]);
    const double s = std::sqrt(d * d + h.re12[i] * h.re12[i] + h.im12[i] * h.im12[i]);
    lo = std::min(lo, m - s);
    hi = std::max(hi, m + s);
  }
}

// ---- conformal --------------------------------------------------------------

Field scalar_curvature_conformal(const Field& phi) {
  require_n1(phi.grid(), "scalar_curvature_conformal");
  Field lap = laplacian_flat(phi);
  lap *= -1.0;
  return multiply(lap, exp_neg_pointwise(phi));
}

Field laplace_beltrami_conformal(const Field& f, const Field& phi) {
  require_n1(phi.grid(), "laplace_beltrami_conformal");
  return multiply(laplacian_flat(f), exp_neg_pointwise(phi));
}

Field conformal_weight(const Field& phi) {
  Field out(phi.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(phi[i]);
  require_finite(out, "conformal_weight");
  return out;
}

Field scalar_curvature_conformal_pointwise(const Field& phi) {
  require_n1(phi.grid(), "scalar_curvature_conformal_pointwise");
  Field lap = laplacian_flat(phi);
  lap *= -1.0;
  return pointwise_multiply(lap, exp_neg_pointwise(phi));
}

Field laplace_beltrami_conformal_pointwise(const Field& f, const Field& phi) {
  require_n1(phi.grid(), "laplace_beltrami_conformal_pointwise");
  return pointwise_multiply(laplacian_flat(f), exp_neg_pointwise(phi));
}

double k_equivalence_conformal(const Field& phi, const Field& tau) {
  double k = 1.0;
  k = std::max(k, std::exp(field_max(phi)));
  k = std::max(k, std::exp(-field_min(phi)));
  k = std::max(k, sup_norm(tau));
  return k;
}

// ---- potential --------------------------------------------------------------

Field volume_density(const Field& varphi) {
  const Grid& g = varphi.grid();
  if (g.n_complex() == 1) {
    Field rho = laplacian_flat(varphi);
    rho += 1.0;
    return rho;
  }
  Herm2 a = normalized_hessian(varphi);
  a.a11 += 1.0;
  a.a22 += 1.0;
  return herm2_det(a);
}

double metric_min_eigenvalue(const Field& varphi) {
  const Grid& g = varphi.grid();
  if (g.n_complex() == 1) {
    Field rho = laplacian_flat(varphi);
    return 1.0 + field_min(rho);
  }
  Herm2 a = normalized_hessian(varphi);
  a.a11 += 1.0;
  a.a22 += 1.0;
  double lo, hi;
  herm2_eigen_range(a, lo, hi);
  return lo;
}

void require_metric_positive(const Field& varphi, double when) {
  if (metric_min_eigenvalue(varphi) <= kDegenerateEig)
    throw MetricDegenerateError("metric lost positivity", when);
}

Field laplace_beltrami_potential(const Field& f, const Field& varphi) {
  const Grid& g = varphi.grid();
  if (g.n_complex() == 1) {
    Field rho = laplacian_flat(varphi);
    rho += 1.0;
    return divide(laplacian_flat(f), rho);
  }
  Herm2 a = normalized_hessian(varphi);
  Herm2 b = normalized_hessian(f);
  Field num(g), det(g);
  for (std::size_t i = 0; i < num.size(); ++i) {
    const double g11 = 1.0 + a.a11[i];
    const double g22 = 1.0 + a.a22[i];
    num[i] = g22 * b.a11[i] + g11 * b.a22[i]
             - 2.0 * (a.re12[i] * b.re12[i] + a.im12[i] * b.im12[i]);
    det[i] = g11 * g22 - (a.re12[i] * a.re12[i] + a.im12[i] * a.im12[i]);
  }
  return divide(num, det);
}

Field trace_form_potential(const Field& varphi, double c, const Field& u) {
  const Grid& g = varphi.grid();
  if (g.n_complex() == 1) {
    Field rho = laplacian_flat(varphi);
    rho += 1.0;
    Field m = laplacian_flat(u);
    m += c;
    return divide(m, rho);
  }
  Herm2 a = normalized_hessian(varphi);
  Herm2 m = normalized_hessian(u);
  Field num(g), det(g);
  for (std::size_t i = 0; i < num.size(); ++i) {
    const double g11 = 1.0 + a.a11[i];
    const double g22 = 1.0 + a.a22[i];
    const double m11 = c + m.a11[i];
    const double m22 = c + m.a22[i];
    num[i] = g22 * m11 + g11 * m22
             - 2.0 * (a.re12[i] * m.re12[i] + a.im12[i] * m.im12[i]);
    det[i] = g11 * g22 - (a.re12[i] * a.re12[i] + a.im12[i] * a.im12[i]);
  }
  return divide(num, det);
}

Field laplace_beltrami_potential_pointwise(const Field& f, const Field& varphi) {
  const Grid& g = varphi.grid();
  Field out(g);
  if (g.n_complex() == 1) {
    Field rho = laplacian_flat(varphi);
    Field lap = laplacian_flat(f);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lap[i] / (1.0 + rho[i]);
  } else {
    Herm2 a = normalized_hessian(varphi);
    Herm2 b = normalized_hessian(f);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double g11 = 1.0 + a.a11[i];
      const double g22 = 1.0 + a.a22[i];
      const double num = g22 * b.a11[i] + g11 * b.a22[i]
                         - 2.0 * (a.re12[i] * b.re12[i] + a.im12[i] * b.im12[i]);
      out[i] = num / (g11 * g22 - (a.re12[i] * a.re12[i] + a.im12[i] * a.im12[i]));
    }
  }
  require_finite(out, "laplace_beltrami_potential_pointwise");
  return out;
}

Field trace_form_potential_pointwise(const Field& varphi, double c, const Field& u) {
  const Grid& g = varphi.grid();
  Field out(g);
  if (g.n_complex() == 1) {
    Field rho = laplacian_flat(varphi);
    Field m = laplacian_flat(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (c + m[i]) / (1.0 + rho[i]);
  } else {
    Herm2 a = normalized_hessian(varphi);
    Herm2 m = normalized_hessian(u);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double g11 = 1.0 + a.a11[i];
      const double g22 = 1.0 + a.a22[i];
      const double num = g22 * (c + m.a11[i]) + g11 * (c + m.a22[i])
                         - 2.0 * (a.re12[i] * m.re12[i] + a.im12[i] * m.im12[i]);
      out[i] = num / (g11 * g22 - (a.re12[i] * a.re12[i] + a.im12[i] * a.im12[i]));
    }
  }
  require_finite(out, "trace_form_potential_pointwise");
  return out;
}

double k_equivalence_potential(const Field& varphi, double c, const Field& u_alpha) {
  const Grid& g = varphi.grid();
  double k = 1.0;
  if (g.n_complex() == 1) {
    Field rho = laplacian_flat(varphi);
    rho += 1.0;
    Field m = laplacian_flat(u_alpha);
    m += c;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] <= kDegenerateEig)
        throw MetricDegenerateError("metric lost positivity", 0.0);
      k = std::max(k, rho[i]);
      k = std::max(k, 1.0 / rho[i]);
      k = std::max(k, std::abs(m[i]) / rho[i]);
    }
    return k;
  }
  Herm2 a = normalized_hessian(varphi);
  Herm2 m = normalized_hessian(u_alpha);
  for (std::size_t i = 0; i < a.a11.size(); ++i) {
    const double g11 = 1.0 + a.a11[i];
    const double g22 = 1.0 + a.a22[i];
    const double gr = a.re12[i], gi = a.im12[i];
    const double detg = g11 * g22 - (gr * gr + gi * gi);
    const double mg = 0.5 * (g11 + g22);
    const double dg = 0.5 * (g11 - g22);
    const double sg = std::sqrt(dg * dg + gr * gr + gi * gi);
    if (mg - sg <= kDegenerateEig)
      throw MetricDegenerateError("metric lost positivity", 0.0);
    k = std::max(k, mg + sg);
    k = std::max(k, 1.0 / (mg - sg));
    // Eigenvalues of G^{-1} M are real for Hermitian M and positive G.
    const double m11 = c + m.a11[i];
    const double m22 = c + m.a22[i];
    const double mr = m.re12[i], mi = m.im12[i];
    const double tr = (g22 * m11 + g11 * m22 - 2.0 * (gr * mr + gi * mi)) / detg;
    const double dt = (m11 * m22 - (mr * mr + mi * mi)) / detg;
    const double disc = std::max(0.0, 0.25 * tr * tr - dt);
    const double root = std::sqrt(disc);
    k = std::max(k, std::max(std::abs(0.5 * tr + root), std::abs(0.5 * tr - root)));
  }
  return k;
}

Herm2 metric_form(const Field& varphi) {
  require_n2(varphi.grid(), "metric_form");
  Herm2 g = normalized_hessian(varphi);
  g.a11 += 1.0;
  g.a22 += 1.0;
  return g;
}

Herm2 gradient_form(const Field& phi) {
  require_n2(phi.grid(), "gradient_form");
  Field dx1 = derivative(phi, 0), dy1 = derivative(phi, 1);
  Field dx2 = derivative(phi, 2), dy2 = derivative(phi, 3);
  Herm2 out{Field(phi.grid()), Field(phi.grid()), Field(phi.grid()), Field(phi.grid())};
  for (std::size_t i = 0; i < dx1.size(); ++i) {
    out.a11[i] = 0.5 * (dx1[i] * dx1[i] + dy1[i] * dy1[i]);
    out.a22[i] = 0.5 * (dx2[i] * dx2[i] + dy2[i] * dy2[i]);
    out.re12[i] = 0.5 * (dx1[i] * dx2[i] + dy1[i] * dy2[i]);
    out.im12[i] = 0.5 * (dx1[i] * dy2[i] - dy1[i] * dx2[i]);
  }
  return out;
}

double wedge_integral(const Herm2& a, const Herm2& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.a11.size(); ++i)
    acc += 0.5 * (a.a11[i] * b.a22[i] + a.a22[i] * b.a11[i]
                  - 2.0 * (a.re12[i] * b.re12[i] + a.im12[i] * b.im12[i]));
  return double(acc) * a.a11.grid().cell_volume();
}

double wedge_integral(const Herm2& a, const Herm2& b, const Field& weight) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.a11.size(); ++i)
    acc += weight[i] * 0.5 * (a.a11[i] * b.a22[i] + a.a22[i] * b.a11[i]
                              - 2.0 * (a.re12[i] * b.re12[i] + a.im12[i] * b.im12[i]));
  return double(acc) * a.a11.grid().cell_volume();
}

}  // namespace lyz
