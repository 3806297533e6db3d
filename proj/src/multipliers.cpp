#include "nsinf/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nsinf {

namespace {

double dot(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

// Gauss-Legendre nodes on [0,1]; small fixed orders are all we need here.
void gl01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p0, p1, dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 + t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

double l2_grid_norm(const GridField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s * f.cell_volume());
}

double l2_grid_norm(const VectorGridField& u) {
  double s = 0.0;
  for (const auto& c : u.comp)
    for (double v : c.values()) s += v * v;
  return std::sqrt(s * u.comp[0].cell_volume());
}

} // namespace

// ---------------------------------------------------------------------------
// semigroups
// ---------------------------------------------------------------------------

GridField apply_heat(const GridField& f, double t, const PhysicalParams& p) {
  p.validate();
  if (t < 0) throw Error(ErrorCode::invalid_argument, "apply_heat: t < 0");
  if (t == 0.0) return f;
  int d = f.dim();
  return apply_multiplier(f, [&](const double* xi) -> cplx {
    return std::exp(-p.kappa * t * dot(xi, xi, d));
  });
}

VectorGridField apply_lame(const VectorGridField& u, double t, const PhysicalParams& p) {
  p.validate();
  if (t < 0) throw Error(ErrorCode::invalid_argument, "apply_lame: t < 0");
  if (t == 0.0) return u;
  int d = u.dim();
  return apply_matrix_multiplier(u, [&](const double* xi, cplx* m) {
    double q2 = dot(xi, xi, d);
    if (q2 == 0.0) {
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m[r + 3 * c] = (r == c) ? 1.0 : 0.0;
      return;
    }
    double eperp = std::exp(-p.mu * t * q2);
    double epar = std::exp(-(2.0 * p.mu + p.lambda) * t * q2);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        double proj = xi[r] * xi[c] / q2;
        m[r + 3 * c] = eperp * ((r == c ? 1.0 : 0.0) - proj) + epar * proj;
      }
  });
}

GridField apply_heat_generator(const GridField& f, const PhysicalParams& p) {
  int d = f.dim();
  return apply_multiplier(f, [&](const double* xi) -> cplx {
    return -p.kappa * dot(xi, xi, d);
  });
}

VectorGridField apply_lame_generator(const VectorGridField& u, const PhysicalParams& p) {
  int d = u.dim();
  return apply_matrix_multiplier(u, [&](const double* xi, cplx* m) {
    double q2 = dot(xi, xi, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        m[r + 3 * c] = -p.mu * q2 * (r == c ? 1.0 : 0.0) - (p.lambda + p.mu) * xi[r] * xi[c];
  });
}

GridField partial_derivative(const GridField& f, int a) {
  return apply_multiplier(f, [a](const double* xi) -> cplx { return cplx(0.0, xi[a]); });
}

// ---------------------------------------------------------------------------
// Duhamel
// ---------------------------------------------------------------------------

namespace {

GridField propagate(const GridField& f, double dt, PropagatorKind kind,
                    const PhysicalParams& p) {
  switch (kind) {
    case PropagatorKind::identity: return f;
    case PropagatorKind::heat: return apply_heat(f, dt, p);
    case PropagatorKind::lame:
      throw Error(ErrorCode::invalid_argument, "scalar duhamel cannot use the lame propagator");
  }
  return f;
}

template <class Field, class Propagate, class Norm>
Field duhamel_impl(const std::function<Field(double)>& source, double t,
                   const Propagate& prop, const Norm& norm, const QuadratureSpec& quad,
                   double* err_out, int* panels_out) {
  quad.validate();
  if (t < 0) throw Error(ErrorCode::invalid_argument, "duhamel: t < 0");
  std::vector<double> x, w;
  gl01(quad.nodes, x, w);

  auto integrate = [&](int panels) -> Field {
    Field acc = source(t); // shape template
    acc *= 0.0;
    for (int ip = 0; ip < panels; ++ip) {
      double s0 = t * ip / panels, s1 = t * (ip + 1) / panels;
      for (int i = 0; i < quad.nodes; ++i) {
        double s = s0 + (s1 - s0) * x[i];
        Field g = prop(source(s), t - s);
        g *= (s1 - s0) * w[i];
        acc += g;
      }
    }
    return acc;
  };

  Field prev = integrate(1);
  int panels = 1;
  double dist = 0.0;
  for (int it = 0; it < quad.max_doublings; ++it) {
    panels *= 2;
    Field next = integrate(panels);
    Field diff = next;
    diff -= prev;
    dist = norm(diff);
    double scale = std::max(norm(next), 1e-300);
    prev = std::move(next);
    if (dist <= quad.rel_tol * scale) {
      if (err_out) *err_out = dist / scale;
      if (panels_out) *panels_out = panels;
      return prev;
    }
  }
  throw Error(ErrorCode::quadrature_failure,
              "duhamel did not converge at the refinement limit; last distance " +
                  std::to_string(dist));
}

} // namespace

DuhamelResult duhamel(const std::function<GridField(double)>& source, double t,
                      PropagatorKind kind, const PhysicalParams& p, const QuadratureSpec& quad) {
  if (t == 0.0) {
    GridField z = source(0.0);
    z *= 0.0;
    return {std::move(z), 0.0, 0};
  }
  DuhamelResult r{GridField(), 0.0, 0};
  r.value = duhamel_impl<GridField>(
      source, t, [&](const GridField& f, double dt) { return propagate(f, dt, kind, p); },
      [&](const GridField& f) { return l2_grid_norm(f); }, quad, &r.err_estimate, &r.panels);
  return r;
}

namespace {
struct VecOps {
  VectorGridField v;
};
} // namespace

DuhamelVecResult duhamel_vec(const std::function<VectorGridField(double)>& source, double t,
                             PropagatorKind kind, const PhysicalParams& p,
                             const QuadratureSpec& quad) {
  quad.validate();
  if (t < 0) throw Error(ErrorCode::invalid_argument, "duhamel: t < 0");
  if (t == 0.0) {
    VectorGridField z = source(0.0);
    for (auto& c : z.comp) c *= 0.0;
    return {std::move(z), 0.0, 0};
  }
  std::vector<double> x, w;
  gl01(quad.nodes, x, w);

  auto prop = [&](VectorGridField f, double dt) -> VectorGridField {
    switch (kind) {
      case PropagatorKind::identity: return f;
      case PropagatorKind::heat:
        for (auto& c : f.comp) c = apply_heat(c, dt, p);
        return f;
      case PropagatorKind::lame: return apply_lame(f, dt, p);
    }
    return f;
  };

  auto integrate = [&](int panels) -> VectorGridField {
    VectorGridField acc = source(t);
    for (auto& c : acc.comp) c *= 0.0;
    for (int ip = 0; ip < panels; ++ip) {
      double s0 = t * ip / panels, s1 = t * (ip + 1) / panels;
      for (int i = 0; i < quad.nodes; ++i) {
        double s = s0 + (s1 - s0) * x[i];
        VectorGridField g = prop(source(s), t - s);
        for (int c = 0; c < g.dim(); ++c) {
          g.comp[c] *= (s1 - s0) * w[i];
          acc.comp[c] += g.comp[c];
        }
      }
    }
    return acc;
  };

  VectorGridField prev = integrate(1);
  int panels = 1;
  double dist = 0.0;
  for (int it = 0; it < quad.max_doublings; ++it) {
    panels *= 2;
    VectorGridField next = integrate(panels);
    VectorGridField diff = next;
    for (int c = 0; c < diff.dim(); ++c) diff.comp[c] -= prev.comp[c];
    dist = l2_grid_norm(diff);
    double scale = std::max(l2_grid_norm(next), 1e-300);
    prev = std::move(next);
    if (dist <= quad.rel_tol * scale) return {std::move(prev), dist / scale, panels};
  }
  throw Error(ErrorCode::quadrature_failure,
              "duhamel_vec did not converge; last distance " + std::to_string(dist));
}

// ---------------------------------------------------------------------------
// Theta_2
// ---------------------------------------------------------------------------

double theta2_symbol(const double* xi, const double* eta, double t, int d) {
  if (t < 0) throw Error(ErrorCode::invalid_argument, "theta2_symbol: t < 0");
  double diff[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) diff[a] = xi[a] - eta[a];
  double pf = -dot(diff, eta, d); // i(xi-eta) . i eta
  double z = dot(diff, diff, d) + dot(eta, eta, d) - dot(xi, xi, d);
  double tz = t * z;
  double m;
  if (std::abs(tz) < 1e-4) {
    // (1 - e^{-tz})/z = t (1 - tz/2 + (tz)^2/6 - (tz)^3/24 + ...)
    m = t * (1.0 - tz / 2.0 + tz * tz / 6.0 - tz * tz * tz / 24.0);
  } else {
    m = (1.0 - std::exp(-tz)) / z;
  }
  return pf * m;
}

GridField dtilde_form(const VectorGridField& u, const VectorGridField& v,
                      const PhysicalParams& p) {
  int d = u.dim();
  GridField out = GridField::like(u.comp[0]);
  GridField divu = GridField::like(out), divv = GridField::like(out);
  for (int i = 0; i < d; ++i) {
    for (int jc = 0; jc < d; ++jc) {
      GridField du = partial_derivative(u.comp[jc], i);
      GridField dv = partial_derivative(v.comp[jc], i);
      auto o = out.values();
      auto a = du.values();
      auto b = dv.values();
      for (std::int64_t n = 0; n < out.size(); ++n) o[n] += 2.0 * p.mu * a[n] * b[n];
    }
    GridField dui = partial_derivative(u.comp[i], i);
    GridField dvi = partial_derivative(v.comp[i], i);
    divu += dui;
    divv += dvi;
  }
  auto o = out.values();
  auto a = divu.values();
  auto b = divv.values();
  for (std::int64_t n = 0; n < out.size(); ++n) o[n] += p.lambda * a[n] * b[n];
  return out;
}

DuhamelResult theta2_direct(const std::function<VectorGridField(double)>& u1_at, double t,
                            const PhysicalParams& p, const QuadratureSpec& quad) {
  auto source = [&](double s) -> GridField {
    VectorGridField u1 = u1_at(s);
    return dtilde_form(u1, u1, p);
  };
  return duhamel(source, t, PropagatorKind::heat, p, quad);
}

// ---------------------------------------------------------------------------
// scalar model term, three paths
// ---------------------------------------------------------------------------

GridField model_term_quadrature(const GridField& w, double t, const QuadratureSpec& quad) {
  PhysicalParams unit; // mu irrelevant; model uses unit heat in both slots
  unit.kappa = 1.0;
  int d = w.dim();
  auto source = [&](double s) -> GridField {
    GridField ws = apply_heat(w, s, unit);
    GridField out = GridField::like(w);
    for (int a = 0; a < d; ++a) {
      GridField g = partial_derivative(ws, a);
      auto o = out.values();
      auto gv = g.values();
      for (std::int64_t n = 0; n < out.size(); ++n) o[n] += gv[n] * gv[n];
    }
    return out;
  };
  return duhamel(source, t, PropagatorKind::heat, unit, quad).value;
}

GridField model_term_closed_form(const GridField& w, double t) {
  PhysicalParams unit;
  GridField w2 = GridField::like(w);
  {
    auto o = w2.values();
    auto a = w.values();
    for (std::int64_t n = 0; n < w.size(); ++n) o[n] = a[n] * a[n];
  }
  GridField hw2 = apply_heat(w2, t, unit);
  GridField hw = apply_heat(w, t, unit);
  auto o = hw2.values();
  auto a = hw.values();
  for (std::int64_t n = 0; n < hw2.size(); ++n) o[n] = 0.5 * (o[n] - a[n] * a[n]);
  return hw2;
}

GridField model_term_symbol_path(const GridField& w, double t, double xi_cut) {
  int d = w.dim();
  FullSpectrum s = fft_full(w);
  std::int64_t n0 = s.axes[0].n;
  std::int64_t n1 = d > 1 ? s.axes[1].n : 1;
  std::int64_t n2 = d > 2 ? s.axes[2].n : 1;
  std::int64_t total = n0 * n1 * n2;
  double invN = 1.0 / static_cast<double>(total);

  // significant data modes
  double peak = 0.0;
  for (const auto& m : s.modes) peak = std::max(peak, std::abs(m));
  struct Mode {
    double xi[3];
    cplx c;
    std::int64_t flat;
  };
  std::vector<Mode> data;
  std::vector<Mode> out_modes;
  std::size_t idx = 0;
  for (std::int64_t i2 = 0; i2 < n2; ++i2) {
    double x2 = d > 2 ? s.xi(2, i2) : 0.0;
    for (std::int64_t i1 = 0; i1 < n1; ++i1) {
      double x1 = d > 1 ? s.xi(1, i1) : 0.0;
      for (std::int64_t i0 = 0; i0 < n0; ++i0, ++idx) {
        double x0 = s.xi(0, i0);
        double amp = std::abs(s.modes[idx]);
        double r2 = x0 * x0 + x1 * x1 + x2 * x2;
        if (amp > 1e-13 * peak)
          data.push_back(Mode{{x0, x1, x2}, s.modes[idx] * invN, static_cast<std::int64_t>(idx)});
        if (r2 <= xi_cut * xi_cut)
          out_modes.push_back(Mode{{x0, x1, x2}, cplx(0), static_cast<std::int64_t>(idx)});
      }
    }
  }

  // M_hat(xi) = e^{-t|xi|^2} sum_eta sym(xi,eta,t) w_hat(xi-eta) w_hat(eta);
  // xi-eta is looked up on the periodic mode lattice
  auto mode_index = [&](double* q) -> std::int64_t {
    std::int64_t iv[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
      const Axis& ax = s.axes[a];
      double kf = q[a] * ax.length / kTwoPi;
      std::int64_t k = static_cast<std::int64_t>(std::llround(kf));
      if (2 * k > ax.n || 2 * k <= -ax.n) return -1; // outside lattice
      iv[a] = (k >= 0) ? k : k + ax.n;
    }
    return iv[0] + n0 * (iv[1] + n1 * iv[2]);
  };

  std::vector<cplx> mhat(static_cast<std::size_t>(total), cplx(0));
  for (auto& om : out_modes) {
    double q2 = dot(om.xi, om.xi, d);
    cplx acc(0);
    for (const auto& em : data) {
      double diff[3];
      for (int a = 0; a < d; ++a) diff[a] = om.xi[a] - em.xi[a];
      std::int64_t fl = mode_index(diff);
      if (fl < 0) continue;
      cplx wd = s.modes[static_cast<std::size_t>(fl)] * invN;
      if (std::abs(wd) <= 1e-13 * peak * invN * total) continue;
      acc += theta2_symbol(om.xi, em.xi, t, d) * wd * em.c;
    }
    mhat[static_cast<std::size_t>(om.flat)] = std::exp(-t * q2) * acc;
  }

  // synthesize on the grid (inverse c2c of mhat * N)
  FullSpectrum ms;
  ms.d = d;
  ms.axes = s.axes;
  ms.modes.assign(mhat.size(), cplx(0));
  for (std::size_t i = 0; i < mhat.size(); ++i)
    ms.modes[i] = mhat[i] * static_cast<double>(total);
  ComplexGridField g = ifft_full(ms);
  return g.re;
}

} // namespace nsinf
