#include "nsinf/field_rep.hpp"

#include <algorithm>
#include <cmath>

namespace nsinf {

double BumpAtom::phase_at_center() const {
  if (mod_freq == 0) return 0.0;
  __int128 prod = static_cast<__int128>(mod_freq) * center[0];
  if (prod < 0 || prod > (static_cast<__int128>(1) << 62))
    throw Error(ErrorCode::invalid_argument, "carrier phase integer exceeds 2^62");
  return reduce_integer_mod_2pi(static_cast<std::int64_t>(prod));
}

double BumpAtom::carrier(double u1) const {
  if (mod_freq == 0) return sine ? 0.0 : 1.0;
  double arg = phase_at_center() + static_cast<double>(mod_freq) * u1;
  return sine ? std::sin(arg) : std::cos(arg);
}

double BumpAtom::envelope(const RadialKernel& k, const double* x) const {
  double r2 = 0.0;
  for (int a = 0; a < d; ++a) {
    double u = x[a] - static_cast<double>(center[a]);
    r2 += u * u;
  }
  double s = std::ldexp(1.0, j); // 2^j
  return std::ldexp(k(std::sqrt(r2) * s), d * j);
}

double BumpAtom::eval(const RadialKernel& k, const double* x) const {
  return amplitude * envelope(k, x) * carrier(x[0] - static_cast<double>(center[0]));
}

// ---------------------------------------------------------------------------
// PatchField
// ---------------------------------------------------------------------------

double PatchField::eval(const double* x) const { return eval_component(-1, x); }

double PatchField::eval_component(int component, const double* x) const {
  const RadialKernel& k = kernel();
  double v = 0.0;
  for (const auto& p : patches) {
    if (component >= 0 && p.atom.component != component) continue;
    bool inside = true;
    for (int a = 0; a < d; ++a)
      if (x[a] < p.lo[a] || x[a] > p.hi[a]) {
        inside = false;
        break;
      }
    if (inside) v += p.atom.eval(k, x);
  }
  return v;
}

void PatchField::bounding_box(std::array<double, 3>& lo, std::array<double, 3>& hi) const {
  for (int a = 0; a < 3; ++a) {
    lo[a] = 1e300;
    hi[a] = -1e300;
  }
  for (const auto& p : patches)
    for (int a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], p.lo[a]);
      hi[a] = std::max(hi[a], p.hi[a]);
    }
}

PatchField PatchField::scaled(double a) const {
  PatchField out = *this;
  for (auto& p : out.patches) p.atom.amplitude *= a;
  return out;
}

PatchField assemble_patchfield(std::vector<BumpAtom> atoms, const LPFrame& frame) {
  if (atoms.empty()) throw Error(ErrorCode::invalid_argument, "assemble_patchfield: no atoms");
  PatchField f;
  f.d = frame.dim();
  f.profile_order = frame.profile_order();
  double rho12 = frame.truncation_radius(1e-12);
  double rho_core = frame.mass_radius(frame.dim(), 1e-10);
  for (const auto& atom : atoms) {
    Patch p;
    p.atom = atom;
    double w = rho12 * atom.scale();
    for (int a = 0; a < f.d; ++a) {
      p.lo[a] = static_cast<double>(atom.center[a]) - w;
      p.hi[a] = static_cast<double>(atom.center[a]) + w;
    }
    p.core_radius = rho_core * atom.scale();
    f.patches.push_back(p);
  }
  // overlap map on truncated boxes
  for (std::size_t i = 0; i < f.patches.size(); ++i)
    for (std::size_t k = i + 1; k < f.patches.size(); ++k) {
      bool hit = true;
      for (int a = 0; a < f.d; ++a)
        if (f.patches[i].hi[a] < f.patches[k].lo[a] || f.patches[k].hi[a] < f.patches[i].lo[a]) {
          hit = false;
          break;
        }
      if (hit) f.overlaps.emplace_back(static_cast<int>(i), static_cast<int>(k));
    }
  // transitive clusters (union-find)
  std::vector<int> parent(f.patches.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [i, k] : f.overlaps) parent[find(i)] = find(k);
  std::vector<std::vector<int>> groups(f.patches.size());
  for (std::size_t i = 0; i < f.patches.size(); ++i)
    groups[static_cast<std::size_t>(find(static_cast<int>(i)))].push_back(static_cast<int>(i));
  for (auto& g : groups)
    if (!g.empty()) f.clusters.push_back(std::move(g));
  return f;
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

namespace {

void render_atom_into(GridField& g, const BumpAtom& atom, const RadialKernel& kern,
                      const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
  int d = g.dim();
  std::int64_t ilo[3] = {0, 0, 0}, ihi[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    const Axis& ax = g.axis(a);
    ilo[a] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((lo[a] - ax.origin) / ax.h())));
    ihi[a] = std::min<std::int64_t>(ax.n - 1,
                                    static_cast<std::int64_t>(std::floor((hi[a] - ax.origin) / ax.h())));
  }
  double theta = atom.mod_freq ? atom.phase_at_center() : 0.0;
  double q = static_cast<double>(atom.mod_freq);
  double s = std::ldexp(1.0, atom.j);
  double amp = atom.amplitude * std::ldexp(1.0, d * atom.j);
  double c0 = static_cast<double>(atom.center[0]);
  double c1 = d > 1 ? static_cast<double>(atom.center[1]) : 0.0;
  double c2 = d > 2 ? static_cast<double>(atom.center[2]) : 0.0;
  for (std::int64_t i2 = (d > 2 ? ilo[2] : 0); i2 <= (d > 2 ? ihi[2] : 0); ++i2) {
    double u2 = d > 2 ? g.coord(2, i2) - c2 : 0.0;
    for (std::int64_t i1 = (d > 1 ? ilo[1] : 0); i1 <= (d > 1 ? ihi[1] : 0); ++i1) {
      double u1 = d > 1 ? g.coord(1, i1) - c1 : 0.0;
      double rperp2 = u1 * u1 + u2 * u2;
      for (std::int64_t i0 = ilo[0]; i0 <= ihi[0]; ++i0) {
        double u0 = g.coord(0, i0) - c0;
        double r = std::sqrt(u0 * u0 + rperp2);
        double env = kern(r * s);
        double carrier;
        if (atom.mod_freq == 0)
          carrier = atom.sine ? 0.0 : 1.0;
        else {
          double arg = theta + q * u0;
          carrier = atom.sine ? std::sin(arg) : std::cos(arg);
        }
        g.at(i0, i1, i2) += amp * env * carrier;
      }
    }
  }
}

} // namespace

GridField atom_to_grid(const BumpAtom& atom, int d, const std::array<Axis, 3>& axes,
                       const LPFrame& frame) {
  if (atom.mod_freq > 0) {
    double need = kPi / (4.0 * static_cast<double>(atom.mod_freq));
    if (axes[0].h() > need * (1.0 + 1e-12))
      throw Error(ErrorCode::invalid_argument,
                  "atom_to_grid: axis-1 spacing " + std::to_string(axes[0].h()) +
                      " too coarse for the carrier; need <= " + std::to_string(need));
  }
  for (int a = 1; a < d; ++a) {
    double need = kPi * atom.scale() / 4.0;
    if (axes[a].h() > need * (1.0 + 1e-12))
      throw Error(ErrorCode::invalid_argument,
                  "atom_to_grid: transverse spacing too coarse for the envelope; need <= " +
                      std::to_string(need));
  }
  GridField g(d, axes);
  double w = frame.truncation_radius(1e-12) * atom.scale();
  std::array<double, 3> lo{}, hi{};
  for (int a = 0; a < d; ++a) {
    lo[a] = static_cast<double>(atom.center[a]) - w;
    hi[a] = static_cast<double>(atom.center[a]) + w;
  }
  render_atom_into(g, atom, frame.kernel(), lo, hi);
  return g;
}

GridField render_global(const PatchField& field, const std::array<Axis, 3>& axes,
                        const LPFrame& frame, int component) {
  std::int64_t total = 1;
  for (int a = 0; a < field.d; ++a) total *= axes[a].n;
  std::size_t bytes = static_cast<std::size_t>(total) * sizeof(double);
  if (bytes > memory_cap_bytes())
    throw Error(ErrorCode::memory_cap,
                "render_global: grid needs " + std::to_string(bytes >> 20) +
                    " MiB (cap " + std::to_string(memory_cap_bytes() >> 20) +
                    " MiB); use the patch path");
  GridField g(field.d, axes);
  for (const auto& p : field.patches) {
    if (component >= 0 && p.atom.component != component) continue;
    render_atom_into(g, p.atom, field.kernel(), p.lo, p.hi);
  }
  return g;
}

std::array<Axis, 3> recommended_global_axes(const PatchField& field, const LPFrame& frame,
                                            double extra_band) {
  // mass-based radii; the pointwise 1e-12 truncation radius of a polynomial-
  // tail profile is far larger than what norm-level accuracy needs
  double rho = frame.mass_radius(field.d, 1e-9);
  double scale_min = 1e300, scale_max = 0.0;
  std::int64_t qmax = 0;
  std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& p : field.patches) {
    double w = rho * p.atom.scale();
    for (int a = 0; a < field.d; ++a) {
      lo[a] = std::min(lo[a], static_cast<double>(p.atom.center[a]) - w);
      hi[a] = std::max(hi[a], static_cast<double>(p.atom.center[a]) + w);
    }
    scale_min = std::min(scale_min, p.atom.scale());
    scale_max = std::max(scale_max, p.atom.scale());
    qmax = std::max(qmax, p.atom.mod_freq);
  }
  double pad = 1.0 * rho * scale_max;
  std::array<Axis, 3> axes{};
  for (int a = 0; a < field.d; ++a) {
    double f_env = 2.0 / scale_min + extra_band;
    double f_max = (a == 0) ? static_cast<double>(qmax) + f_env : f_env;
    double h = kPi / (1.5 * f_max);
    if (a == 0 && qmax > 0) h = std::min(h, kPi / (4.0 * static_cast<double>(qmax)));
    double len = (hi[a] - lo[a]) + 2.0 * pad;
    std::int64_t n = 1;
    while (n * h < len) n <<= 1;
    axes[a] = Axis{lo[a] - pad, n * h, n};
  }
  return axes;
}

} // namespace nsinf
