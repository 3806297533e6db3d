#include "nsinf/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace nsinf {

namespace {

std::string band_key(int j) { return "j=" + std::to_string(j); }

void gl01_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p0 = 1.0, p1 = t, dp = 0.0;
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

std::string cube_key(const std::array<std::int64_t, 3>& k, int d) {
  std::ostringstream os;
  os << "k=(" << k[0];
  for (int a = 1; a < d; ++a) os << "," << k[a];
  os << ")";
  return os.str();
}

} // namespace

double NormReport::aggregate() const {
  if (std::isinf(q)) {
    double m = 0.0;
    for (const auto& [k, v] : per_band) m = std::max(m, v);
    return m;
  }
  double s = 0.0;
  for (const auto& [k, v] : per_band) s += std::pow(v, q);
  return std::pow(s, 1.0 / q);
}

std::string NormReport::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["total"] = total;
  j["q"] = q;
  auto arr = nlohmann::json::array();
  for (const auto& [key, v] : per_band) arr.push_back({{"band", key}, {"value", v}});
  j["per_band"] = arr;
  j["truncation_estimate"] = truncation_estimate;
  j["truncation_warning"] = truncation_warning;
  return j.dump();
}

// ---------------------------------------------------------------------------
// dense-grid L^p
// ---------------------------------------------------------------------------

double lp_norm(const GridField& f, double p) {
  if (p < 1.0) throw Error(ErrorCode::invalid_argument, "lp_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.cell_volume(), 1.0 / p);
}

double lp_norm(const ComplexGridField& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::int64_t i = 0; i < f.re.size(); ++i) m = std::max(m, f.abs_at(i));
    return m;
  }
  double s = 0.0;
  for (std::int64_t i = 0; i < f.re.size(); ++i) s += std::pow(f.abs_at(i), p);
  return std::pow(s * f.re.cell_volume(), 1.0 / p);
}

double lp_norm(const VectorGridField& u, double p) {
  int d = u.dim();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::int64_t i = 0; i < u.comp[0].size(); ++i) {
      double q2 = 0.0;
      for (int c = 0; c < d; ++c) q2 += u.comp[c].values()[i] * u.comp[c].values()[i];
      m = std::max(m, q2);
    }
    return std::sqrt(m);
  }
  double s = 0.0;
  for (std::int64_t i = 0; i < u.comp[0].size(); ++i) {
    double q2 = 0.0;
    for (int c = 0; c < d; ++c) q2 += u.comp[c].values()[i] * u.comp[c].values()[i];
    s += std::pow(q2, p / 2.0);
  }
  return std::pow(s * u.comp[0].cell_volume(), 1.0 / p);
}

// ---------------------------------------------------------------------------
// dense-grid Besov
// ---------------------------------------------------------------------------

NormReport besov_norm(const GridField& f, double s, double p, double q, int band_lo, int band_hi,
                      const LPFrame& frame) {
  if (band_lo < frame.j_min() || band_hi > frame.j_max())
    throw Error(ErrorCode::invalid_argument, "besov_norm: bands outside frame");
  NormReport rep;
  {
    std::ostringstream os;
    os << "Besov(s=" << s << ",p=" << p << ",q=" << q << ",bands=[" << band_lo << "," << band_hi
       << "])";
    rep.kind = os.str();
  }
  rep.q = q;
  HalfSpectrum spec = fft(f);
  for (int j = band_lo; j <= band_hi; ++j) {
    HalfSpectrum bs = spec;
    apply_multiplier_inplace(bs, [&](const double* xi) -> cplx { return frame.phi_hat(j, xi); });
    GridField piece = ifft(bs);
    rep.per_band.emplace_back(band_key(j), lp_norm(piece, p) * std::pow(2.0, s * j));
  }
  rep.total = rep.aggregate();

  double lo_r = std::ldexp(1.0, band_lo - 1), hi_r = std::ldexp(1.0, band_hi + 1);
  double out_mass = spectral_mass_outside(spec, hi_r) +
                    (spectral_mass_total(spec) - spectral_mass_outside(spec, lo_r));
  double total_mass = std::max(spectral_mass_total(spec), 1e-300);
  double w = std::max(std::pow(2.0, s * (band_lo - 1)), std::pow(2.0, s * (band_hi + 1)));
  rep.truncation_estimate = w * lp_norm(f, 2.0) * std::sqrt(std::max(out_mass, 0.0) / total_mass);
  rep.truncation_warning = rep.truncation_estimate > 0.01 * std::max(rep.total, 1e-300);
  return rep;
}

// ---------------------------------------------------------------------------
// modulation norm via windowed demodulated synthesis
// ---------------------------------------------------------------------------

namespace {

using CubeMap = std::map<std::array<std::int64_t, 3>, double>;

// bin spectral energy into cube windows: a mode at xi lands in the cubes
// k in {floor(xi_a)-1, floor(xi_a)} per axis
void bin_modes(const FullSpectrum& s, int d, CubeMap& energy) {
  std::int64_t n0 = s.axes[0].n;
  std::int64_t n1 = d > 1 ? s.axes[1].n : 1;
  std::int64_t n2 = d > 2 ? s.axes[2].n : 1;
  double peak = 0.0;
  for (const auto& m : s.modes) peak = std::max(peak, std::norm(m));
  double floor_e = 1e-30 * peak;
  std::size_t idx = 0;
  for (std::int64_t i2 = 0; i2 < n2; ++i2) {
    double x2 = d > 2 ? s.xi(2, i2) : 0.0;
    for (std::int64_t i1 = 0; i1 < n1; ++i1) {
      double x1 = d > 1 ? s.xi(1, i1) : 0.0;
      for (std::int64_t i0 = 0; i0 < n0; ++i0, ++idx) {
        double e = std::norm(s.modes[idx]);
        if (e <= floor_e) continue;
        double xi[3] = {s.xi(0, i0), x1, x2};
        std::int64_t base[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a) base[a] = static_cast<std::int64_t>(std::floor(xi[a]));
        int combos = 1 << d;
        for (int c = 0; c < combos; ++c) {
          std::array<std::int64_t, 3> k{};
          for (int a = 0; a < d; ++a) k[a] = base[a] - 1 + ((c >> a) & 1);
          energy[k] += e;
        }
      }
    }
  }
}

// L^p norm of the demodulated cube piece; multiple spectra are treated as
// vector components (pointwise Euclidean modulus).
double cube_piece_lp(const std::vector<const FullSpectrum*>& comps, const CubePartition& part,
                     const std::array<std::int64_t, 3>& k, double p) {
  const FullSpectrum& s0 = *comps[0];
  int d = s0.d;
  std::int64_t n0 = s0.axes[0].n;
  std::int64_t n1 = d > 1 ? s0.axes[1].n : 1;
  std::int64_t ntotal = n0 * n1 * (d > 2 ? s0.axes[2].n : 1);
  double invN = 1.0 / static_cast<double>(ntotal);

  // coarse synthesis grid for the baseband piece (|zeta|_inf <= 1)
  std::array<std::int64_t, 3> nc{1, 1, 1};
  for (int a = 0; a < d; ++a) {
    std::int64_t want = static_cast<std::int64_t>(std::ceil(s0.axes[a].length / (kPi / 8.0)));
    std::int64_t n = 8;
    while (n < want) n <<= 1;
    nc[a] = n;
  }
  std::int64_t nsmall = nc[0] * nc[1] * nc[2];

  std::vector<std::vector<cplx>> small(comps.size());
  for (auto& v : small) v.assign(static_cast<std::size_t>(nsmall), cplx(0));

  std::int64_t ia_lo[3] = {0, 0, 0}, ia_hi[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    double L = s0.axes[a].length;
    ia_lo[a] = static_cast<std::int64_t>(std::ceil(k[a] * L / kTwoPi - 1e-12));
    ia_hi[a] = static_cast<std::int64_t>(std::floor((k[a] + 2.0) * L / kTwoPi));
  }
  auto mode_flat = [&](std::int64_t nu, int a) -> std::int64_t {
    const Axis& ax = s0.axes[a];
    if (2 * nu > ax.n || 2 * nu < -ax.n) return -1;
    return (nu >= 0) ? nu : nu + ax.n;
  };

  double z[3] = {0, 0, 0};
  for (std::int64_t nu2 = (d > 2 ? ia_lo[2] : 0); nu2 <= (d > 2 ? ia_hi[2] : 0); ++nu2) {
    std::int64_t i2 = d > 2 ? mode_flat(nu2, 2) : 0;
    if (i2 < 0) continue;
    for (std::int64_t nu1 = (d > 1 ? ia_lo[1] : 0); nu1 <= (d > 1 ? ia_hi[1] : 0); ++nu1) {
      std::int64_t i1 = d > 1 ? mode_flat(nu1, 1) : 0;
      if (i1 < 0) continue;
      for (std::int64_t nu0 = ia_lo[0]; nu0 <= ia_hi[0]; ++nu0) {
        std::int64_t i0 = mode_flat(nu0, 0);
        if (i0 < 0) continue;
        std::size_t idx = static_cast<std::size_t>(i0 + n0 * (i1 + n1 * i2));
        double xi[3] = {kTwoPi * nu0 / s0.axes[0].length,
                        d > 1 ? kTwoPi * nu1 / s0.axes[1].length : 0.0,
                        d > 2 ? kTwoPi * nu2 / s0.axes[2].length : 0.0};
        for (int a = 0; a < d; ++a) z[a] = xi[a] - static_cast<double>(k[a]);
        double chi = part.chi(z);
        if (chi == 0.0) continue;
        double phase = 0.0;
        std::int64_t sm[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a) {
          double zeta = xi[a] - static_cast<double>(k[a] + 1);
          phase += zeta * s0.axes[a].origin;
          std::int64_t nu = std::llround(zeta * s0.axes[a].length / kTwoPi);
          sm[a] = ((nu % nc[a]) + nc[a]) % nc[a];
        }
        cplx ph = std::exp(cplx(0.0, phase)) * chi * invN;
        std::size_t sidx = static_cast<std::size_t>(sm[0] + nc[0] * (sm[1] + nc[1] * sm[2]));
        for (std::size_t c = 0; c < comps.size(); ++c)
          small[c][sidx] += comps[c]->modes[idx] * ph;
      }
    }
  }

  FullSpectrum fsmall;
  fsmall.d = d;
  for (int a = 0; a < d; ++a) fsmall.axes[a] = Axis{0.0, s0.axes[a].length, nc[a]};
  std::vector<double> sum2(static_cast<std::size_t>(nsmall), 0.0);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    fsmall.modes = std::move(small[c]);
    for (auto& m : fsmall.modes) m *= static_cast<double>(nsmall);
    ComplexGridField piece = ifft_full(fsmall);
    for (std::int64_t i = 0; i < piece.re.size(); ++i)
      sum2[static_cast<std::size_t>(i)] += piece.re.values()[i] * piece.re.values()[i] +
                                           piece.im.values()[i] * piece.im.values()[i];
  }
  double cellvol = 1.0;
  for (int a = 0; a < d; ++a) cellvol *= s0.axes[a].length / static_cast<double>(nc[a]);
  double total = 0.0;
  for (double a2 : sum2) total += std::pow(a2, p / 2.0);
  return std::pow(total * cellvol, 1.0 / p);
}

NormReport modulation_from_spectra(const std::vector<const FullSpectrum*>& comps,
                                   const CubePartition& part) {
  NormReport rep;
  rep.kind = "Modulation(M3,1)";
  rep.q = 1.0;
  int d = comps[0]->d;
  CubeMap energy;
  for (const auto* s : comps) bin_modes(*s, d, energy);
  double total_energy = 0.0;
  for (const auto& [k, e] : energy) total_energy += e;
  double skipped = 0.0;
  for (const auto& [k, e] : energy) {
    if (!part.contains(k)) {
      skipped += e;
      continue;
    }
    if (e < 1e-28 * total_energy) continue;
    double v = cube_piece_lp(comps, part, k, 3.0);
    if (v > 0.0) rep.per_band.emplace_back(cube_key(k, d), v);
  }
  std::sort(rep.per_band.begin(), rep.per_band.end());
  rep.total = rep.aggregate();
  rep.truncation_estimate =
      (total_energy > 0.0) ? rep.total * std::sqrt(skipped / total_energy) : 0.0;
  rep.truncation_warning = rep.truncation_estimate > 0.01 * std::max(rep.total, 1e-300);
  return rep;
}

} // namespace

NormReport modulation_norm_spectrum(const FullSpectrum& s, const CubePartition& part) {
  return modulation_from_spectra({&s}, part);
}

NormReport modulation_norm(const GridField& f, const CubePartition& part) {
  FullSpectrum s = fft_full(f);
  return modulation_from_spectra({&s}, part);
}

double modulation_norm_value(const GridField& f, const CubePartition& part) {
  return modulation_norm(f, part).total;
}

double modulation_norm_value(const VectorGridField& u, const CubePartition& part) {
  std::vector<FullSpectrum> ss;
  ss.reserve(u.comp.size());
  for (const auto& c : u.comp) ss.push_back(fft_full(c));
  std::vector<const FullSpectrum*> ps;
  for (const auto& s : ss) ps.push_back(&s);
  return modulation_from_spectra(ps, part).total;
}

// ---------------------------------------------------------------------------
// patchwork fast paths
// ---------------------------------------------------------------------------

double carrier_mean_abs_pow(double p) {
  return std::tgamma((p + 1.0) / 2.0) / (std::sqrt(kPi) * std::tgamma(p / 2.0 + 1.0));
}

double ball_lp_from_spectrum(const HalfSpectrum& s, const std::array<double, 3>& center,
                             double radius, double p) {
  int d = s.d;
  // gather significant modes once
  struct Mode {
    double xi[3];
    cplx c;
    double w;
  };
  std::vector<Mode> modes;
  std::int64_t n0h = s.n0h(), n0 = s.axes[0].n;
  std::int64_t n1 = d > 1 ? s.axes[1].n : 1;
  std::int64_t n2 = d > 2 ? s.axes[2].n : 1;
  double ntot = 1.0;
  for (int a = 0; a < d; ++a) ntot *= static_cast<double>(s.axes[a].n);
  double peak = 0.0;
  for (const auto& m : s.modes) peak = std::max(peak, std::abs(m));
  std::size_t idx = 0;
  for (std::int64_t i2 = 0; i2 < n2; ++i2)
    for (std::int64_t i1 = 0; i1 < n1; ++i1)
      for (std::int64_t i0 = 0; i0 < n0h; ++i0, ++idx) {
        cplx c = s.modes[idx];
        if (std::abs(c) <= 1e-15 * peak) continue;
        Mode m;
        m.xi[0] = s.xi(0, i0);
        m.xi[1] = d > 1 ? s.xi(1, i1) : 0.0;
        m.xi[2] = d > 2 ? s.xi(2, i2) : 0.0;
        // phase anchored at the box origin
        double oph = 0.0;
        for (int a = 0; a < d; ++a) oph -= m.xi[a] * s.axes[a].origin;
        m.c = c * std::exp(cplx(0.0, oph)) / ntot;
        m.w = (i0 == 0 || (n0 % 2 == 0 && i0 == n0 / 2)) ? 1.0 : 2.0;
        modes.push_back(m);
      }
  auto eval = [&](const double* x) -> double {
    double v = 0.0;
    for (const auto& m : modes) {
      double ph = 0.0;
      for (int a = 0; a < d; ++a) ph += m.xi[a] * x[a];
      v += m.w * (m.c.real() * std::cos(ph) - m.c.imag() * std::sin(ph));
    }
    return v;
  };

  std::vector<double> xr, wr;
  gl01_nodes(32, xr, wr);
  double acc = 0.0;
  if (d == 2) {
    int ntheta = 64;
    for (std::size_t ir = 0; ir < xr.size(); ++ir) {
      double r = radius * xr[ir];
      for (int it = 0; it < ntheta; ++it) {
        double th = kTwoPi * it / ntheta;
        double x[3] = {center[0] + r * std::cos(th), center[1] + r * std::sin(th), 0.0};
        acc += wr[ir] * radius * r * (kTwoPi / ntheta) * std::pow(std::abs(eval(x)), p);
      }
    }
  } else {
    std::vector<double> xc, wc;
    gl01_nodes(16, xc, wc);
    int nphi = 32;
    for (std::size_t ir = 0; ir < xr.size(); ++ir) {
      double r = radius * xr[ir];
      for (std::size_t ic = 0; ic < xc.size(); ++ic) {
        double ct = 2.0 * xc[ic] - 1.0;
        double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int ip = 0; ip < nphi; ++ip) {
          double ph = kTwoPi * ip / nphi;
          double x[3] = {center[0] + r * st * std::cos(ph), center[1] + r * st * std::sin(ph),
                         center[2] + r * ct};
          acc += wr[ir] * radius * r * r * wc[ic] * 2.0 * (kTwoPi / nphi) *
                 std::pow(std::abs(eval(x)), p);
        }
      }
    }
  }
  return std::pow(acc, 1.0 / p);
}

namespace {

std::array<Axis, 3> envelope_axes(const Patch& patch, int d, double pad_physical) {
  double w = patch.core_radius * 1.3 + pad_physical;
  double h = patch.atom.scale() / ((d == 3) ? 2.0 : 4.0);
  std::array<Axis, 3> axes{};
  for (int a = 0; a < d; ++a) {
    std::int64_t n = 8;
    while (n * h < 2.0 * w) n <<= 1;
    axes[a] = Axis{-w, n * h, n};
  }
  return axes;
}

GridField sample_envelope(const PatchField& f, const Patch& patch,
                          const std::array<Axis, 3>& axes) {
  GridField g(f.d, axes);
  const RadialKernel& kern = f.kernel();
  double s = std::ldexp(1.0, patch.atom.j);
  double amp = std::ldexp(1.0, f.d * patch.atom.j);
  g.sample([&](const double* x) {
    double r2 = 0.0;
    for (int a = 0; a < f.d; ++a) r2 += x[a] * x[a];
    return amp * kern(std::sqrt(r2) * s);
  });
  return g;
}

// int |F^{-1}[sigma(zeta) env_hat]|^p over the local box (sigma one-sided)
double envelope_symbol_lp_pow(const FullSpectrum& env_spec,
                              const std::function<double(const double*)>& sigma, int d,
                              double p) {
  FullSpectrum s = env_spec;
  std::int64_t n0 = s.axes[0].n;
  std::int64_t n1 = d > 1 ? s.axes[1].n : 1;
  std::int64_t n2 = d > 2 ? s.axes[2].n : 1;
  std::size_t idx = 0;
  double z[3] = {0, 0, 0};
  bool any = false;
  for (std::int64_t i2 = 0; i2 < n2; ++i2) {
    z[2] = d > 2 ? s.xi(2, i2) : 0.0;
    for (std::int64_t i1 = 0; i1 < n1; ++i1) {
      z[1] = d > 1 ? s.xi(1, i1) : 0.0;
      for (std::int64_t i0 = 0; i0 < n0; ++i0, ++idx) {
        z[0] = s.xi(0, i0);
        double w = sigma(z);
        s.modes[idx] *= w;
        any = any || (w != 0.0 && std::norm(s.modes[idx]) > 0.0);
      }
    }
  }
  if (!any) return 0.0;
  ComplexGridField g = ifft_full(s);
  double total = 0.0;
  for (std::int64_t i = 0; i < g.re.size(); ++i) total += std::pow(g.abs_at(i), p);
  return total * g.re.cell_volume();
}

std::array<Axis, 3> cluster_axes(const PatchField& f, const std::vector<int>& cluster,
                                 const LPFrame& frame, double extra_band) {
  PatchField sub;
  sub.d = f.d;
  sub.profile_order = f.profile_order;
  for (int i : cluster) sub.patches.push_back(f.patches[static_cast<std::size_t>(i)]);
  return recommended_global_axes(sub, frame, extra_band);
}

struct ClusterPlan {
  bool resolved = false;
  std::array<Axis, 3> axes{};
};

ClusterPlan plan_cluster(const PatchField& f, const std::vector<int>& cluster,
                         const LPFrame& frame) {
  ClusterPlan plan;
  if (cluster.size() <= 1) return plan;
  plan.axes = cluster_axes(f, cluster, frame, 0.0);
  std::int64_t total = 1;
  for (int a = 0; a < f.d; ++a) total *= plan.axes[a].n;
  plan.resolved = total <= 40'000'000 &&
                  static_cast<std::size_t>(total) * sizeof(double) * 6 < memory_cap_bytes();
  return plan;
}

GridField render_cluster(const PatchField& f, const std::vector<int>& cluster,
                         const std::array<Axis, 3>& axes, const LPFrame& frame) {
  PatchField sub;
  sub.d = f.d;
  sub.profile_order = f.profile_order;
  for (int i : cluster) sub.patches.push_back(f.patches[static_cast<std::size_t>(i)]);
  return render_global(sub, axes, frame);
}

// streamed correction: int over the cluster hull of |sum|^p - sum |a_i|^p
double streamed_cross_correction(const PatchField& f, const std::vector<int>& cluster,
                                 double p, bool* exact) {
  int d = f.d;
  const RadialKernel& kern = f.kernel();
  std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  std::int64_t qmax = 0;
  double scale_min = 1e300;
  for (int i : cluster) {
    const Patch& pt = f.patches[static_cast<std::size_t>(i)];
    for (int a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], static_cast<double>(pt.atom.center[a]) - 2.0 * pt.core_radius);
      hi[a] = std::max(hi[a], static_cast<double>(pt.atom.center[a]) + 2.0 * pt.core_radius);
    }
    qmax = std::max(qmax, pt.atom.mod_freq);
    scale_min = std::min(scale_min, pt.atom.scale());
  }
  double h0 = qmax > 0 ? kPi / (6.0 * static_cast<double>(qmax)) : scale_min / 6.0;
  double hperp = scale_min / 6.0;
  std::int64_t n[3] = {1, 1, 1};
  for (int a = 0; a < d; ++a) {
    double h = (a == 0) ? h0 : hperp;
    n[a] = static_cast<std::int64_t>(std::ceil((hi[a] - lo[a]) / h)) + 1;
  }
  std::int64_t points = n[0] * n[1] * n[2];
  if (points > 200'000'000) {
    *exact = false;
    return 0.0;
  }
  *exact = true;
  double acc = 0.0;
  double x[3] = {0, 0, 0};
  double cell = 1.0;
  for (int a = 0; a < d; ++a) cell *= (hi[a] - lo[a]) / static_cast<double>(n[a]);
  for (std::int64_t i2 = 0; i2 < (d > 2 ? n[2] : 1); ++i2) {
    x[2] = d > 2 ? lo[2] + (hi[2] - lo[2]) * (i2 + 0.5) / n[2] : 0.0;
    for (std::int64_t i1 = 0; i1 < (d > 1 ? n[1] : 1); ++i1) {
      x[1] = d > 1 ? lo[1] + (hi[1] - lo[1]) * (i1 + 0.5) / n[1] : 0.0;
      for (std::int64_t i0 = 0; i0 < n[0]; ++i0) {
        x[0] = lo[0] + (hi[0] - lo[0]) * (i0 + 0.5) / n[0];
        double sum = 0.0, single = 0.0;
        for (int i : cluster) {
          double v = f.patches[static_cast<std::size_t>(i)].atom.eval(kern, x);
          sum += v;
          single += std::pow(std::abs(v), p);
        }
        acc += std::pow(std::abs(sum), p) - single;
      }
    }
  }
  return acc * cell;
}

} // namespace

double lp_norm(const PatchField& f, double p, const LPFrame& frame) {
  if (p < 1.0) throw Error(ErrorCode::invalid_argument, "lp_norm: p must be >= 1");
  const RadialKernel& kern = f.kernel();
  double mp = carrier_mean_abs_pow(p);
  double phi0_p = std::pow(kern.lp_norm(p), p);
  double acc = 0.0;
  for (const auto& cluster : f.clusters) {
    ClusterPlan plan = plan_cluster(f, cluster, frame);
    if (plan.resolved) {
      GridField g = render_cluster(f, cluster, plan.axes, frame);
      acc += std::pow(lp_norm(g, p), p);
      continue;
    }
    double cluster_acc = 0.0;
    for (int i : cluster) {
      const BumpAtom& atom = f.patches[static_cast<std::size_t>(i)].atom;
      double carrier_factor = atom.mod_freq > 0 ? mp : (atom.sine ? 0.0 : 1.0);
      cluster_acc += std::pow(std::abs(atom.amplitude), p) * carrier_factor * phi0_p *
                     std::pow(2.0, f.d * atom.j * (p - 1.0));
    }
    if (cluster.size() > 1) {
      bool exact = false;
      double corr = streamed_cross_correction(f, cluster, p, &exact);
      if (exact) cluster_acc += corr;
    }
    acc += cluster_acc;
  }
  return std::pow(acc, 1.0 / p);
}

NormReport besov_norm(const PatchField& f, double s, double p, double q, int band_lo, int band_hi,
                      const LPFrame& frame) {
  if (band_lo < frame.j_min() || band_hi > frame.j_max())
    throw Error(ErrorCode::invalid_argument, "besov_norm: bands outside frame");
  NormReport rep;
  {
    std::ostringstream os;
    os << "Besov(s=" << s << ",p=" << p << ",q=" << q << ",bands=[" << band_lo << "," << band_hi
       << "])patch";
    rep.kind = os.str();
  }
  rep.q = q;
  double mp = carrier_mean_abs_pow(p);
  std::map<int, double> band_pow;
  double trunc = 0.0;

  for (const auto& cluster : f.clusters) {
    ClusterPlan plan = plan_cluster(f, cluster, frame);
    if (plan.resolved) {
      GridField g = render_cluster(f, cluster, plan.axes, frame);
      HalfSpectrum spec = fft(g);
      for (int j = band_lo; j <= band_hi; ++j) {
        HalfSpectrum bs = spec;
        apply_multiplier_inplace(bs,
                                 [&](const double* xi) -> cplx { return frame.phi_hat(j, xi); });
        band_pow[j] += std::pow(lp_norm(ifft(bs), p), p);
      }
      double lo_r = std::ldexp(1.0, band_lo - 1), hi_r = std::ldexp(1.0, band_hi + 1);
      double out_mass = spectral_mass_outside(spec, hi_r) +
                        (spectral_mass_total(spec) - spectral_mass_outside(spec, lo_r));
      trunc +=
          lp_norm(g, 2.0) * std::sqrt(std::max(out_mass, 0.0) /
                                      std::max(spectral_mass_total(spec), 1e-300));
      continue;
    }
    for (int i : cluster) {
      const Patch& patch = f.patches[static_cast<std::size_t>(i)];
      const BumpAtom& atom = patch.atom;
      if (atom.amplitude == 0.0 || (atom.mod_freq == 0 && atom.sine)) continue;
      GridField env = sample_envelope(f, patch, envelope_axes(patch, f.d, 8.0));
      FullSpectrum env_spec = fft_full(env);
      double qc = static_cast<double>(atom.mod_freq);
      double mean = atom.mod_freq > 0 ? mp : 1.0;
      double amp = atom.mod_freq > 0 ? std::abs(atom.amplitude) : std::abs(atom.amplitude);
      for (int j = band_lo; j <= band_hi; ++j) {
        // quick support screen: the shifted annulus must meet the band
        double band_hi_r = std::ldexp(1.0, j + 1), band_lo_r = std::ldexp(1.0, j - 1);
        double env_hi = std::ldexp(1.0, atom.j + 1);
        if (qc > 0 && (qc + env_hi < band_lo_r || qc - env_hi > band_hi_r)) continue;
        if (qc == 0 && (env_hi < band_lo_r || std::ldexp(1.0, atom.j - 1) > band_hi_r)) continue;
        double gpow = envelope_symbol_lp_pow(
            env_spec,
            [&](const double* z) {
              double r2 = (z[0] + qc) * (z[0] + qc);
              for (int a = 1; a < f.d; ++a) r2 += z[a] * z[a];
              return frame.phi_hat_radial(j, std::sqrt(r2));
            },
            f.d, p);
        band_pow[j] += std::pow(amp, p) * mean * gpow;
      }
    }
  }
  for (int j = band_lo; j <= band_hi; ++j) {
    double v = std::pow(band_pow[j], 1.0 / p);
    rep.per_band.emplace_back(band_key(j), v * std::pow(2.0, s * j));
  }
  rep.total = rep.aggregate();
  rep.truncation_estimate = trunc;
  rep.truncation_warning = rep.truncation_estimate > 0.01 * std::max(rep.total, 1e-300);
  return rep;
}

NormReport modulation_norm(const PatchField& f, const LPFrame& frame) {
  NormReport rep;
  rep.kind = "Modulation(M3,1)patch";
  rep.q = 1.0;
  CubeMap cube_pow;

  for (const auto& cluster : f.clusters) {
    ClusterPlan plan = plan_cluster(f, cluster, frame);
    if (plan.resolved) {
      GridField g = render_cluster(f, cluster, plan.axes, frame);
      FullSpectrum spec = fft_full(g);
      std::array<double, 3> ximax{};
      for (int a = 0; a < f.d; ++a) ximax[a] = kPi / plan.axes[a].h();
      CubePartition part = CubePartition::covering(f.d, ximax, f.profile_order);
      NormReport sub = modulation_from_spectra({&spec}, part);
      for (const auto& [key, v] : sub.per_band) {
        std::array<std::int64_t, 3> k{};
        std::sscanf(key.c_str(), "k=(%ld,%ld,%ld)", &k[0], &k[1], &k[2]);
        cube_pow[k] += std::pow(v, 3.0);
      }
      continue;
    }
    for (int i : cluster) {
      const Patch& patch = f.patches[static_cast<std::size_t>(i)];
      const BumpAtom& atom = patch.atom;
      if (atom.amplitude == 0.0 || (atom.mod_freq == 0 && atom.sine)) continue;
      GridField env = sample_envelope(f, patch, envelope_axes(patch, f.d, 40.0));
      FullSpectrum env_spec = fft_full(env);
      CubeMap env_energy;
      bin_modes(env_spec, f.d, env_energy);
      double tot = 0.0;
      for (const auto& [k, e] : env_energy) tot += e;
      CubePartition unit = CubePartition::covering(f.d, {4.0, 4.0, 4.0}, f.profile_order);
      double amp = atom.mod_freq > 0 ? std::abs(atom.amplitude) / 2.0 : std::abs(atom.amplitude);
      for (const auto& [kap, e] : env_energy) {
        if (e < 1e-26 * tot) continue;
        double val_pow = envelope_symbol_lp_pow(
            env_spec,
            [&](const double* z) {
              double zz[3] = {z[0] - static_cast<double>(kap[0]),
                              f.d > 1 ? z[1] - static_cast<double>(kap[1]) : 0.0,
                              f.d > 2 ? z[2] - static_cast<double>(kap[2]) : 0.0};
              return unit.chi(zz);
            },
            f.d, 3.0);
        double piece = std::pow(amp, 3.0) * val_pow;
        if (piece <= 0.0) continue;
        std::array<std::int64_t, 3> kplus = kap;
        kplus[0] += atom.mod_freq;
        cube_pow[kplus] += piece;
        if (atom.mod_freq > 0) {
          std::array<std::int64_t, 3> kminus{};
          for (int a = 0; a < f.d; ++a) kminus[a] = -kplus[a] - 2;
          cube_pow[kminus] += piece;
        }
      }
    }
  }
  for (const auto& [k, v] : cube_pow) {
    double norm = std::cbrt(v);
    if (norm > 0.0) rep.per_band.emplace_back(cube_key(k, f.d), norm);
  }
  std::sort(rep.per_band.begin(), rep.per_band.end());
  rep.total = rep.aggregate();
  return rep;
}

// ---------------------------------------------------------------------------
// probes
// ---------------------------------------------------------------------------

double bilinear_constant_probe(const GridField& f, const GridField& g,
                               const CubePartition& part) {
  GridField prod = GridField::like(f);
  {
    auto o = prod.values();
    auto a = f.values();
    auto b = g.values();
    for (std::int64_t i = 0; i < prod.size(); ++i) o[i] = a[i] * b[i];
  }
  double nf = modulation_norm_value(f, part);
  double ng = modulation_norm_value(g, part);
  if (nf <= 0.0 || ng <= 0.0)
    throw Error(ErrorCode::invalid_argument, "bilinear probe: zero denominator");
  return modulation_norm_value(prod, part) / (nf * ng);
}


MaxRegCurve maximal_regularity_probe(const VectorGridField& f, const std::vector<double>& T_list,
                                     const PhysicalParams& p, const QuadratureSpec& quad,
                                     const CubePartition& part) {
  MaxRegCurve curve;
  double nf = modulation_norm_value(f, part);
  if (nf == 0.0) {
    curve.T = T_list;
    curve.value.assign(T_list.size(), 0.0);
    return curve;
  }
  auto integrand = [&](double t) -> double {
    VectorGridField e = apply_lame(f, t, p);
    VectorGridField le = apply_lame_generator(e, p);
    return modulation_norm_value(le, part);
  };
  std::vector<double> xg, wg;
  gl01_nodes(std::max(quad.nodes / 2, 4), xg, wg);
  double acc = 0.0, t_prev = 0.0;
  for (double T : T_list) {
    int panels = 3;
    for (int ip = 0; ip < panels; ++ip) {
      double a = t_prev + (T - t_prev) * ip / panels;
      double b = t_prev + (T - t_prev) * (ip + 1) / panels;
      for (std::size_t i = 0; i < xg.size(); ++i)
        acc += (b - a) * wg[i] * integrand(a + (b - a) * xg[i]);
    }
    t_prev = T;
    curve.T.push_back(T);
    curve.value.push_back(acc / nf);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < curve.T.size(); ++i) {
    double s = std::sqrt(std::log(std::exp(1.0) + curve.T[i]));
    num += curve.value[i] * s;
    den += s * s;
  }
  curve.fit_a = den > 0 ? num / den : 0.0;
  double r2 = 0.0, v2 = 0.0;
  for (std::size_t i = 0; i < curve.T.size(); ++i) {
    double s = std::sqrt(std::log(std::exp(1.0) + curve.T[i]));
    double r = curve.value[i] - curve.fit_a * s;
    r2 += r * r;
    v2 += curve.value[i] * curve.value[i];
  }
  curve.fit_residual = v2 > 0 ? std::sqrt(r2 / v2) : 0.0;
  return curve;
}

} // namespace nsinf
