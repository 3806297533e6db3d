#pragma once

// Test-side oracles, independent of the library paths they check.

#include <cmath>
#include <random>
#include <vector>

#include "nsinf/field_rep.hpp"
#include "nsinf/grid_field.hpp"
#include "nsinf/lp_frame.hpp"

namespace nsinf::test {

inline std::array<Axis, 3> cubic_axes(int d, double origin, double length, std::int64_t n) {
  std::array<Axis, 3> axes{};
  for (int a = 0; a < d; ++a) axes[a] = Axis{origin, length, n};
  return axes;
}

/// random real field band-limited to band_lo <= |xi| <= band_hi
inline GridField random_band_limited(int d, const std::array<Axis, 3>& axes, double band_lo,
                                     double band_hi, std::uint64_t seed) {
  GridField f(d, axes);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : f.values()) v = gauss(rng);
  HalfSpectrum s = fft(f);
  apply_multiplier_inplace(s, [&](const double* xi) -> cplx {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += xi[a] * xi[a];
    double r = std::sqrt(r2);
    return (r >= band_lo && r <= band_hi) ? 1.0 : 0.0;
  });
  return ifft(s);
}

/// trapezoid-on-grid L^p norm (independent of norms.cpp)
inline double grid_lp(const GridField& f, double p) {
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.cell_volume(), 1.0 / p);
}

inline double max_abs(const GridField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

/// || phi_0 ||_p oracle: dense radial trapezoid of the Hankel-quadrature
/// kernel at three refinements, Richardson-extrapolated (h^2 steps).
inline double phi0_lp_oracle(const RadialKernel& kern, double p, double rmax, int n_base) {
  double omega = (kern.dimension() == 3) ? 4.0 * kPi : 2.0 * kPi;
  auto sum_at = [&](int n) {
    double h = rmax / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      double r = i * h;
      double w = (i == 0 || i == n) ? 0.5 : 1.0;
      s += w * std::pow(std::abs(kern.eval_quadrature(r)), p) * std::pow(r, kern.dimension() - 1.0);
    }
    return omega * s * h;
  };
  double s1 = sum_at(n_base), s2 = sum_at(2 * n_base), s4 = sum_at(4 * n_base);
  double r2 = s2 + (s2 - s1) / 3.0; // h^2 Richardson
  double r4 = s4 + (s4 - s2) / 3.0;
  double extr = r4 + (r4 - r2) / 15.0;
  return std::pow(extr, 1.0 / p);
}

} // namespace nsinf::test
