#include "nsinf/lp_frame.hpp"

#include <cmath>
#include <random>

namespace nsinf {

LPFrame::LPFrame(int j_min, int j_max, int d, int profile_order)
    : j_min_(j_min),
      j_max_(j_max),
      d_(d),
      m_(profile_order),
      psi_transition_(RadialSymbol::cutoff(profile_order, 1.0, 2.0)),
      kernel_(&annulus_kernel(profile_order, d)) {
  if (j_min > j_max) throw Error(ErrorCode::invalid_argument, "j_min > j_max");
  if (d != 2 && d != 3) throw Error(ErrorCode::invalid_argument, "dimension must be 2 or 3");
}

LPFrame build_lp_frame(int j_min, int j_max, int d, int profile_order) {
  return LPFrame(j_min, j_max, d, profile_order);
}

double LPFrame::psi_hat(double rho) const { return psi_transition_.eval(std::abs(rho)); }

double LPFrame::phi_hat_radial(int j, double rho) const {
  double s = std::ldexp(1.0, -j); // 2^-j
  return psi_hat(rho * s) - psi_hat(rho * s * 2.0);
}

double LPFrame::phi_hat(int j, const double* xi) const {
  double r2 = 0.0;
  for (int a = 0; a < d_; ++a) r2 += xi[a] * xi[a];
  return phi_hat_radial(j, std::sqrt(r2));
}

double LPFrame::partition_sum(double rho) const {
  // telescoping: psi(2^-jmax rho) - psi(2^-jmin+1 rho), summed explicitly to
  // exercise the band symbols themselves
  double s = 0.0;
  for (int j = j_min_; j <= j_max_; ++j) s += phi_hat_radial(j, rho);
  return s;
}

double LPFrame::lowpass_hat(double rho) const { return psi_hat(2.0 * std::abs(rho)); }

double LPFrame::truncation_radius(double rel) const { return kernel_->truncation_radius(rel); }

double LPFrame::mass_radius(double p, double eps) const { return kernel_->mass_radius(p, eps); }

// ---------------------------------------------------------------------------
// CubePartition
// ---------------------------------------------------------------------------

CubePartition::CubePartition(int d, std::array<std::int64_t, 3> k_lo,
                             std::array<std::int64_t, 3> k_hi, int profile_order)
    : d_(d), m_(profile_order), k_lo_(k_lo), k_hi_(k_hi) {
  if (d != 2 && d != 3) throw Error(ErrorCode::invalid_argument, "dimension must be 2 or 3");
  for (int a = 0; a < d; ++a)
    if (k_lo_[a] > k_hi_[a]) throw Error(ErrorCode::invalid_argument, "empty cube range");
  step_ = smoothstep_coefficients(profile_order);
}

CubePartition CubePartition::covering(int d, const std::array<double, 3>& xi_max,
                                      int profile_order) {
  std::array<std::int64_t, 3> lo{}, hi{};
  for (int a = 0; a < d; ++a) {
    lo[a] = -static_cast<std::int64_t>(std::ceil(xi_max[a])) - 2;
    hi[a] = static_cast<std::int64_t>(std::ceil(xi_max[a])) + 1;
  }
  return CubePartition(d, lo, hi, profile_order);
}

bool CubePartition::contains(const std::array<std::int64_t, 3>& k) const {
  for (int a = 0; a < d_; ++a)
    if (k[a] < k_lo_[a] || k[a] > k_hi_[a]) return false;
  return true;
}

std::int64_t CubePartition::cube_count() const {
  std::int64_t c = 1;
  for (int a = 0; a < d_; ++a) c *= (k_hi_[a] - k_lo_[a] + 1);
  return c;
}

double CubePartition::window1(double t) const {
  if (t <= 0.0 || t >= 2.0) return 0.0;
  double u = (t <= 1.0) ? t : t - 1.0;
  double s = 0.0;
  for (std::size_t k = step_.size(); k-- > 0;) s = s * u + step_[k];
  return (t <= 1.0) ? s : 1.0 - s;
}

double CubePartition::chi(const double* z) const {
  double v = 1.0;
  for (int a = 0; a < d_; ++a) v *= window1(z[a]);
  return v;
}

// ---------------------------------------------------------------------------
// dense-grid projections
// ---------------------------------------------------------------------------

GridField lp_project(const GridField& f, int j, const LPFrame& frame) {
  if (!frame.contains(j))
    throw Error(ErrorCode::invalid_argument,
                "band " + std::to_string(j) + " outside frame range [" +
                    std::to_string(frame.j_min()) + ", " + std::to_string(frame.j_max()) + "]");
  return apply_multiplier(f, [&](const double* xi) -> cplx {
    return cplx(frame.phi_hat(j, xi), 0.0);
  });
}

ComplexGridField cube_project(const GridField& f, const std::array<std::int64_t, 3>& k,
                              const CubePartition& part) {
  if (!part.contains(k))
    throw Error(ErrorCode::invalid_argument, "cube index outside cube_range");
  FullSpectrum s = fft_full(f);
  std::int64_t n0 = s.axes[0].n;
  std::int64_t n1 = s.d > 1 ? s.axes[1].n : 1;
  std::int64_t n2 = s.d > 2 ? s.axes[2].n : 1;
  double z[3] = {0, 0, 0};
  std::size_t idx = 0;
  for (std::int64_t i2 = 0; i2 < n2; ++i2) {
    double x2 = s.d > 2 ? s.xi(2, i2) : 0.0;
    for (std::int64_t i1 = 0; i1 < n1; ++i1) {
      double x1 = s.d > 1 ? s.xi(1, i1) : 0.0;
      for (std::int64_t i0 = 0; i0 < n0; ++i0, ++idx) {
        z[0] = s.xi(0, i0) - static_cast<double>(k[0]);
        z[1] = x1 - static_cast<double>(k[1]);
        z[2] = x2 - static_cast<double>(k[2]);
        s.modes[idx] *= part.chi(z);
      }
    }
  }
  return ifft_full(s);
}

// ---------------------------------------------------------------------------
// partition checks
// ---------------------------------------------------------------------------

double partition_deviation(const LPFrame& frame, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double lo = std::ldexp(1.0, frame.j_min());
  double hi = std::ldexp(1.0, frame.j_max());
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    // log-uniform radius so every octave is exercised
    double rho = lo * std::pow(hi / lo, uni(rng));
    worst = std::max(worst, std::abs(frame.partition_sum(rho) - 1.0));
  }
  return worst;
}

double cube_partition_deviation(const CubePartition& part, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int d = part.dim();
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    double xi[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
      // interior of the covered box, one cube margin from the edge
      double lo = static_cast<double>(part.k_lo()[a]) + 2.0;
      double hi = static_cast<double>(part.k_hi()[a]);
      xi[a] = lo + (hi - lo) * uni(rng);
    }
    double sum = 0.0;
    std::array<std::int64_t, 3> k{};
    for (int a = 0; a < d; ++a) k[a] = static_cast<std::int64_t>(std::floor(xi[a])) - 1;
    // supp chi(.-k) = [k, k+2): only k = floor(xi)-1 and floor(xi) contribute
    std::array<std::int64_t, 3> kk = k;
    int combos = 1;
    for (int a = 0; a < d; ++a) combos *= 2;
    for (int c = 0; c < combos; ++c) {
      double z[3] = {0, 0, 0};
      for (int a = 0; a < d; ++a) {
        kk[a] = k[a] + ((c >> a) & 1);
        z[a] = xi[a] - static_cast<double>(kk[a]);
      }
      sum += part.chi(z);
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

} // namespace nsinf
