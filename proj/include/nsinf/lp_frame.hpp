#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nsinf/grid_field.hpp"
#include "nsinf/profile.hpp"

namespace nsinf {

/// Dyadic Littlewood-Paley frame. The band symbols telescope a radial cutoff
/// psi (1 on |xi|<=1, 0 on |xi|>=2), so the partition of unity is exact:
///   phi_hat_j(xi) = psi(2^-j |xi|) - psi(2^-j+1 |xi|).
class LPFrame {
public:
  LPFrame(int j_min, int j_max, int d, int profile_order);

  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  int dim() const { return d_; }
  int profile_order() const { return m_; }
  bool contains(int j) const { return j >= j_min_ && j <= j_max_; }

  /// cumulative cutoff psi at radius rho
  double psi_hat(double rho) const;
  /// band symbol at radius rho (exact, vanishes outside [2^{j-1}, 2^{j+1}])
  double phi_hat_radial(int j, double rho) const;
  double phi_hat(int j, const double* xi) const;
  /// sum of band symbols over [j_min, j_max] at radius rho
  double partition_sum(double rho) const;
  /// low-pass symbol with supp in {|xi| <= 1}: psi(2 rho)
  double lowpass_hat(double rho) const;

  /// real-space radial profile of phi_0: phi_j(x) = 2^{dj} G(2^j |x|)
  const RadialKernel& kernel() const { return *kernel_; }
  double phi0_value(double r) const { return (*kernel_)(r); }
  /// largest radius with |phi_0| >= rel * peak (patch truncation radius)
  double truncation_radius(double rel = 1e-12) const;
  /// radius containing all but eps of the L^p mass of phi_0
  double mass_radius(double p, double eps) const;

private:
  int j_min_, j_max_, d_, m_;
  RadialSymbol psi_transition_; // cutoff(m, 1, 2)
  const RadialKernel* kernel_;
};

/// pre: j_min <= j_max (errors otherwise)
LPFrame build_lp_frame(int j_min, int j_max, int d, int profile_order = 7);

/// Unit-cube frequency partition chi(xi - k), k in Z^d, supp chi in [0,2)^d.
class CubePartition {
public:
  CubePartition(int d, std::array<std::int64_t, 3> k_lo, std::array<std::int64_t, 3> k_hi,
                int profile_order = 7);
  /// covering for a field's spectral box [-xi_max, xi_max] per axis
  static CubePartition covering(int d, const std::array<double, 3>& xi_max,
                                int profile_order = 7);

  int dim() const { return d_; }
  const std::array<std::int64_t, 3>& k_lo() const { return k_lo_; }
  const std::array<std::int64_t, 3>& k_hi() const { return k_hi_; }
  bool contains(const std::array<std::int64_t, 3>& k) const;
  std::int64_t cube_count() const;

  /// 1-D window c(t): supp [0,2), sum_k c(t-k) = 1 exactly
  double window1(double t) const;
  /// chi(z) = prod_a window1(z_a)
  double chi(const double* z) const;

private:
  int d_, m_;
  std::array<std::int64_t, 3> k_lo_{}, k_hi_{};
  std::vector<double> step_; // smoothstep coefficients
};

// ---------------------------------------------------------------------------
// projections on dense grids (the PatchField fast paths live in norms.cpp)
// ---------------------------------------------------------------------------

/// phi_j * f via the spectral symbol. errors: band outside frame range.
GridField lp_project(const GridField& f, int j, const LPFrame& frame);

/// F^{-1}[chi(xi - k) f_hat]; one-sided, hence complex. errors: k outside range.
ComplexGridField cube_project(const GridField& f, const std::array<std::int64_t, 3>& k,
                              const CubePartition& part);

/// Deviation statistics of the partition of unity on quasi-random samples of
/// the annulus 2^{j_min} <= |xi| <= 2^{j_max} (max |sum - 1|).
double partition_deviation(const LPFrame& frame, int samples, std::uint64_t seed);

/// Same for the cube partition on the covered box.
double cube_partition_deviation(const CubePartition& part, int samples, std::uint64_t seed);

} // namespace nsinf
