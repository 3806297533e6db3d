#pragma once

#include <array>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nsinf/common.hpp"

namespace nsinf {

using cplx = std::complex<double>;

/// One axis of a uniform periodized sampling box.
struct Axis {
  double origin = 0.0;
  double length = 0.0;
  std::int64_t n = 0;
  double h() const { return length / static_cast<double>(n); }
};

/// Real scalar field sampled on an anisotropic uniform box. Axis 0 (x1) is
/// fastest in memory, matching the binary dump layout. Spectral views treat
/// the box as periodic; callers pad so wrap-around sits below tolerance.
class GridField {
public:
  GridField() = default;
  GridField(int d, std::array<Axis, 3> axes);

  static GridField like(const GridField& other) { return GridField(other.d_, other.axes_); }

  int dim() const { return d_; }
  const Axis& axis(int a) const { return axes_[a]; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  double cell_volume() const;

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double& at(std::int64_t i0, std::int64_t i1 = 0, std::int64_t i2 = 0);
  double at(std::int64_t i0, std::int64_t i1 = 0, std::int64_t i2 = 0) const;

  /// physical coordinate of sample index along axis a
  double coord(int a, std::int64_t i) const { return axes_[a].origin + axes_[a].h() * i; }

  void fill(double v);
  /// sample f(x) at every grid point (x given as d doubles)
  void sample(const std::function<double(const double*)>& f);

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(double s);

  // -- binary dump: header + float64 payload, axis-0 fastest, JSON sidecar --
  void dump(const std::string& path) const;
  static GridField load(const std::string& path);

private:
  int d_ = 0;
  std::array<Axis, 3> axes_{};
  std::vector<double> data_;
};

/// d-component vector field on a common box.
struct VectorGridField {
  std::vector<GridField> comp;
  int dim() const { return static_cast<int>(comp.size()); }
  static VectorGridField zeros(int d, const GridField& like);
};

/// Complex field as a real/imaginary pair (cube projections are one-sided in
/// frequency, hence complex in space).
struct ComplexGridField {
  GridField re, im;
  double abs_at(std::int64_t flat) const {
    return std::hypot(re.values()[flat], im.values()[flat]);
  }
};

// ---------------------------------------------------------------------------
// FFT layer (FFTW, plans cached, FFTW_ESTIMATE for run-to-run determinism)
// ---------------------------------------------------------------------------

/// Half-spectrum of a real field (r2c layout, axis 0 halved: i0 in [0, n0/2]).
struct HalfSpectrum {
  int d = 0;
  std::array<Axis, 3> axes{};
  std::vector<cplx> modes;
  std::int64_t n0h() const { return axes[0].n / 2 + 1; }
  /// wavenumber of mode index along axis a (axis 0 nonnegative only)
  double xi(int a, std::int64_t i) const;
};

HalfSpectrum fft(const GridField& f);
GridField ifft(const HalfSpectrum& s);

/// Full complex spectrum of a real field (c2c), for one-sided operations.
struct FullSpectrum {
  int d = 0;
  std::array<Axis, 3> axes{};
  std::vector<cplx> modes; // axis-0 fastest, all axes full length
  double xi(int a, std::int64_t i) const;
};

FullSpectrum fft_full(const GridField& f);
ComplexGridField ifft_full(const FullSpectrum& s);

/// Multiply the half-spectrum of f by sigma(xi) and transform back.
/// sigma must satisfy sigma(-xi) = conj(sigma(xi)) so the result is real.
GridField apply_multiplier(const GridField& f, const std::function<cplx(const double*)>& sigma);
void apply_multiplier_inplace(HalfSpectrum& s, const std::function<cplx(const double*)>& sigma);

/// Matrix multiplier on a vector field: u_hat(xi) -> M(xi) u_hat(xi).
/// M is given as a callback filling an d*d column-major matrix; it must
/// satisfy M(-xi) = conj(M(xi)).
VectorGridField apply_matrix_multiplier(
    const VectorGridField& u, const std::function<void(const double*, cplx*)>& mat);

/// Spectral L2 mass (Plancherel, box-periodic normalization) of modes with
/// |xi| > radius; used for support-claim checks and truncation estimates.
double spectral_mass_outside(const HalfSpectrum& s, double radius);
double spectral_mass_total(const HalfSpectrum& s);

/// Memory guard: throws Error(memory_cap) if bytes exceeds the cap.
void check_alloc_budget(std::size_t bytes, const char* what);

} // namespace nsinf
