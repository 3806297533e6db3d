#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nsinf/grid_field.hpp"
#include "nsinf/lp_frame.hpp"

namespace nsinf {

/// One translated, modulated dyadic bump:
///   amplitude * phi_j(x - center) * sin_or_cos(mod_freq * x_1).
/// Centers are exact integers (2^{|j|+2N} e1); the carrier phase at the
/// center is reduced in extended precision so large N stays exact.
struct BumpAtom {
  int j = 0;                                // scale index, -deltaN <= j <= 0
  std::array<std::int64_t, 3> center{};     // exact integer center
  double amplitude = 0.0;
  std::int64_t mod_freq = 0;                // carrier frequency (2^N), axis 1
  bool sine = true;                         // parity flag: sin vs cos carrier
  int component = 0;                        // velocity component carrying it
  int d = 3;

  double scale() const { return std::ldexp(1.0, -j); } // envelope width 2^{|j|}
  /// carrier phase at the center, (mod_freq * center_1) mod 2pi, exact
  double phase_at_center() const;
  /// carrier factor at local offset u1 = x1 - center_1
  double carrier(double u1) const;
  /// envelope phi_j(x - center) via the radial kernel table
  double envelope(const RadialKernel& k, const double* x) const;
  double eval(const RadialKernel& k, const double* x) const;
};

struct Patch {
  BumpAtom atom;
  std::array<double, 3> lo{}, hi{};  // truncated support box (1e-12 of peak)
  double core_radius = 0.0;          // mass-based radius used by quadratures
};

/// Sum of bump atoms with per-atom support boxes and the overlap map needed
/// for exact cross-term evaluation when truncated boxes intersect.
struct PatchField {
  int d = 0;
  int profile_order = 7;
  std::vector<Patch> patches;
  std::vector<std::pair<int, int>> overlaps;  // pairs of patch indices
  std::vector<std::vector<int>> clusters;     // transitive overlap groups

  const RadialKernel& kernel() const { return annulus_kernel(profile_order, d); }
  double eval(const double* x) const;
  double eval_component(int component, const double* x) const;
  /// hull of all patch boxes
  void bounding_box(std::array<double, 3>& lo, std::array<double, 3>& hi) const;
  /// scale PatchField linearly (amplitudes)
  PatchField scaled(double a) const;
};

/// pre: atoms nonempty. Builds boxes, overlap map and clusters.
PatchField assemble_patchfield(std::vector<BumpAtom> atoms, const LPFrame& frame);

/// Render one atom on the given box. pre: spacing along axis 1 resolves the
/// carrier with >= 4 samples per wavelength and transverse spacings resolve
/// the envelope; errors name the required spacing.
GridField atom_to_grid(const BumpAtom& atom, int d, const std::array<Axis, 3>& axes,
                       const LPFrame& frame);

/// Dense rendering of the full sum (oracle path at tiny N).
/// pre: box covers all truncated patches; memory estimate below the cap.
GridField render_global(const PatchField& field, const std::array<Axis, 3>& axes,
                        const LPFrame& frame, int component = -1);

/// Carrier-safe axes covering all patches of `field` plus `pad` envelope
/// truncation radii of padding; oversample >= 4 samples per carrier
/// wavelength along axis 1 and >= 8 per envelope scale transverse.
std::array<Axis, 3> recommended_global_axes(const PatchField& field, const LPFrame& frame,
                                            double extra_band = 0.0);

} // namespace nsinf
