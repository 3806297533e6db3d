#pragma once

#include <string>
#include <vector>

#include "nsinf/field_rep.hpp"
#include "nsinf/grid_field.hpp"
#include "nsinf/lp_frame.hpp"
#include "nsinf/multipliers.hpp"

namespace nsinf {

/// Per-band norm breakdown. For Besov reports per_band holds the weighted
/// contributions 2^{sj} ||phi_j * f||_p keyed by band index; for modulation
/// reports it holds per-cube L3 norms keyed by the cube lattice point.
struct NormReport {
  std::string kind;
  double total = 0.0;
  double q = 1.0; // aggregation exponent used by total
  std::vector<std::pair<std::string, double>> per_band;
  double truncation_estimate = 0.0;
  bool truncation_warning = false;

  /// recompute total from per_band (the invariant check)
  double aggregate() const;
  std::string to_json() const;
};

// -- dense-grid paths ---------------------------------------------------------

/// L^p grid quadrature; p = infinity uses the grid maximum.
double lp_norm(const GridField& f, double p);
double lp_norm(const ComplexGridField& f, double p);
double lp_norm(const VectorGridField& u, double p);

NormReport besov_norm(const GridField& f, double s, double p, double q, int band_lo, int band_hi,
                      const LPFrame& frame);

NormReport modulation_norm(const GridField& f, const CubePartition& part);
double modulation_norm_value(const GridField& f, const CubePartition& part);
/// vector fields: per-cube L3 of the pointwise Euclidean modulus
double modulation_norm_value(const VectorGridField& u, const CubePartition& part);
/// spectrum-level entry point (integer-shift covariance tests, picard reuse)
NormReport modulation_norm_spectrum(const FullSpectrum& s, const CubePartition& part);

// -- patchwork fast paths -----------------------------------------------------

/// L^p of the modulated bump sum: isolated patches integrate the envelope
/// radially with the carrier period-averaged analytically; overlapping
/// clusters fall back to an exact resolved-grid quadrature.
double lp_norm(const PatchField& f, double p, const LPFrame& frame);

NormReport besov_norm(const PatchField& f, double s, double p, double q, int band_lo,
                      int band_hi, const LPFrame& frame);

NormReport modulation_norm(const PatchField& f, const LPFrame& frame);

/// mean of |sin|^p over a period (the carrier average)
double carrier_mean_abs_pow(double p);

/// || f ||_{L^p(ball)} for a band-limited real field given by its spectrum:
/// exact trigonometric evaluation on a polar Gauss-Legendre rule, so hard
/// ball restrictions do not suffer grid-indicator error. `center` is in the
/// field's own coordinates.
double ball_lp_from_spectrum(const HalfSpectrum& s, const std::array<double, 3>& center,
                             double radius, double p);

// -- measured-constant probes -------------------------------------------------

/// ||fg||_M / (||f||_M ||g||_M); fields must be band-limited so the pointwise
/// product is alias-free on their grid. errors: zero denominator.
double bilinear_constant_probe(const GridField& f, const GridField& g, const CubePartition& part);

struct MaxRegCurve {
  std::vector<double> T;
  std::vector<double> value; // ||L e^{.L} f||_{L1(0,T;M)} / ||f||_M
  double fit_a = 0.0;        // least-squares a * sqrt(log(e+T))
  double fit_residual = 0.0; // relative RMS residual of the fit
};

MaxRegCurve maximal_regularity_probe(const VectorGridField& f, const std::vector<double>& T_list,
                                     const PhysicalParams& p, const QuadratureSpec& quad,
                                     const CubePartition& part);

} // namespace nsinf
