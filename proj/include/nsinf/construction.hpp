#pragma once

#include <vector>

#include "nsinf/field_rep.hpp"
#include "nsinf/multipliers.hpp"
#include "nsinf/norms.hpp"

namespace nsinf {

/// Parameters of the ill-posedness data family.
struct DataFamilyParams {
  int N = 4;           // dyadic frequency exponent
  double delta = 0.25; // scale-range fraction, 0 < delta <  1
  int d = 2;           // dimension
  double eps0 = 0.1;   // observation-time coefficient, t = eps0 2^{-2N}

  double R() const { return 1.0 / std::log(static_cast<double>(N)); }
  double T_N() const { return eps0 * std::ldexp(1.0, -2 * N); }
  int j_low() const { return -static_cast<int>(std::floor(delta * N)); }
  int atom_count() const { return -j_low() + 1; }
  void validate() const {
    if (N < 2) throw Error(ErrorCode::invalid_argument, "need N >= 2 (R = 1/log N)");
    if (!(delta > 0.0 && delta < 1.0))
      throw Error(ErrorCode::invalid_argument, "need 0 < delta < 1");
    if (!(eps0 > 0.0 && eps0 <= 0.5))
      throw Error(ErrorCode::invalid_argument, "need 0 < eps0 <= 0.5");
    if (d != 2 && d != 3) throw Error(ErrorCode::invalid_argument, "d must be 2 or 3");
  }
};

/// A frame wide enough for the family's bands and observables.
LPFrame family_frame(const DataFamilyParams& params, int profile_order = 7);

/// The data family: atoms j = -floor(delta N)..0 with amplitude
/// R N^{-1/d} 2^{-(d-1)j}, centers 2^{|j|+2N} e1, carrier sin(2^N x1); only
/// velocity component 1 is nonzero (the data is (0, u_{0,N}, 0)).
PatchField build_initial_data(const DataFamilyParams& params, const LPFrame& frame);

struct BesovCheck {
  double value = 0.0; // || u_{0,N} ||_{B^0_{d,1}}
  double ratio = 0.0; // value / (R delta^{1/d})
};
BesovCheck initial_besov_check(const DataFamilyParams& params, const LPFrame& frame);

/// The three Lemma A.1 cross-term sums, computed as written (distinct-scale
/// bump products convolved with phi_j, measured in L^d, A_j-restricted for
/// the third), with the sin^2 carrier split analytically into its mean.
struct CrossTermReport {
  double sum_122102 = 0.0;
  double sum_122104 = 0.0;
  double sum_122103 = 0.0;
  int pair_terms = 0; // number of (j,k) terms evaluated
  // paper envelopes at C = 1: N 2^{-d(1-delta)N}, N^2 2^{-d(1-delta)N},
  // 2^{-d(1-2 delta)N}
  double envelope_102 = 0.0;
  double envelope_104 = 0.0;
  double envelope_103 = 0.0;
};
CrossTermReport cross_term_report(const DataFamilyParams& params, const LPFrame& frame);

/// least-squares slope of log2(sum) vs N over a sweep (zero sums skipped)
struct CrossTermFit {
  double slope_102 = 0.0, slope_104 = 0.0, slope_103 = 0.0;
  double c_102 = 0.0, c_104 = 0.0, c_103 = 0.0; // fitted envelope constants
  int points = 0;
};
CrossTermFit fit_cross_terms(const std::vector<std::pair<int, CrossTermReport>>& sweep,
                             const DataFamilyParams& base);

/// Prop. A.2 quantities at t = T_N for the scalar heat model term
/// M(t) = int_0^t e^{(t-s)Lap} |grad e^{s Lap} u|^2 ds.
struct Theta2LowerReport {
  double F = 0.0;             // diagonal main term, A_j-restricted, sin^2 mean
  double F_osc = 0.0;         // oscillation part (zero: band-disjoint)
  double F_ratio = 0.0;       // F / (eps0 delta R^2 N^{1-2/d})
  double lowfreq = 0.0;       // sum_j 2^{-j} || phi_j * phi_lp * M(T_N) ||_d
  double lowfreq_ratio = 0.0; // lowfreq / (eps0 delta R^2 N^{1-2/d})
  double cross_bound = 0.0;   // bound on dropped inter-cluster pieces
  std::vector<double> per_j_F;
  std::vector<double> per_j_lowfreq;
};
Theta2LowerReport theta2_lower_report(const DataFamilyParams& params, const LPFrame& frame);

/// Per-cluster mean-carrier model field M(T_N) on a local envelope grid
/// (exposed for the dual-path oracle tests).
struct ClusterModelField {
  GridField field;             // M restricted to the cluster box (mean part)
  std::array<double, 3> center_offset{}; // cluster reference point
};
std::vector<ClusterModelField> model_term_cluster_fields(const DataFamilyParams& params,
                                                         const LPFrame& frame, double t);

} // namespace nsinf
