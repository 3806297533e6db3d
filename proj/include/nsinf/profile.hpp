#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "nsinf/common.hpp"

namespace nsinf {

/// Monomial coefficients of the order-m polynomial smoothstep on [0,1]
/// (S(0)=0, S(1)=1, derivatives 1..m vanish at both ends; degree 2m+1).
std::vector<double> smoothstep_coefficients(int m);

/// Polynomial on [a,b] stored in the local variable u = (rho-a)/(b-a);
/// local coordinates keep high-degree evaluation well conditioned.
struct PolyPiece {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> coef; // coef[k] * u^k

  double eval(double rho) const;
  /// d^order/drho^order at rho (chain-rule factor (b-a)^-order)
  double deriv(double rho, int order) const;
};

/// Compactly supported piecewise-polynomial radial symbol, C^m across knots
/// with the first derivative jump at order m+1.
class RadialSymbol {
public:
  /// psi-style cutoff: 1 on [0,r_one], smoothstep transition, 0 beyond r_zero.
  static RadialSymbol cutoff(int m, double r_one, double r_zero);
  /// annulus profile psi(rho) - psi(2 rho): support [1/2, 2].
  static RadialSymbol annulus(int m);

  double eval(double rho) const;
  double support_min() const { return support_min_; }
  double support_max() const { return support_max_; }
  int smoothness() const { return m_; }
  const std::vector<PolyPiece>& pieces() const { return pieces_; }
  /// Knots including support endpoints (jump locations of derivative m+1).
  const std::vector<double>& knots() const { return knots_; }
  /// Derivative jump (right minus left) of order nu at knot index ki.
  double derivative_jump(std::size_t ki, int nu) const;
  /// moments \int W(rho) rho^p drho, exact piecewise integration
  double moment(double p) const;

private:
  int m_ = 0;
  double support_min_ = 0.0;
  double support_max_ = 0.0;
  std::vector<PolyPiece> pieces_; // contiguous, sorted; implicit zero outside
  std::vector<double> knots_;
};

/// Real-space radial kernel G(r) of a radial Fourier symbol W(|xi|) in
/// dimension d, i.e. G = F^{-1}[W(|xi|)] evaluated at |x| = r.
///
/// Evaluation is hybrid: Gauss-Legendre quadrature of the Hankel integral up
/// to r_deep, then a knot-jump asymptotic expansion whose terms start at the
/// symbol's first derivative jump (order m+1), so the tail is computed
/// without the catastrophic cancellation a plain quadrature would suffer.
class RadialKernel {
public:
  RadialKernel(RadialSymbol symbol, int dimension);

  double operator()(double r) const;
  int dimension() const { return d_; }
  const RadialSymbol& symbol() const { return symbol_; }

  double peak() const { return peak_; }             // max over r of |G|
  double value_at_zero() const { return g0_; }
  /// largest r with |G(r)| >= rel * peak (support box for patches)
  double truncation_radius(double rel) const;
  /// smallest r with int_{|x|>r} |G|^p dx <= eps * total (grids for norms)
  double mass_radius(double p, double eps) const;
  /// || G ||_{L^p(R^d)} via dense radial quadrature of the tabulated kernel
  double lp_norm(double p) const;

  /// direct Hankel-integral quadrature (oracle/diagnostic path)
  double eval_quadrature(double r) const;
  /// knot-jump asymptotic expansion (valid for large r)
  double eval_deep(double r) const;
  double deep_switch_radius() const { return r_deep_; }
  /// leading tail envelope |G| ~ tail_coef * r^-tail_exponent
  double tail_exponent() const { return tail_exp_; }
  double tail_coefficient() const { return tail_coef_; }

private:
  void build_table();
  void build_deep_coefficients();
  double table_lookup(double r) const;

  RadialSymbol symbol_;
  int d_;
  double r_deep_ = 0.0;
  double dr_ = 0.0;
  std::vector<double> table_;
  double peak_ = 0.0;
  double g0_ = 0.0;
  double tail_exp_ = 0.0;
  double tail_coef_ = 0.0;
  // deep expansion collapsed per knot into polynomials in 1/r:
  // G(r) = front(r) * sum_knots Re/Im[e^{i r knot} P_knot(1/r)]
  std::vector<std::vector<std::complex<double>>> deep_poly_;
};

/// Shared kernels are expensive to build (quadrature tables); cache per
/// (symbol kind, m, d). Thread-safe not required: tool is single-threaded
/// per experiment point.
const RadialKernel& annulus_kernel(int m, int d);
const RadialKernel& cutoff_kernel(int m, int d, double r_one, double r_zero);

} // namespace nsinf
