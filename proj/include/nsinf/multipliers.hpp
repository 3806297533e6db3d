#pragma once

#include <functional>

#include "nsinf/grid_field.hpp"

namespace nsinf {

struct PhysicalParams {
  double mu = 1.0;
  double lambda = 0.0;
  double kappa = 1.0;
  void validate() const {
    if (!(mu > 0.0) || !(2.0 * mu + lambda > 0.0) || !(kappa > 0.0))
      throw Error(ErrorCode::invalid_argument,
                  "need mu > 0, 2*mu + lambda > 0, kappa > 0");
  }
};

struct QuadratureSpec {
  int nodes = 12;          // Gauss-Legendre nodes per panel
  int max_doublings = 8;   // panel-doubling limit
  double rel_tol = 1e-8;   // relative L2 convergence tolerance
  void validate() const {
    if (nodes < 2 || !(rel_tol > 0.0))
      throw Error(ErrorCode::invalid_argument, "quadrature: nodes >= 2 and rel_tol > 0");
  }
};

enum class PropagatorKind { identity, heat, lame };

// -- semigroups --------------------------------------------------------------

/// exp(kappa t Laplace); t = 0 returns the input bit-identically.
GridField apply_heat(const GridField& f, double t, const PhysicalParams& p);

/// Lame semigroup exp(tL), L = mu Laplace + (lambda+mu) grad div; splits each
/// mode into its xi-parallel part (diffusivity 2mu+lambda) and xi-orthogonal
/// part (diffusivity mu); the zero mode is unchanged.
VectorGridField apply_lame(const VectorGridField& u, double t, const PhysicalParams& p);

/// generators: kappa*Laplace f  and  L u (spectrally exact)
GridField apply_heat_generator(const GridField& f, const PhysicalParams& p);
VectorGridField apply_lame_generator(const VectorGridField& u, const PhysicalParams& p);

/// spectral partial derivative d/dx_a
GridField partial_derivative(const GridField& f, int a);

// -- Duhamel quadrature -------------------------------------------------------

struct DuhamelResult {
  GridField value;
  double err_estimate = 0.0;
  int panels = 0;
};

struct DuhamelVecResult {
  VectorGridField value;
  double err_estimate = 0.0;
  int panels = 0;
};

/// int_0^t e^{(t-s)A} source(s) ds by panel-doubled Gauss-Legendre; errors
/// with the last two iterates' distance if rel_tol is not reached.
DuhamelResult duhamel(const std::function<GridField(double)>& source, double t,
                      PropagatorKind kind, const PhysicalParams& p, const QuadratureSpec& quad);
DuhamelVecResult duhamel_vec(const std::function<VectorGridField(double)>& source, double t,
                             PropagatorKind kind, const PhysicalParams& p,
                             const QuadratureSpec& quad);

// -- Theta_2 ------------------------------------------------------------------

/// Bilinear heat-interaction symbol i(xi-eta).i eta * (1-e^{-tz})/z with
/// z = |xi-eta|^2 + |eta|^2 - |xi|^2; the removable singularity is handled by
/// a series branch for |tz| < 1e-4. Total function for t >= 0.
double theta2_symbol(const double* xi, const double* eta, double t, int d);

/// D~(u):D~(v) = 2 mu tr(Du Dv^T) + lambda (div u)(div v), pointwise.
GridField dtilde_form(const VectorGridField& u, const VectorGridField& v,
                      const PhysicalParams& p);

/// Theta_2(t) = int_0^t e^{(t-s) kappa Laplace} D~(U1):D~(U1) ds with
/// U1(s) = u1_at(s).
DuhamelResult theta2_direct(const std::function<VectorGridField(double)>& u1_at, double t,
                            const PhysicalParams& p, const QuadratureSpec& quad);

/// Scalar model term M(t) = int_0^t e^{(t-s)Laplace} |grad e^{s Laplace} w|^2 ds
/// (unit diffusivity in both slots), three independent evaluation paths:
GridField model_term_quadrature(const GridField& w, double t, const QuadratureSpec& quad);
/// closed form M(t) = (e^{t Laplace}(w^2) - (e^{t Laplace} w)^2) / 2
GridField model_term_closed_form(const GridField& w, double t);
/// frequency path via theta2_symbol, restricted to output modes |xi| <= xi_cut
GridField model_term_symbol_path(const GridField& w, double t, double xi_cut);

} // namespace nsinf
