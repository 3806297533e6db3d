#include "doctest.h"

#include <cmath>

#include "nsinf/profile.hpp"
#include "oracle_utils.hpp"

using namespace nsinf;

TEST_CASE("smoothstep endpoint flatness and symmetry") {
  auto c = smoothstep_coefficients(7);
  PolyPiece p{0.0, 1.0, c};
  CHECK(p.eval(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p.eval(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (int nu = 1; nu <= 7; ++nu) {
    CHECK(std::abs(p.deriv(0.0, nu)) < 1e-9);
    CHECK(std::abs(p.deriv(1.0, nu)) < 1e-6); // alternating-sum roundoff only
  }
  for (double t : {0.1, 0.3, 0.5, 0.9})
    CHECK(p.eval(t) + p.eval(1.0 - t) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("annulus symbol support and values") {
  RadialSymbol phi0 = RadialSymbol::annulus(7);
  CHECK(phi0.eval(0.4) == 0.0);
  CHECK(phi0.eval(2.1) == 0.0);
  CHECK(phi0.eval(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi0.eval(0.75) > 0.0);
  CHECK(phi0.eval(1.5) > 0.0);
}

TEST_CASE("radial kernel: deep expansion agrees with quadrature in the overlap window") {
  const RadialKernel& k3 = annulus_kernel(7, 3);
  for (double r : {28.0, 34.0, 39.0}) {
    double q = k3.eval_quadrature(r), dp = k3.eval_deep(r);
    CHECK(std::abs(q - dp) <= 1e-8 * std::abs(q) + 1e-18);
  }
  const RadialKernel& k2 = annulus_kernel(7, 2);
  for (double r : {100.0, 120.0, 139.0}) {
    double q = k2.eval_quadrature(r), dp = k2.eval_deep(r);
    CHECK(std::abs(q - dp) <= 2e-3 * std::abs(q) + 1e-16 * k2.peak());
  }
}

TEST_CASE("radial kernel: Plancherel ties real-space L2 to the symbol") {
  for (int d : {2, 3}) {
    const RadialKernel& k = annulus_kernel(7, d);
    RadialSymbol w = RadialSymbol::annulus(7);
    int n = 40000;
    double a = 0.5, b = 2.0, h = (b - a) / n;
    double sym2 = 0.0;
    for (int i = 0; i <= n; ++i) {
      double rho = a + i * h;
      double wt = (i == 0 || i == n) ? 0.5 : 1.0;
      sym2 += wt * w.eval(rho) * w.eval(rho) * std::pow(rho, d - 1.0);
    }
    sym2 *= h * ((d == 3) ? 4.0 * kPi : 2.0 * kPi);
    double expect = std::sqrt(sym2 / std::pow(kTwoPi, d));
    CHECK(k.lp_norm(2.0) == doctest::Approx(expect).epsilon(2e-6));
  }
}

TEST_CASE("integer phase reduction: periodicity sanity") {
  for (std::int64_t n : {12345, 99999}) {
    CHECK(std::sin(static_cast<double>(n)) ==
          doctest::Approx(std::sin(reduce_integer_mod_2pi(n))).epsilon(1e-12));
  }
}
