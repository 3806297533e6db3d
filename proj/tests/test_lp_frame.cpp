#include "doctest.h"

#include <cmath>

#include "nsinf/lp_frame.hpp"
#include "oracle_utils.hpp"

using namespace nsinf;
using namespace nsinf::test;

TEST_CASE("build_lp_frame rejects j_min > j_max") {
  CHECK_THROWS_AS(build_lp_frame(2, 1, 3), Error);
}

TEST_CASE("partition of unity is exact on the covered annulus") {
  LPFrame fr = build_lp_frame(-6, 8, 3);
  CHECK(partition_deviation(fr, 10000, 42) < 1e-12);
  // telescoping example: sum over j = -4..4 at |xi| = 1
  LPFrame fr2 = build_lp_frame(-4, 4, 3);
  CHECK(fr2.partition_sum(1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("band symbol vanishes outside its annulus") {
  LPFrame fr = build_lp_frame(-4, 6, 3);
  // phi_hat_2 at |xi| = 16 is outside 2 <= |xi| <= 8
  CHECK(fr.phi_hat_radial(2, 16.0) == 0.0);
  CHECK(fr.phi_hat_radial(2, 1.99) == 0.0);
  CHECK(fr.phi_hat_radial(2, 4.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("phi_0 L3 norm against the dense-quadrature oracle") {
  // DERIVED oracle: radial trapezoid at three refinements, Richardson
  LPFrame fr = build_lp_frame(-2, 2, 3);
  double oracle = phi0_lp_oracle(fr.kernel(), 3.0, 40.0, 4000);
  double lib = fr.kernel().lp_norm(3.0);
  CHECK(lib == doctest::Approx(oracle).epsilon(2e-6));
  // frozen value for the default profile (order 7, d = 3), from the oracle
  CHECK(oracle == doctest::Approx(0.09770480).epsilon(5e-6));
}

TEST_CASE("dilation covariance phi_{j+1}(x) = 2^d phi_j(2x)") {
  LPFrame fr = build_lp_frame(-3, 3, 2);
  const RadialKernel& k = fr.kernel();
  for (double r : {0.3, 1.0, 2.7, 9.4}) {
    for (int j : {-1, 0, 1}) {
      double phij_2x = std::ldexp(k(std::ldexp(2.0 * r, j)), 2 * j);       // phi_j(2x)
      double phij1_x = std::ldexp(k(std::ldexp(r, j + 1)), 2 * (j + 1));   // phi_{j+1}(x)
      CHECK(phij1_x == doctest::Approx(4.0 * phij_2x).epsilon(1e-12));
    }
  }
}

TEST_CASE("lp_project: adjacent-band reproduction and linearity") {
  int d = 2;
  auto axes = cubic_axes(d, -16.0, 32.0, 128);
  LPFrame fr = build_lp_frame(-3, 4, d);
  GridField f = random_band_limited(d, axes, 1.1, 3.9, 7); // inside band j=1 union j=2
  int j = 1;
  GridField sum(d, axes);
  for (int jp = j - 1; jp <= j + 2; ++jp) sum += lp_project(f, jp, fr);
  CHECK(max_abs_diff(sum, f) < 1e-10 * max_abs(f));

  // zero field stays zero
  GridField z(d, axes);
  GridField pz = lp_project(z, 0, fr);
  CHECK(max_abs(pz) == 0.0);

  // linearity
  GridField g = random_band_limited(d, axes, 1.1, 3.9, 8);
  GridField fg = f;
  fg += g;
  GridField lhs = lp_project(fg, 2, fr);
  GridField rhs = lp_project(f, 2, fr);
  rhs += lp_project(g, 2, fr);
  CHECK(max_abs_diff(lhs, rhs) < 1e-12 * std::max(1.0, max_abs(lhs)));

  // idempotent-up-to-overlap: disjoint bands annihilate
  GridField p1 = lp_project(f, 1, fr);
  GridField p3 = lp_project(p1, 3, fr);
  CHECK(max_abs(p3) < 1e-12 * max_abs(f));

  // band outside range
  CHECK_THROWS_AS(lp_project(f, 9, fr), Error);
}

TEST_CASE("cube partition sums to one and projections reproduce the field") {
  int d = 2;
  CubePartition part = CubePartition::covering(d, {5.0, 5.0, 0.0});
  CHECK(cube_partition_deviation(part, 4000, 3) < 1e-12);

  auto axes = cubic_axes(d, 0.0, 8.0 * kPi, 64);
  GridField f = random_band_limited(d, axes, 0.0, 3.0, 11);
  GridField sum(d, axes);
  std::int64_t nonzero = 0;
  for (std::int64_t k0 = part.k_lo()[0]; k0 <= part.k_hi()[0]; ++k0)
    for (std::int64_t k1 = part.k_lo()[1]; k1 <= part.k_hi()[1]; ++k1) {
      ComplexGridField piece = cube_project(f, {k0, k1, 0}, part);
      sum += piece.re;
      if (max_abs(piece.re) > 1e-12 * max_abs(f)) ++nonzero;
    }
  CHECK(max_abs_diff(sum, f) < 1e-10 * max_abs(f));
  CHECK(nonzero > 0);

  CHECK_THROWS_AS(cube_project(f, {999, 0, 0}, part), Error);
}

TEST_CASE("cube projections vanish away from the spectral support") {
  int d = 2;
  auto axes = cubic_axes(d, 0.0, 8.0 * kPi, 64);
  // field with spectrum inside the cube at k0 = (2,2): |xi - (3,3)|_inf < 1
  GridField f(d, axes);
  HalfSpectrum s = fft(f);
  apply_multiplier_inplace(s, [](const double*) { return cplx(0.0); });
  // place one mode at xi = (3.0, 3.0): k = xi * L / (2 pi) = 12
  std::int64_t n0h = s.n0h();
  s.modes[static_cast<std::size_t>(12 + n0h * 12)] = cplx(1.0, 0.5);
  f = ifft(s);
  CubePartition part = CubePartition::covering(d, {6.0, 6.0, 0.0});
  ComplexGridField far = cube_project(f, {6, 2, 0}, part); // max-norm distance 4 from (2,2)
  CHECK(max_abs(far.re) + max_abs(far.im) < 1e-13 * max_abs(f));
}
