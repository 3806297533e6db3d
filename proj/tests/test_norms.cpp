#include "doctest.h"

#include <cmath>

#include "nsinf/construction.hpp"
#include "nsinf/norms.hpp"
#include "oracle_utils.hpp"

using namespace nsinf;
using namespace nsinf::test;

TEST_CASE("lp_norm: zero, homogeneity, dyadic ratio of phi_j norms") {
  int d = 2;
  auto axes = cubic_axes(d, -8.0, 16.0, 64);
  GridField z(d, axes);
  CHECK(lp_norm(z, 3.0) == 0.0);

  GridField f = random_band_limited(d, axes, 0.6, 3.0, 5);
  GridField f2 = f;
  f2 *= -2.5;
  CHECK(lp_norm(f2, 3.0) == doctest::Approx(2.5 * lp_norm(f, 3.0)).epsilon(1e-13));

  // || phi_j ||_p = 2^{j d (1-1/p)} || phi_0 ||_p
  LPFrame fr = build_lp_frame(-4, 4, d);
  double p = 3.0;
  auto grid_norm_of_scale = [&](int j) {
    BumpAtom a;
    a.j = j;
    a.d = d;
    a.center = {0, 0, 0};
    a.amplitude = 1.0;
    a.mod_freq = 0;
    a.sine = false;
    double L = 140.0;
    auto ax = cubic_axes(d, -L / 2, L, 1024);
    GridField g = atom_to_grid(a, d, ax, fr);
    return lp_norm(g, p);
  };
  double n0 = grid_norm_of_scale(0);
  double n1 = grid_norm_of_scale(1);
  double expect_ratio = std::pow(2.0, d * (1.0 - 1.0 / p));
  CHECK(n1 / n0 == doctest::Approx(expect_ratio).epsilon(1e-8));
}

TEST_CASE("besov_norm on grids: frame bounds and dyadic dilation covariance") {
  int d = 2;
  LPFrame fr = build_lp_frame(-6, 6, d);

  auto axes = cubic_axes(d, 0.0, 16.0, 128);
  GridField f = random_band_limited(d, axes, 2.1, 3.9, 13);
  NormReport rep = besov_norm(f, 0.0, 2.0, 1.0, -2, 5, fr);
  double maxband = 0.0;
  for (auto& [k, v] : rep.per_band) maxband = std::max(maxband, v);
  CHECK(rep.total <= 3.0 * maxband + 1e-12);
  CHECK(rep.total >= maxband);
  CHECK(rep.total == doctest::Approx(rep.aggregate()).epsilon(1e-12));

  // dilation: g(x) = f(2x) via the same spectrum on the halved box
  double s = 0.7, p = 2.0, q = 1.0;
  HalfSpectrum spec = fft(f);
  std::array<Axis, 3> axes2{};
  for (int a = 0; a < d; ++a) {
    axes2[a] = axes[a];
    axes2[a].length = axes[a].length / 2.0;
  }
  HalfSpectrum spec2 = spec;
  for (int a = 0; a < d; ++a) spec2.axes[a] = axes2[a];
  GridField g = ifft(spec2);
  NormReport rf = besov_norm(f, s, p, q, -2, 5, fr);
  NormReport rg = besov_norm(g, s, p, q, -1, 6, fr);
  double expect = std::pow(2.0, s - static_cast<double>(d) / p) * rf.total;
  CHECK(rg.total == doctest::Approx(expect).epsilon(1e-10));

  // argmax stability under positive scaling
  GridField fs = f;
  fs *= 3.7;
  NormReport rs = besov_norm(fs, 0.0, 2.0, 1.0, -2, 5, fr);
  std::size_t arg1 = 0, arg2 = 0;
  for (std::size_t i = 1; i < rep.per_band.size(); ++i) {
    if (rep.per_band[i].second > rep.per_band[arg1].second) arg1 = i;
    if (rs.per_band[i].second > rs.per_band[arg2].second) arg2 = i;
  }
  CHECK(arg1 == arg2);
  for (std::size_t i = 0; i < rep.per_band.size(); ++i)
    CHECK(rs.per_band[i].second == doctest::Approx(3.7 * rep.per_band[i].second).epsilon(1e-12));
}

TEST_CASE("modulation norm: zero field, integer-shift covariance, DC normalization") {
  int d = 2;
  auto axes = cubic_axes(d, 0.0, 8.0 * kPi, 64);
  CubePartition part = CubePartition::covering(d, {8.0, 8.0, 0.0});

  GridField z(d, axes);
  CHECK(modulation_norm_value(z, part) == 0.0);

  GridField f = random_band_limited(d, axes, 0.4, 2.5, 21);
  FullSpectrum s = fft_full(f);
  NormReport r0 = modulation_norm_spectrum(s, part);

  std::array<std::int64_t, 3> k0{3, 2, 0};
  FullSpectrum shifted = s;
  for (auto& m : shifted.modes) m = 0.0;
  std::int64_t n0 = s.axes[0].n, n1 = s.axes[1].n;
  std::int64_t s0 = std::llround(k0[0] * s.axes[0].length / kTwoPi);
  std::int64_t s1 = std::llround(k0[1] * s.axes[1].length / kTwoPi);
  for (std::int64_t i1 = 0; i1 < n1; ++i1)
    for (std::int64_t i0 = 0; i0 < n0; ++i0) {
      std::int64_t j0 = (i0 + s0) % n0, j1 = (i1 + s1) % n1;
      shifted.modes[static_cast<std::size_t>(j0 + n0 * j1)] =
          s.modes[static_cast<std::size_t>(i0 + n0 * i1)];
    }
  NormReport r1 = modulation_norm_spectrum(shifted, part);
  CHECK(r1.total == doctest::Approx(r0.total).epsilon(1e-9));

  GridField one(d, axes);
  one.fill(1.0);
  double vol = 1.0;
  for (int a = 0; a < d; ++a) vol *= axes[a].length;
  double ratio = bilinear_constant_probe(f, one, part);
  CHECK(ratio == doctest::Approx(1.0 / std::cbrt(vol)).epsilon(1e-6));
}

TEST_CASE("norm triangle inequality on random pairs (all three kinds)") {
  int d = 2;
  auto axes = cubic_axes(d, 0.0, 8.0 * kPi, 64);
  LPFrame fr = build_lp_frame(-4, 4, d);
  CubePartition part = CubePartition::covering(d, {8.0, 8.0, 0.0});
  for (int it = 0; it < 3; ++it) {
    GridField f = random_band_limited(d, axes, 0.4, 3.0, 100 + it);
    GridField g = random_band_limited(d, axes, 0.4, 3.0, 200 + it);
    GridField fg = f;
    fg += g;
    CHECK(lp_norm(fg, 3.0) <= lp_norm(f, 3.0) + lp_norm(g, 3.0) + 1e-10);
    double bf = besov_norm(f, 0.5, 2.0, 1.0, -2, 3, fr).total;
    double bg = besov_norm(g, 0.5, 2.0, 1.0, -2, 3, fr).total;
    double bfg = besov_norm(fg, 0.5, 2.0, 1.0, -2, 3, fr).total;
    CHECK(bfg <= bf + bg + 1e-10);
    double mf = modulation_norm_value(f, part);
    double mg = modulation_norm_value(g, part);
    double mfg = modulation_norm_value(fg, part);
    CHECK(mfg <= mf + mg + 1e-10);
  }
}

TEST_CASE("embedding probe: modulation norm controls L3 stably under refinement") {
  int d = 2;
  CubePartition part = CubePartition::covering(d, {6.0, 6.0, 0.0});
  auto ratio_at = [&](std::int64_t n) {
    auto axes = cubic_axes(d, 0.0, 8.0 * kPi, n);
    GridField f = random_band_limited(d, axes, 0.4, 2.0, 303);
    return modulation_norm_value(f, part) / lp_norm(f, 3.0);
  };
  double r1 = ratio_at(64), r2 = ratio_at(128);
  CHECK(r1 > 1.0 - 1e-9);
  CHECK(std::abs(r1 - r2) / r1 < 0.1);
}

TEST_CASE("patchwork norms match the dense-grid oracle at tiny N (criterion-4 shape)") {
  DataFamilyParams params;
  params.N = 2;
  params.delta = 0.5;
  params.d = 2;
  LPFrame fr = family_frame(params);
  PatchField u0 = build_initial_data(params, fr);

  auto gaxes = recommended_global_axes(u0, fr);
  GridField g = render_global(u0, gaxes, fr);

  double lp_patch = lp_norm(u0, 2.0, fr);
  double lp_grid = lp_norm(g, 2.0);
  CHECK(lp_patch == doctest::Approx(lp_grid).epsilon(1e-6));

  NormReport bp = besov_norm(u0, 0.0, 2.0, 1.0, params.N - 2, params.N + 2, fr);
  NormReport bg = besov_norm(g, 0.0, 2.0, 1.0, params.N - 2, params.N + 2, fr);
  CHECK(bp.total == doctest::Approx(bg.total).epsilon(1e-6));

  NormReport mp = modulation_norm(u0, fr);
  std::array<double, 3> ximax{};
  for (int a = 0; a < params.d; ++a) ximax[a] = kPi / gaxes[a].h();
  CubePartition part = CubePartition::covering(params.d, ximax);
  NormReport mg = modulation_norm(g, part);
  CHECK(mp.total == doctest::Approx(mg.total).epsilon(1e-6));
}

TEST_CASE("patchwork fast path: isolated atoms, carrier average vs dense render") {
  DataFamilyParams params;
  params.N = 5;
  params.delta = 0.25;
  params.d = 2;
  LPFrame fr = family_frame(params);
  PatchField u0 = build_initial_data(params, fr);
  REQUIRE(u0.clusters.size() == 2);

  auto gaxes = recommended_global_axes(u0, fr);
  GridField g = render_global(u0, gaxes, fr);
  CHECK(lp_norm(u0, 2.0, fr) == doctest::Approx(lp_norm(g, 2.0)).epsilon(1e-7));

  NormReport bp = besov_norm(u0, 0.0, 2.0, 1.0, params.N - 2, params.N + 2, fr);
  NormReport bg = besov_norm(g, 0.0, 2.0, 1.0, params.N - 2, params.N + 2, fr);
  CHECK(bp.total == doctest::Approx(bg.total).epsilon(1e-6));
}

TEST_CASE("modulation norm of the data concentrates near the carrier cubes") {
  DataFamilyParams params;
  params.N = 4;
  params.delta = 0.5;
  params.d = 2;
  LPFrame fr = family_frame(params);
  PatchField u0 = build_initial_data(params, fr);
  NormReport rep = modulation_norm(u0, fr);
  REQUIRE(rep.total > 0.0);
  double q = std::ldexp(1.0, params.N);
  double near = 0.0;
  for (const auto& [key, v] : rep.per_band) {
    long k0 = 0, k1 = 0;
    std::sscanf(key.c_str(), "k=(%ld,%ld", &k0, &k1);
    if (std::abs(std::abs(static_cast<double>(k0) + 1.0) - q) <= 4.0) near += v;
  }
  CHECK(near / rep.total > 0.999);
}

TEST_CASE("maximal regularity probe: plateau, shape, zero field") {
  int d = 2;
  auto axes = cubic_axes(d, 0.0, 16.0 * kPi, 256);
  CubePartition part = CubePartition::covering(d, {5.0, 5.0, 0.0});
  PhysicalParams pp;
  QuadratureSpec quad;

  VectorGridField f;
  for (int c = 0; c < d; ++c)
    f.comp.push_back(random_band_limited(d, axes, 1.0, 2.2, 400 + c));
  std::vector<double> T_list = {0.1, 0.3, 1.0, 3.0, 10.0, 30.0};
  MaxRegCurve curve = maximal_regularity_probe(f, T_list, pp, quad, part);
  std::size_t n = curve.value.size();
  CHECK((curve.value[n - 1] - curve.value[n - 2]) / curve.value[n - 1] < 0.01);
  for (std::size_t i = 1; i < n; ++i) CHECK(curve.value[i] >= curve.value[i - 1] - 1e-12);

  VectorGridField fm;
  for (int c = 0; c < d; ++c)
    fm.comp.push_back(random_band_limited(d, axes, 0.12, 4.0, 500 + c));
  MaxRegCurve cm = maximal_regularity_probe(fm, T_list, pp, quad, part);
  for (std::size_t i = 1; i < cm.value.size(); ++i)
    CHECK(cm.value[i] >= cm.value[i - 1] - 1e-12);
  auto lg = [](double T) { return std::log(std::exp(1.0) + T); };
  for (std::size_t i = 2; i < cm.value.size(); ++i) {
    double s1 = (cm.value[i] - cm.value[i - 1]) / (lg(cm.T[i]) - lg(cm.T[i - 1]));
    double s0 = (cm.value[i - 1] - cm.value[i - 2]) / (lg(cm.T[i - 1]) - lg(cm.T[i - 2]));
    CHECK(s1 <= s0 * 1.05 + 1e-9);
  }
  CHECK(cm.fit_a > 0.0);

  VectorGridField z = VectorGridField::zeros(d, GridField(d, axes));
  MaxRegCurve cz = maximal_regularity_probe(z, T_list, pp, quad, part);
  for (double v : cz.value) CHECK(v == 0.0);
}

TEST_CASE("ball quadrature utility: constant field over a ball") {
  int d = 2;
  auto axes = cubic_axes(d, -8.0, 16.0, 64);
  GridField one(d, axes);
  one.fill(2.0);
  HalfSpectrum s = fft(one);
  double R = 1.7;
  double v = ball_lp_from_spectrum(s, {0.5, -0.3, 0.0}, R, 2.0);
  double expect = 2.0 * std::sqrt(kPi * R * R);
  CHECK(v == doctest::Approx(expect).epsilon(1e-10));
}
