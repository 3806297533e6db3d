#include "nsinf/profile.hpp"

#include <algorithm>
#include <cassert>
#include <complex>
#include <cstdlib>
#include <map>
#include <mutex>

namespace nsinf {

// ---------------------------------------------------------------------------
// common.hpp bits
// ---------------------------------------------------------------------------

namespace {
std::size_t g_memory_cap = 0;
}

std::size_t memory_cap_bytes() {
  if (g_memory_cap != 0) return g_memory_cap;
  if (const char* env = std::getenv("NSINF_MEMORY_CAP_MB")) {
    long mb = std::atol(env);
    if (mb > 0) return static_cast<std::size_t>(mb) * (1 << 20);
  }
  return std::size_t(3500) * (1 << 20);
}

void set_memory_cap_bytes(std::size_t bytes) { g_memory_cap = bytes; }

double reduce_integer_mod_2pi(std::int64_t n) {
  // two_prod-based Cody-Waite with a three-limb 2*pi
  static const double p_hi = 6.283185307179586232;      // 2*pi head
  static const double p_mid = 2.449293598294706414e-16; // next bits
  static const double p_lo = -5.989539619436679332e-33;
  double nd = static_cast<double>(n);
  double q = std::floor(nd / p_hi);
  // r = n - q*(p_hi + p_mid + p_lo) accumulated in double-double
  DoubleDouble t1 = two_prod(q, p_hi);
  DoubleDouble s = two_sum(nd, -t1.hi);
  double r_lo = s.lo - t1.lo;
  DoubleDouble t2 = two_prod(q, p_mid);
  DoubleDouble s2 = two_sum(s.hi, -t2.hi);
  r_lo += s2.lo - t2.lo - q * p_lo;
  double r = s2.hi + r_lo;
  while (r < 0) r += kTwoPi;
  while (r >= kTwoPi) r -= kTwoPi;
  return r;
}

// ---------------------------------------------------------------------------
// smoothstep
// ---------------------------------------------------------------------------

namespace {

double binom(int n, int k) {
  long double v = 1.0L;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return static_cast<double>(v);
}

// Gauss-Legendre nodes/weights on [-1,1], cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gl_rule(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration from Chebyshev initial guess
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

} // namespace

std::vector<double> smoothstep_coefficients(int m) {
  if (m < 0 || m > 15) throw Error(ErrorCode::invalid_argument, "smoothstep order out of range");
  std::vector<double> c(2 * m + 2, 0.0);
  for (int k = 0; k <= m; ++k) {
    double v = binom(m + k, k) * binom(2 * m + 1, m - k);
    c[m + 1 + k] = (k % 2 == 0) ? v : -v;
  }
  return c;
}

// ---------------------------------------------------------------------------
// PolyPiece / RadialSymbol
// ---------------------------------------------------------------------------

double PolyPiece::eval(double rho) const {
  double u = (rho - a) / (b - a);
  double v = 0.0;
  for (std::size_t k = coef.size(); k-- > 0;) v = v * u + coef[k];
  return v;
}

double PolyPiece::deriv(double rho, int order) const {
  double u = (rho - a) / (b - a);
  double v = 0.0;
  int n = static_cast<int>(coef.size()) - 1;
  for (int k = n; k >= order; --k) {
    double f = coef[k];
    for (int j = 0; j < order; ++j) f *= (k - j);
    v = v * u + f;
  }
  return v * std::pow(b - a, -order);
}

RadialSymbol RadialSymbol::cutoff(int m, double r_one, double r_zero) {
  if (!(r_one > 0 && r_zero > r_one))
    throw Error(ErrorCode::invalid_argument, "cutoff radii must satisfy 0 < r_one < r_zero");
  RadialSymbol s;
  s.m_ = m;
  auto sc = smoothstep_coefficients(m);
  PolyPiece flat{0.0, r_one, {1.0}};
  PolyPiece trans{r_one, r_zero, {}};
  // 1 - S(u)
  trans.coef.assign(sc.size(), 0.0);
  for (std::size_t k = 0; k < sc.size(); ++k) trans.coef[k] = -sc[k];
  trans.coef[0] += 1.0;
  s.pieces_ = {flat, trans};
  s.support_min_ = 0.0;
  s.support_max_ = r_zero;
  s.knots_ = {r_one, r_zero};
  return s;
}

RadialSymbol RadialSymbol::annulus(int m) {
  RadialSymbol s;
  s.m_ = m;
  auto sc = smoothstep_coefficients(m);
  // psi(r) - psi(2r) with psi = cutoff(m, 1, 2):
  //   [1/2, 1]: S(2r-1)    (rising edge, from 1 - psi(2r))
  //   [1, 2]:   1 - S(r-1) (falling edge of psi)
  PolyPiece rise{0.5, 1.0, sc};
  PolyPiece fall{1.0, 2.0, {}};
  fall.coef.assign(sc.size(), 0.0);
  for (std::size_t k = 0; k < sc.size(); ++k) fall.coef[k] = -sc[k];
  fall.coef[0] += 1.0;
  s.pieces_ = {rise, fall};
  s.support_min_ = 0.5;
  s.support_max_ = 2.0;
  s.knots_ = {0.5, 1.0, 2.0};
  return s;
}

double RadialSymbol::eval(double rho) const {
  if (rho < 0) rho = -rho;
  for (const auto& p : pieces_)
    if (rho >= p.a && rho <= p.b) return p.eval(rho);
  return 0.0;
}

double RadialSymbol::derivative_jump(std::size_t ki, int nu) const {
  if (nu <= m_) return 0.0; // C^m continuity, exact by construction
  double knot = knots_[ki];
  double right = 0.0, left = 0.0;
  for (const auto& p : pieces_) {
    if (std::abs(p.a - knot) < 1e-14) right = p.deriv(knot, nu);
    if (std::abs(p.b - knot) < 1e-14) left = p.deriv(knot, nu);
  }
  return right - left;
}

double RadialSymbol::moment(double p) const {
  double total = 0.0;
  const auto& rule = gl_rule(24);
  for (const auto& piece : pieces_) {
    double c = 0.5 * (piece.a + piece.b), h = 0.5 * (piece.b - piece.a);
    for (std::size_t i = 0; i < rule.first.size(); ++i) {
      double rho = c + h * rule.first[i];
      total += h * rule.second[i] * piece.eval(rho) * std::pow(rho, p);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// RadialKernel
// ---------------------------------------------------------------------------

namespace {

// Hankel asymptotic coefficients for J0: a_k = a_{k-1} * (-(2k-1)^2) / (8k)
std::vector<double> j0_asym_coeffs(int kmax) {
  std::vector<double> a(kmax + 1);
  a[0] = 1.0;
  for (int k = 1; k <= kmax; ++k) a[k] = a[k - 1] * (-(2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k);
  return a;
}

double falling_power(double e, int q) {
  double v = 1.0;
  for (int i = 0; i < q; ++i) v *= (e - i);
  return v;
}

// J0 via its Hankel asymptotic series; 1e-15 accurate for z >= 25, which is
// the only regime the kernel table build hits at large radii
double j0_asymptotic(double z) {
  static const std::vector<double> a = j0_asym_coeffs(12);
  double p = 0.0, q = 0.0;
  double zk = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double term = a[k] * zk;
    if (k % 2 == 0)
      p += (k % 4 == 0) ? term : -term;
    else
      q += ((k - 1) % 4 == 0) ? term : -term;
    zk /= z;
    if (std::abs(term) < 1e-18) break;
  }
  double w = z - kPi / 4.0;
  return std::sqrt(2.0 / (kPi * z)) * (p * std::cos(w) - q * std::sin(w));
}

double bessel_j0(double z) {
  return (z >= 25.0) ? j0_asymptotic(z) : std::cyl_bessel_j(0.0, z);
}

} // namespace

RadialKernel::RadialKernel(RadialSymbol symbol, int dimension)
    : symbol_(std::move(symbol)), d_(dimension) {
  if (d_ != 2 && d_ != 3) throw Error(ErrorCode::invalid_argument, "dimension must be 2 or 3");
  // The knot-jump expansion is asymptotic: its terms grow with derivative
  // order until ~m-th order factorial factors lose to r^nu, so the switch
  // radius must sit beyond that growth scale.
  if (d_ == 3) {
    r_deep_ = 40.0;
  } else {
    double rho_min = std::max(symbol_.support_min(), 0.25);
    r_deep_ = std::max(140.0, 30.0 / rho_min);
  }
  build_deep_coefficients();
  build_table();

  // leading tail envelope from the order-(m+1) knot jumps
  int m = symbol_.smoothness();
  double coef = 0.0;
  for (std::size_t ki = 0; ki < symbol_.knots().size(); ++ki) {
    double kappa = symbol_.knots()[ki];
    if (kappa <= 0) continue;
    double jw = symbol_.derivative_jump(ki, m + 1);
    if (d_ == 3)
      coef += std::abs(jw * kappa) / (2.0 * kPi * kPi);
    else
      coef += std::abs(jw) * std::pow(kappa, 0.5) * std::sqrt(2.0 / kPi) / (2.0 * kPi);
  }
  tail_exp_ = (d_ == 3) ? (m + 3.0) : (m + 2.5);
  tail_coef_ = coef;
}

double RadialKernel::eval_quadrature(double r) const {
  double total = 0.0;
  for (const auto& piece : symbol_.pieces()) {
    double len = piece.b - piece.a;
    double panel = std::min(len, std::max(0.02, 3.0 / std::max(r, 1.0)));
    int np = std::max(1, static_cast<int>(std::ceil(len / panel)));
    const auto& rule = gl_rule(12);
    for (int ip = 0; ip < np; ++ip) {
      double a = piece.a + len * ip / np;
      double b = piece.a + len * (ip + 1) / np;
      double c = 0.5 * (a + b), h = 0.5 * (b - a);
      for (std::size_t i = 0; i < rule.first.size(); ++i) {
        double rho = c + h * rule.first[i];
        double w = piece.eval(rho);
        double kern;
        if (d_ == 3) {
          double z = r * rho;
          kern = (z < 1e-8) ? (1.0 - z * z / 6.0) : std::sin(z) / z;
          kern *= rho * rho / (2.0 * kPi * kPi);
        } else {
          kern = bessel_j0(r * rho) * rho / (2.0 * kPi);
        }
        total += h * rule.second[i] * w * kern;
      }
    }
  }
  return total;
}

void RadialKernel::build_deep_coefficients() {
  using C = std::complex<double>;
  int m = symbol_.smoothness();
  const auto& knots = symbol_.knots();
  deep_poly_.assign(knots.size(), {});

  // boundary terms of int W rho^e e^{i r rho} drho regrouped by knot:
  // term (nu): (-1)^{nu+1} jump_nu / (i r)^{nu+1}; only nu >= m+1 survive.
  auto add_terms = [&](double e, int nu_max, C prefactor, int extra_u_power) {
    for (std::size_t ki = 0; ki < knots.size(); ++ki) {
      double kappa = knots[ki];
      for (int nu = m + 1; nu <= nu_max; ++nu) {
        double jf = 0.0;
        for (int mu = m + 1; mu <= nu; ++mu) {
          double jw = symbol_.derivative_jump(ki, mu);
          if (jw == 0.0) continue;
          jf += binom(nu, mu) * jw * falling_power(e, nu - mu) * std::pow(kappa, e - (nu - mu));
        }
        if (jf == 0.0) continue;
        double sign = ((nu + 1) % 2 == 0) ? 1.0 : -1.0;
        C ipow = std::pow(C(0.0, 1.0), -(nu + 1));
        std::size_t upow = static_cast<std::size_t>(nu + 1 + extra_u_power);
        auto& poly = deep_poly_[ki];
        if (poly.size() <= upow) poly.resize(upow + 1, C(0));
        poly[upow] += prefactor * sign * jf * ipow;
      }
    }
  };

  if (d_ == 3) {
    int deg = 0;
    for (const auto& p : symbol_.pieces())
      deg = std::max<int>(deg, static_cast<int>(p.coef.size()));
    add_terms(1.0, deg + 2, C(1.0), 0);
  } else {
    auto a = j0_asym_coeffs(10);
    C ipow = 1.0;
    for (int k = 0; k < static_cast<int>(a.size()); ++k) {
      add_terms(0.5 - k, m + 8, ipow * a[k], k);
      ipow *= C(0.0, 1.0);
    }
  }
}

double RadialKernel::eval_deep(double r) const {
  using C = std::complex<double>;
  double u = 1.0 / r;
  C sum = 0.0;
  const auto& knots = symbol_.knots();
  for (std::size_t ki = 0; ki < knots.size(); ++ki) {
    const auto& poly = deep_poly_[ki];
    if (poly.empty()) continue;
    C horner = 0.0;
    for (std::size_t p = poly.size(); p-- > 0;) horner = horner * u + poly[p];
    sum += std::exp(C(0.0, r * knots[ki])) * horner;
  }
  if (d_ == 3) return sum.imag() / (2.0 * kPi * kPi * r);
  C front = std::sqrt(2.0 / (kPi * r)) * std::exp(C(0.0, -kPi / 4.0)) / (2.0 * kPi);
  return (front * sum).real();
}

void RadialKernel::build_table() {
  dr_ = 0.01;
  std::size_t n = static_cast<std::size_t>(std::ceil(r_deep_ / dr_)) + 4;
  table_.resize(n);
  for (std::size_t i = 0; i < n; ++i) table_[i] = eval_quadrature(i * dr_);
  g0_ = table_[0];
  peak_ = 0.0;
  for (double v : table_) peak_ = std::max(peak_, std::abs(v));
}

double RadialKernel::table_lookup(double r) const {
  // 4-point Lagrange on the uniform table
  double s = r / dr_;
  std::size_t i1 = static_cast<std::size_t>(s);
  if (i1 == 0) i1 = 1;
  if (i1 + 2 >= table_.size()) i1 = table_.size() - 3;
  double t = s - static_cast<double>(i1);
  const double* p = &table_[i1 - 1];
  double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  double c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  double c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  double c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return c0 * p[0] + c1 * p[1] + c2 * p[2] + c3 * p[3];
}

double RadialKernel::operator()(double r) const {
  r = std::abs(r);
  if (r < r_deep_ - 2 * dr_) return table_lookup(r);
  return eval_deep(r);
}

double RadialKernel::truncation_radius(double rel) const {
  double target = rel * peak_;
  // start from the asymptotic envelope estimate, then scan downwards
  double r0 = std::pow(std::max(tail_coef_, 1e-300) / target, 1.0 / tail_exp_);
  double r = std::max(r0 * 1.5, r_deep_ + 1.0);
  double step = 0.05;
  double last_above = 0.0;
  for (double s = r; s > 0.0; s -= step) {
    double v = std::abs((*this)(s));
    if (v >= target) {
      last_above = s;
      break;
    }
  }
  return std::max(last_above + step, 1.0);
}

double RadialKernel::mass_radius(double p, double eps) const {
  double omega = (d_ == 3) ? 4.0 * kPi : 2.0 * kPi;
  // cumulative |G|^p r^{d-1} over the table, then analytic envelope tail
  double h = dr_;
  std::vector<double> f(table_.size());
  for (std::size_t i = 0; i < table_.size(); ++i)
    f[i] = std::pow(std::abs(table_[i]), p) * std::pow(i * h, d_ - 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) total += 0.5 * h * (f[i] + f[i + 1]);
  double alpha = tail_exp_ * p - (d_ - 1.0);
  double rT = (table_.size() - 1) * h;
  double tail = std::pow(tail_coef_, p) * std::pow(rT, 1.0 - alpha) / (alpha - 1.0);
  total += tail;
  total *= omega;

  double acc = 0.0;
  double target = (1.0 - eps) * total;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    acc += 0.5 * h * (f[i] + f[i + 1]) * omega;
    if (acc >= target) return (i + 1) * h;
  }
  return rT;
}

double RadialKernel::lp_norm(double p) const {
  double omega = (d_ == 3) ? 4.0 * kPi : 2.0 * kPi;
  double h = dr_;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < table_.size(); ++i) {
    double r0 = i * h, r1 = (i + 1) * h;
    double f0 = std::pow(std::abs(table_[i]), p) * std::pow(r0, d_ - 1.0);
    double f1 = std::pow(std::abs(table_[i + 1]), p) * std::pow(r1, d_ - 1.0);
    total += 0.5 * h * (f0 + f1);
  }
  double alpha = tail_exp_ * p - (d_ - 1.0);
  double rT = (table_.size() - 1) * h;
  total += std::pow(tail_coef_, p) * std::pow(rT, 1.0 - alpha) / (alpha - 1.0);
  return std::pow(omega * total, 1.0 / p);
}

// ---------------------------------------------------------------------------
// kernel cache
// ---------------------------------------------------------------------------

namespace {
struct KernelKey {
  int kind; // 0 annulus, 1 cutoff
  int m;
  int d;
  double r1, r2;
  bool operator<(const KernelKey& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (m != o.m) return m < o.m;
    if (d != o.d) return d < o.d;
    if (r1 != o.r1) return r1 < o.r1;
    return r2 < o.r2;
  }
};
std::map<KernelKey, std::unique_ptr<RadialKernel>> g_kernels;
} // namespace

const RadialKernel& annulus_kernel(int m, int d) {
  KernelKey key{0, m, d, 0.0, 0.0};
  auto it = g_kernels.find(key);
  if (it == g_kernels.end())
    it = g_kernels.emplace(key, std::make_unique<RadialKernel>(RadialSymbol::annulus(m), d)).first;
  return *it->second;
}

const RadialKernel& cutoff_kernel(int m, int d, double r_one, double r_zero) {
  KernelKey key{1, m, d, r_one, r_zero};
  auto it = g_kernels.find(key);
  if (it == g_kernels.end())
    it = g_kernels
             .emplace(key, std::make_unique<RadialKernel>(RadialSymbol::cutoff(m, r_one, r_zero), d))
             .first;
  return *it->second;
}

} // namespace nsinf
