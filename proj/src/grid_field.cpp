#include "nsinf/grid_field.hpp"

#include <fftw3.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <tuple>

#include "json.hpp"

namespace nsinf {

void check_alloc_budget(std::size_t bytes, const char* what) {
  if (bytes > memory_cap_bytes())
    throw Error(ErrorCode::memory_cap,
                std::string(what) + ": estimated " + std::to_string(bytes >> 20) +
                    " MiB exceeds memory cap " + std::to_string(memory_cap_bytes() >> 20) +
                    " MiB; reduce N/K or use the patch path");
}

GridField::GridField(int d, std::array<Axis, 3> axes) : d_(d), axes_(axes) {
  std::int64_t total = 1;
  for (int a = 0; a < d_; ++a) total *= axes_[a].n;
  check_alloc_budget(static_cast<std::size_t>(total) * sizeof(double), "GridField");
  data_.assign(static_cast<std::size_t>(total), 0.0);
}

double GridField::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < d_; ++a) v *= axes_[a].h();
  return v;
}

double& GridField::at(std::int64_t i0, std::int64_t i1, std::int64_t i2) {
  return data_[static_cast<std::size_t>(i0 + axes_[0].n * (i1 + (d_ > 1 ? axes_[1].n : 1) * i2))];
}

double GridField::at(std::int64_t i0, std::int64_t i1, std::int64_t i2) const {
  return data_[static_cast<std::size_t>(i0 + axes_[0].n * (i1 + (d_ > 1 ? axes_[1].n : 1) * i2))];
}

void GridField::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void GridField::sample(const std::function<double(const double*)>& f) {
  std::int64_t n0 = axes_[0].n, n1 = d_ > 1 ? axes_[1].n : 1, n2 = d_ > 2 ? axes_[2].n : 1;
  double x[3] = {0, 0, 0};
  std::size_t idx = 0;
  for (std::int64_t i2 = 0; i2 < n2; ++i2) {
    x[2] = coord(2, i2);
    for (std::int64_t i1 = 0; i1 < n1; ++i1) {
      x[1] = d_ > 1 ? coord(1, i1) : 0.0;
      for (std::int64_t i0 = 0; i0 < n0; ++i0) {
        x[0] = coord(0, i0);
        data_[idx++] = f(x);
      }
    }
  }
}

GridField& GridField::operator+=(const GridField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}
GridField& GridField::operator-=(const GridField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}
GridField& GridField::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

VectorGridField VectorGridField::zeros(int d, const GridField& like) {
  VectorGridField u;
  for (int c = 0; c < d; ++c) u.comp.push_back(GridField::like(like));
  return u;
}

// ---------------------------------------------------------------------------
// FFT plumbing
// ---------------------------------------------------------------------------

namespace {

struct PlanKey {
  int kind; // 0 r2c, 1 c2r, 2 c2c fwd, 3 c2c bwd
  std::array<std::int64_t, 3> n;
  bool operator<(const PlanKey& o) const { return std::tie(kind, n) < std::tie(o.kind, o.n); }
};

fftw_plan get_plan(int kind, int d, const std::array<Axis, 3>& axes, void* in, void* out) {
  static std::map<PlanKey, fftw_plan> cache;
  PlanKey key{kind, {axes[0].n, d > 1 ? axes[1].n : 1, d > 2 ? axes[2].n : 1}};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  // FFTW wants row-major dims, last dimension fastest; our axis 0 is fastest.
  int dims[3];
  int rank = d;
  for (int a = 0; a < d; ++a) dims[a] = static_cast<int>(axes[d - 1 - a].n);
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan p = nullptr;
  switch (kind) {
    case 0:
      p = fftw_plan_dft_r2c(rank, dims, static_cast<double*>(in),
                            static_cast<fftw_complex*>(out), flags);
      break;
    case 1:
      p = fftw_plan_dft_c2r(rank, dims, static_cast<fftw_complex*>(in),
                            static_cast<double*>(out), flags);
      break;
    case 2:
      p = fftw_plan_dft(rank, dims, static_cast<fftw_complex*>(in),
                        static_cast<fftw_complex*>(out), FFTW_FORWARD, flags);
      break;
    case 3:
      p = fftw_plan_dft(rank, dims, static_cast<fftw_complex*>(in),
                        static_cast<fftw_complex*>(out), FFTW_BACKWARD, flags);
      break;
  }
  if (!p) throw Error(ErrorCode::invalid_argument, "fftw plan creation failed");
  cache.emplace(key, p);
  return p;
}

double wavenumber(const Axis& ax, std::int64_t i) {
  std::int64_t k = (i <= ax.n / 2) ? i : i - ax.n;
  return kTwoPi * static_cast<double>(k) / ax.length;
}

} // namespace

double HalfSpectrum::xi(int a, std::int64_t i) const {
  if (a == 0) return kTwoPi * static_cast<double>(i) / axes[0].length;
  return wavenumber(axes[a], i);
}

double FullSpectrum::xi(int a, std::int64_t i) const { return wavenumber(axes[a], i); }

HalfSpectrum fft(const GridField& f) {
  HalfSpectrum s;
  s.d = f.dim();
  for (int a = 0; a < 3; ++a) s.axes[a] = a < f.dim() ? f.axis(a) : Axis{};
  std::int64_t n0h = s.axes[0].n / 2 + 1;
  std::int64_t total = n0h;
  for (int a = 1; a < s.d; ++a) total *= s.axes[a].n;
  check_alloc_budget(static_cast<std::size_t>(total) * sizeof(cplx), "fft");
  s.modes.assign(static_cast<std::size_t>(total), cplx(0));
  std::vector<double> in(f.values().begin(), f.values().end()); // r2c may clobber
  fftw_plan p = get_plan(0, s.d, s.axes, in.data(), s.modes.data());
  fftw_execute_dft_r2c(p, in.data(), reinterpret_cast<fftw_complex*>(s.modes.data()));
  return s;
}

GridField ifft(const HalfSpectrum& s) {
  std::array<Axis, 3> axes = s.axes;
  GridField f(s.d, axes);
  std::vector<cplx> tmp(s.modes); // c2r destroys input
  fftw_plan p = get_plan(1, s.d, axes, tmp.data(), f.values().data());
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(tmp.data()), f.values().data());
  double scale = 1.0;
  for (int a = 0; a < s.d; ++a) scale /= static_cast<double>(axes[a].n);
  f *= scale;
  return f;
}

FullSpectrum fft_full(const GridField& f) {
  FullSpectrum s;
  s.d = f.dim();
  for (int a = 0; a < 3; ++a) s.axes[a] = a < f.dim() ? f.axis(a) : Axis{};
  std::int64_t total = 1;
  for (int a = 0; a < s.d; ++a) total *= s.axes[a].n;
  check_alloc_budget(static_cast<std::size_t>(total) * sizeof(cplx) * 2, "fft_full");
  std::vector<cplx> in(static_cast<std::size_t>(total));
  for (std::int64_t i = 0; i < total; ++i) in[static_cast<std::size_t>(i)] = f.values()[i];
  s.modes.assign(static_cast<std::size_t>(total), cplx(0));
  fftw_plan p = get_plan(2, s.d, s.axes, in.data(), s.modes.data());
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(s.modes.data()));
  return s;
}

ComplexGridField ifft_full(const FullSpectrum& s) {
  std::array<Axis, 3> axes = s.axes;
  std::int64_t total = 1;
  for (int a = 0; a < s.d; ++a) total *= axes[a].n;
  std::vector<cplx> in(s.modes), out(static_cast<std::size_t>(total));
  fftw_plan p = get_plan(3, s.d, axes, in.data(), out.data());
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  ComplexGridField g{GridField(s.d, axes), GridField(s.d, axes)};
  double scale = 1.0;
  for (int a = 0; a < s.d; ++a) scale /= static_cast<double>(axes[a].n);
  for (std::int64_t i = 0; i < total; ++i) {
    g.re.values()[i] = out[static_cast<std::size_t>(i)].real() * scale;
    g.im.values()[i] = out[static_cast<std::size_t>(i)].imag() * scale;
  }
  return g;
}

void apply_multiplier_inplace(HalfSpectrum& s, const std::function<cplx(const double*)>& sigma) {
  std::int64_t n0h = s.n0h();
  std::int64_t n1 = s.d > 1 ? s.axes[1].n : 1;
  std::int64_t n2 = s.d > 2 ? s.axes[2].n : 1;
  double xi[3] = {0, 0, 0};
  std::size_t idx = 0;
  for (std::int64_t i2 = 0; i2 < n2; ++i2) {
    xi[2] = s.d > 2 ? s.xi(2, i2) : 0.0;
    for (std::int64_t i1 = 0; i1 < n1; ++i1) {
      xi[1] = s.d > 1 ? s.xi(1, i1) : 0.0;
      for (std::int64_t i0 = 0; i0 < n0h; ++i0) {
        xi[0] = s.xi(0, i0);
        s.modes[idx++] *= sigma(xi);
      }
    }
  }
}

GridField apply_multiplier(const GridField& f, const std::function<cplx(const double*)>& sigma) {
  HalfSpectrum s = fft(f);
  apply_multiplier_inplace(s, sigma);
  return ifft(s);
}

VectorGridField apply_matrix_multiplier(
    const VectorGridField& u, const std::function<void(const double*, cplx*)>& mat) {
  int d = u.dim();
  std::vector<HalfSpectrum> spec;
  spec.reserve(d);
  for (int c = 0; c < d; ++c) spec.push_back(fft(u.comp[c]));
  const HalfSpectrum& s0 = spec[0];
  std::int64_t n0h = s0.n0h();
  std::int64_t n1 = d > 1 ? s0.axes[1].n : 1;
  std::int64_t n2 = d > 2 ? s0.axes[2].n : 1;
  double xi[3] = {0, 0, 0};
  cplx m[9];
  std::size_t idx = 0;
  for (std::int64_t i2 = 0; i2 < n2; ++i2) {
    xi[2] = d > 2 ? s0.xi(2, i2) : 0.0;
    for (std::int64_t i1 = 0; i1 < n1; ++i1) {
      xi[1] = d > 1 ? s0.xi(1, i1) : 0.0;
      for (std::int64_t i0 = 0; i0 < n0h; ++i0, ++idx) {
        xi[0] = s0.xi(0, i0);
        mat(xi, m);
        cplx v[3], w[3];
        for (int c = 0; c < d; ++c) v[c] = spec[c].modes[idx];
        for (int r = 0; r < d; ++r) {
          w[r] = cplx(0);
          for (int c = 0; c < d; ++c) w[r] += m[r + 3 * c] * v[c];
        }
        for (int c = 0; c < d; ++c) spec[c].modes[idx] = w[c];
      }
    }
  }
  VectorGridField out;
  for (int c = 0; c < d; ++c) out.comp.push_back(ifft(spec[c]));
  return out;
}

double spectral_mass_total(const HalfSpectrum& s) {
  // Parseval with the r2c half-storage doubling (axis-0 interior modes)
  std::int64_t n0h = s.n0h(), n0 = s.axes[0].n;
  std::int64_t n1 = s.d > 1 ? s.axes[1].n : 1;
  std::int64_t n2 = s.d > 2 ? s.axes[2].n : 1;
  double total = 0.0;
  std::size_t idx = 0;
  for (std::int64_t i2 = 0; i2 < n2; ++i2)
    for (std::int64_t i1 = 0; i1 < n1; ++i1)
      for (std::int64_t i0 = 0; i0 < n0h; ++i0, ++idx) {
        double w = (i0 == 0 || (n0 % 2 == 0 && i0 == n0 / 2)) ? 1.0 : 2.0;
        total += w * std::norm(s.modes[idx]);
      }
  return total;
}

double spectral_mass_outside(const HalfSpectrum& s, double radius) {
  std::int64_t n0h = s.n0h(), n0 = s.axes[0].n;
  std::int64_t n1 = s.d > 1 ? s.axes[1].n : 1;
  std::int64_t n2 = s.d > 2 ? s.axes[2].n : 1;
  double out = 0.0;
  double r2 = radius * radius;
  std::size_t idx = 0;
  for (std::int64_t i2 = 0; i2 < n2; ++i2) {
    double x2 = s.d > 2 ? s.xi(2, i2) : 0.0;
    for (std::int64_t i1 = 0; i1 < n1; ++i1) {
      double x1 = s.d > 1 ? s.xi(1, i1) : 0.0;
      for (std::int64_t i0 = 0; i0 < n0h; ++i0, ++idx) {
        double x0 = s.xi(0, i0);
        if (x0 * x0 + x1 * x1 + x2 * x2 <= r2) continue;
        double w = (i0 == 0 || (n0 % 2 == 0 && i0 == n0 / 2)) ? 1.0 : 2.0;
        out += w * std::norm(s.modes[idx]);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[5] = "NSGF";
}

void GridField::dump(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io_failure, "cannot open " + path);
  f.write(kMagic, 4);
  std::int64_t ver = 1, d = d_;
  f.write(reinterpret_cast<const char*>(&ver), 8);
  f.write(reinterpret_cast<const char*>(&d), 8);
  for (int a = 0; a < d_; ++a) {
    f.write(reinterpret_cast<const char*>(&axes_[a].origin), 8);
    f.write(reinterpret_cast<const char*>(&axes_[a].length), 8);
    f.write(reinterpret_cast<const char*>(&axes_[a].n), 8);
  }
  f.write(reinterpret_cast<const char*>(data_.data()),
          static_cast<std::streamsize>(data_.size() * sizeof(double)));
  if (!f) throw Error(ErrorCode::io_failure, "short write to " + path);

  nlohmann::json sidecar;
  sidecar["format"] = "nsinf-gridfield";
  sidecar["version"] = 1;
  sidecar["dimension"] = d_;
  sidecar["order"] = "axis1-fastest";
  sidecar["dtype"] = "float64";
  for (int a = 0; a < d_; ++a)
    sidecar["axes"].push_back(
        {{"origin", axes_[a].origin}, {"length", axes_[a].length}, {"n", axes_[a].n}});
  std::ofstream js(path + ".json");
  js << sidecar.dump(2) << "\n";
}

GridField GridField::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io_failure, "cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw Error(ErrorCode::io_failure, "bad magic in " + path);
  std::int64_t ver = 0, d = 0;
  f.read(reinterpret_cast<char*>(&ver), 8);
  f.read(reinterpret_cast<char*>(&d), 8);
  if (ver != 1 || d < 1 || d > 3) throw Error(ErrorCode::io_failure, "bad header in " + path);
  std::array<Axis, 3> axes{};
  for (int a = 0; a < d; ++a) {
    f.read(reinterpret_cast<char*>(&axes[a].origin), 8);
    f.read(reinterpret_cast<char*>(&axes[a].length), 8);
    f.read(reinterpret_cast<char*>(&axes[a].n), 8);
  }
  GridField g(static_cast<int>(d), axes);
  f.read(reinterpret_cast<char*>(g.values().data()),
         static_cast<std::streamsize>(g.values().size() * sizeof(double)));
  if (!f) throw Error(ErrorCode::io_failure, "short read from " + path);
  return g;
}

} // namespace nsinf
