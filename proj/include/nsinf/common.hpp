#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nsinf {

inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Error taxonomy surfaced as machine-readable codes in CLI JSON output.
enum class ErrorCode {
  invalid_argument,
  memory_cap,
  quadrature_failure,
  io_failure,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }
  const char* code_name() const {
    switch (code_) {
      case ErrorCode::invalid_argument: return "invalid_argument";
      case ErrorCode::memory_cap: return "memory_cap";
      case ErrorCode::quadrature_failure: return "quadrature_failure";
      case ErrorCode::io_failure: return "io_failure";
    }
    return "unknown";
  }

private:
  ErrorCode code_;
};

/// Memory budget for dense grids, overridable via NSINF_MEMORY_CAP_MB.
std::size_t memory_cap_bytes();
void set_memory_cap_bytes(std::size_t bytes);

// ---------------------------------------------------------------------------
// Double-double helpers for the exact carrier-phase reduction. Centers are
// exact integers; sin(2^N * center) needs (integer mod 2pi) to ~1e-20.
// ---------------------------------------------------------------------------

struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

inline DoubleDouble two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DoubleDouble two_prod(double a, double b) {
  double p = a * b;
  double err = std::fma(a, b, -p);
  return {p, err};
}

/// Reduce an exact nonnegative integer modulo 2*pi. Valid for n < 2^62.
double reduce_integer_mod_2pi(std::int64_t n);

} // namespace nsinf
