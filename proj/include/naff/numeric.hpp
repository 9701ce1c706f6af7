#pragma once

// Small numeric helpers shared by every module: constants, the bracket
// (signed nearest-integer) function, and accurate unit-phasor evaluation.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include "naff/error.hpp"

namespace naff {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// π split as hi + lo with hi the correctly rounded double.
inline constexpr double kPiHi = 3.141592653589793116;
inline constexpr double kPiLo = 1.2246467991473531772e-16;

/// The integer [x] with x - [x] in (-1/2, 1/2]; half-points map down.
inline std::int64_t bracket(double x) {
  if (!(std::fabs(x) < 4503599627370496.0)) {  // 2^52
    throw DomainError("bracket: |x| must be below 2^52");
  }
  return static_cast<std::int64_t>(std::ceil(x - 0.5));
}

/// x - k*pi evaluated with a two-part pi, accurate to a few ulp of the result.
inline double reduce_by_pi(double x, std::int64_t k) {
  const double kd = static_cast<double>(k);
  return std::fma(-kd, kPiHi, x) - kd * kPiLo;
}

/// e^{i*nu*t} with the phase product carried in double-double, so the
/// result is accurate for the exact real product of the two doubles.
inline Complex phasor(double nu, double t) {
  const double hi = nu * t;
  const double lo = std::fma(nu, t, -hi);
  const double c = std::cos(hi);
  const double s = std::sin(hi);
  return {c - lo * s, s + lo * c};
}

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::fabs(sum_) >= std::fabs(value)) {
      carry_ += (sum_ - t) + value;
    } else {
      carry_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace naff
