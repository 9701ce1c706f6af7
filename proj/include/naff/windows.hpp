#pragma once

// Weight windows on [-1, 1] and their transforms
//   phi(x) = (1/2) Int_{-1}^{1} e^{ixt} chi(t) dt.
//
// Cosine order p:  chi_p(t) = 2^p (p!)^2/(2p)! (1 + cos pi t)^p, with
//   phi_p(x) = (sin x / x) * prod_{j=1..p} j^2 pi^2 / (j^2 pi^2 - x^2).
// Exponential:     chi*(t) = exp(-1/(1 - t^2)) / c, where c is the half
//   integral of the bare bump; phi has no closed form and is integrated.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "naff/error.hpp"
#include "naff/numeric.hpp"
#include "naff/quadrature.hpp"

namespace naff {

/// (1/2) Int_{-1}^{1} exp(-1/(1-t^2)) dt.
inline constexpr double kBumpHalfIntegral = 0.22199690808403971891;

enum class WindowKind { kCosine, kExponential };

class WeightWindow {
 public:
  static constexpr int kMaxCosineOrder = 8;

  static WeightWindow cosine(int order);
  static WeightWindow exponential();

  /// "p0".."p8" or "exp".
  static WeightWindow parse(std::string_view token) {
    if (token == "exp") return exponential();
    if (token.size() >= 2 && token[0] == 'p') {
      int order = 0;
      for (char ch : token.substr(1)) {
        if (ch < '0' || ch > '9') throw DomainError("unknown window: " + std::string(token));
        order = order * 10 + (ch - '0');
        if (order > kMaxCosineOrder) break;
      }
      return cosine(order);
    }
    throw DomainError("unknown window: " + std::string(token));
  }

  WindowKind kind() const { return kind_; }
  bool is_cosine() const { return kind_ == WindowKind::kCosine; }
  /// Cosine order p; meaningless for the exponential window.
  int order() const { return order_; }
  /// 1 for the cosine family, c for the exponential window.
  double norm_constant() const { return is_cosine() ? 1.0 : kBumpHalfIntegral; }

  std::string token() const {
    return is_cosine() ? "p" + std::to_string(order_) : std::string("exp");
  }

  friend bool operator==(const WeightWindow&, const WeightWindow&) = default;

 private:
  WeightWindow(WindowKind kind, int order) : kind_(kind), order_(order) {}

  WindowKind kind_;
  int order_;
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// 2^p (p!)^2 / (2p)!
inline double cosine_coefficient(int p) {
  return std::ldexp(1.0, p) * factorial(p) * factorial(p) / factorial(2 * p);
}

inline double bump(double t) {
  const double a = std::fabs(t);
  if (a >= 1.0) return 0.0;
  return std::exp(-1.0 / ((1.0 - a) * (1.0 + a)));
}

inline double sinc(double u) {
  if (std::fabs(u) < 1e-3) {
    const double u2 = u * u;
    return 1.0 + u2 * (-1.0 / 6 + u2 * (1.0 / 120 + u2 * (-1.0 / 5040 + u2 * (1.0 / 362880 +
           u2 * (-1.0 / 39916800 + u2 * (1.0 / 6227020800.0))))));
  }
  return std::sin(u) / u;
}

/// d/du (sin u / u)
inline double sinc_prime(double u) {
  if (std::fabs(u) < 0.1) {
    // sum_{n>=1} (-1)^n 2n u^{2n-1} / (2n+1)!
    const double u2 = u * u;
    double term = u;
    double sum = 0.0;
    double fact = 6.0;  // (2n+1)! for n = 1
    for (int n = 1; n <= 9; ++n) {
      const double sign = (n % 2 == 1) ? -1.0 : 1.0;
      sum += sign * 2.0 * n * term / fact;
      term *= u2;
      fact *= (2.0 * n + 2.0) * (2.0 * n + 3.0);
    }
    return sum;
  }
  return (u * std::cos(u) - std::sin(u)) / (u * u);
}

struct TransformPair {
  double value;
  double derivative;
};

// Removable singularities at x = k pi, |k| <= p, are handled by pairing
// sin x with the vanishing factor: sin x = (-1)^k sin u, u = x - k pi.
inline TransformPair cosine_transform(int p, double x) {
  const std::int64_t k = std::llround(x / kPi);
  const std::int64_t m = std::llabs(k);

  if (m <= p) {
    const double u = reduce_by_pi(x, k);
    double q = 1.0;        // remaining product
    double dlog_q = 0.0;   // q'/q
    if (k == 0) {
      for (int j = 1; j <= p; ++j) {
        const double jp = j * kPi;
        const double den = (jp - x) * (jp + x);
        q *= jp * jp / den;
        dlog_q += 2.0 * x / den;
      }
      const double s = sinc(u);
      return {s * q, q * (sinc_prime(u) + s * dlog_q)};
    }
    const double mp = static_cast<double>(m) * kPi;
    const double xk = x + static_cast<double>(k) * kPi;
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;  // -(-1)^k
    q = sign * mp * mp / (x * xk);
    dlog_q = -1.0 / x - 1.0 / xk;
    for (int j = 1; j <= p; ++j) {
      if (j == m) continue;
      const double jp = j * kPi;
      const double den = (jp - x) * (jp + x);
      q *= jp * jp / den;
      dlog_q += 2.0 * x / den;
    }
    const double s = sinc(u);
    return {s * q, q * (sinc_prime(u) + s * dlog_q)};
  }

  double q = 1.0;
  double dlog_q = 0.0;
  for (int j = 1; j <= p; ++j) {
    const double jp = j * kPi;
    const double den = (jp - x) * (jp + x);
    q *= jp * jp / den;
    dlog_q += 2.0 * x / den;
  }
  const double sx = std::sin(x);
  const double cx = std::cos(x);
  return {sx / x * q, q / x * (cx - sx / x + sx * dlog_q)};
}

// Beyond this |x| the exponential transform is below 1e-25 in magnitude
// (it decays roughly like exp(-sqrt(2|x|))); quadrature would only return
// rounding noise there.
inline constexpr double kExponentialCutoff = 3000.0;

inline std::size_t exponential_panels(double x) {
  return 4 + static_cast<std::size_t>(std::fabs(x) / 2.0);
}

inline double exponential_chi(double t) { return bump(t) / kBumpHalfIntegral; }

inline double exponential_phi(double x) {
  if (std::fabs(x) >= kExponentialCutoff) return 0.0;
  return quadrature::integrate_adaptive(
      [x](double t) { return std::cos(x * t) * exponential_chi(t); }, 0.0, 1.0,
      exponential_panels(x), 1e-13);
}

inline double exponential_phi_prime(double x) {
  if (std::fabs(x) >= kExponentialCutoff) return 0.0;
  return quadrature::integrate_adaptive(
      [x](double t) { return -t * std::sin(x * t) * exponential_chi(t); }, 0.0, 1.0,
      exponential_panels(x), 1e-13);
}

inline double exponential_phi_second_zero() {
  static const double value = -quadrature::integrate_adaptive(
      [](double t) { return t * t * exponential_chi(t); }, 0.0, 1.0, 8, 1e-15);
  return value;
}

}  // namespace detail

/// |(1/2) Int chi - 1| by quadrature.
inline double normalization_error(const WeightWindow& w);

inline WeightWindow WeightWindow::cosine(int order) {
  if (order < 0 || order > kMaxCosineOrder) {
    throw DomainError("cosine window order must be in [0, 8], got " + std::to_string(order));
  }
  return {WindowKind::kCosine, order};
}

inline WeightWindow WeightWindow::exponential() {
  static const bool normalized = [] {
    const double err = std::fabs(
        quadrature::integrate_adaptive(detail::exponential_chi, 0.0, 1.0, 8, 1e-15) - 1.0);
    if (err > 1e-12) throw std::logic_error("exponential window is not normalized");
    return true;
  }();
  (void)normalized;
  return {WindowKind::kExponential, 0};
}

/// Weight value chi(t); throws DomainError for |t| > 1.
inline double chi(const WeightWindow& w, double t) {
  if (!(std::fabs(t) <= 1.0)) throw DomainError("chi: t outside [-1, 1]");
  if (!w.is_cosine()) return detail::exponential_chi(t);
  const int p = w.order();
  const double base = 1.0 + std::cos(kPi * t);
  double v = detail::cosine_coefficient(p);
  for (int k = 0; k < p; ++k) v *= base;
  return v;
}

inline double phi(const WeightWindow& w, double x) {
  if (!w.is_cosine()) return detail::exponential_phi(x);
  return detail::cosine_transform(w.order(), x).value;
}

inline double phi_prime(const WeightWindow& w, double x) {
  if (!w.is_cosine()) return detail::exponential_phi_prime(x);
  return detail::cosine_transform(w.order(), x).derivative;
}

/// phi''(0); strictly negative for every window.
inline double phi_second_zero(const WeightWindow& w) {
  if (!w.is_cosine()) return detail::exponential_phi_second_zero();
  double tail = kPi * kPi / 6.0;
  for (int k = 1; k <= w.order(); ++k) tail -= 1.0 / (static_cast<double>(k) * k);
  return -2.0 / (kPi * kPi) * tail;
}

inline double normalization_error(const WeightWindow& w) {
  const double half = quadrature::integrate_adaptive(
      [&w](double t) { return chi(w, t); }, 0.0, 1.0, 8, 1e-15);
  return std::fabs(half - 1.0);
}

}  // namespace naff
