#pragma once

// First-order corrections to the leading frequency (and amplitude) from
// the other terms of the decomposition, using the asymptotic expansions
// of the windowed correlation peak. Applied once, with the estimated
// frequencies standing in for the exact ones.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "naff/error.hpp"
#include "naff/numeric.hpp"
#include "naff/qpsignal.hpp"
#include "naff/windows.hpp"

namespace naff {

struct CorrectionInput {
  QPTerm leading;                  // nu_1^T, A_1^T
  std::vector<QPTerm> perturbers;  // estimated nu_k, a_k
  WeightWindow window = WeightWindow::cosine(1);
  double half_span = 0.0;          // T
};

struct Correction {
  double nu;            // corrected leading frequency
  double delta;         // nu - nu_1^T
  std::size_t skipped;  // perturbers inside the main lobe, |Omega' T| < 2 pi
};

namespace detail {

inline void check_input(const CorrectionInput& in) {
  if (!(in.half_span > 0.0)) throw DomainError("correction: half span must be positive");
  if (in.leading.amp == Complex{}) throw DomainError("correction: leading amplitude is zero");
}

// Calls term(Re(a_k / A_1), Omega'_k) for every usable perturber.
template <typename Term>
std::size_t for_each_perturber(const CorrectionInput& in, Term&& term) {
  std::size_t skipped = 0;
  for (const QPTerm& k : in.perturbers) {
    const double omega = k.freq - in.leading.freq;
    if (std::fabs(omega * in.half_span) < kTwoPi) {
      ++skipped;
      continue;
    }
    term(k.amp / in.leading.amp, omega);
  }
  return skipped;
}

}  // namespace detail

/// Closed-form sum for Cosine(p):
///   Delta = (-1)^{p+1} pi^{2p} (p!)^2 / (phi''(0) T^{2p+2})
///           * sum Re(a_k) cos(Omega_k T) / Omega_k^{2p+1}.
inline Correction correct_theorem1(const CorrectionInput& in) {
  detail::check_input(in);
  if (!in.window.is_cosine()) {
    throw UnsupportedWindow("the closed-form correction needs a cosine window");
  }
  const int p = in.window.order();
  const double t = in.half_span;
  CompensatedSum sum;
  const std::size_t skipped = detail::for_each_perturber(in, [&](Complex a, double omega) {
    sum.add(a.real() * std::cos(omega * t) / std::pow(omega, 2 * p + 1));
  });
  const double fact = detail::factorial(p);
  const double sign = (p % 2 == 0) ? -1.0 : 1.0;  // (-1)^{p+1}
  const double scale = sign * std::pow(kPi, 2 * p) * fact * fact /
                       (phi_second_zero(in.window) * std::pow(t, 2 * p + 2));
  const double delta = scale * sum.value();
  return {in.leading.freq + delta, delta, skipped};
}

/// Delta = -1/(T phi''(0)) * sum Re(a_k) phi'(Omega_k T); any window.
inline Correction correct_theorem2(const CorrectionInput& in) {
  detail::check_input(in);
  const double t = in.half_span;
  CompensatedSum sum;
  const std::size_t skipped = detail::for_each_perturber(in, [&](Complex a, double omega) {
    sum.add(a.real() * phi_prime(in.window, omega * t));
  });
  const double delta = -sum.value() / (t * phi_second_zero(in.window));
  return {in.leading.freq + delta, delta, skipped};
}

/// sum (a_k / A_1) phi(Omega_k T): predicted relative error of A_1^T.
inline Complex amplitude_error_estimate(const CorrectionInput& in) {
  detail::check_input(in);
  Complex sum{};
  detail::for_each_perturber(in, [&](Complex a, double omega) {
    sum += a * phi(in.window, omega * in.half_span);
  });
  return sum;
}

}  // namespace naff
