#pragma once

// Composite Gauss-Legendre quadrature on uniform panels.

#include <array>
#include <cmath>
#include <cstddef>

#include "naff/numeric.hpp"

namespace naff::quadrature {

inline constexpr std::size_t kGaussOrder = 20;

struct GaussRule {
  std::array<double, kGaussOrder> nodes{};    // on [-1, 1]
  std::array<double, kGaussOrder> weights{};
};

/// Nodes and weights by Newton iteration on the Legendre recurrence.
inline const GaussRule& gauss_legendre() {
  static const GaussRule rule = [] {
    GaussRule r;
    constexpr std::size_t n = kGaussOrder;
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(kPi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(n) + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
          const double kd = static_cast<double>(k);
          const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
          p0 = p1;
          p1 = p2;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-16) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      r.nodes[i] = -x;
      r.nodes[n - 1 - i] = x;
      r.weights[i] = w;
      r.weights[n - 1 - i] = w;
    }
    return r;
  }();
  return rule;
}

/// Integral of f over [a, b] split into `panels` equal pieces.
template <typename F>
double integrate(F&& f, double a, double b, std::size_t panels) {
  const GaussRule& rule = gauss_legendre();
  const double width = (b - a) / static_cast<double>(panels);
  const double half = 0.5 * width;
  CompensatedSum total;
  for (std::size_t k = 0; k < panels; ++k) {
    const double mid = a + (static_cast<double>(k) + 0.5) * width;
    double panel = 0.0;
    for (std::size_t i = 0; i < kGaussOrder; ++i) {
      panel += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    total.add(panel * half);
  }
  return total.value();
}

/// Doubles the panel count until two successive estimates agree to `tol`.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, std::size_t panels,
                          double tol, std::size_t max_panels = 1u << 16) {
  double coarse = integrate(f, a, b, panels);
  while (panels < max_panels) {
    panels *= 2;
    const double fine = integrate(f, a, b, panels);
    if (std::fabs(fine - coarse) <= tol) return fine;
    coarse = fine;
  }
  return coarse;
}

}  // namespace naff::quadrature
