#pragma once

// Recovery of frequencies above the Nyquist limit from two analyses made
// with slightly different sampling steps h and h' = h + eps. Frequencies
// here are in cycles per unit time (f = exp(2 pi i nu t)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "naff/analyzer.hpp"
#include "naff/error.hpp"
#include "naff/numeric.hpp"

namespace naff {

struct DualRateMeasurement {
  double nu = 0.0;        // aliased frequency seen with step h
  double nu_prime = 0.0;  // aliased frequency seen with step h'
  double h = 1.0;
  double h_prime = 1.0;
};

struct Reconstruction {
  double nu0;         // reconstructed frequency
  std::int64_t k;     // nu0 h = nu h + k
  double k_raw;       // before rounding
  double residue;     // |k_raw - k|
};

/// Residues above this mean the two measurements are not one tone.
inline constexpr double kMaxTurnResidue = 0.25;

inline Reconstruction reconstruct(const DualRateMeasurement& m) {
  if (!(m.h > 0.0) || !std::isfinite(m.h)) throw DomainError("step h must be positive");
  if (m.h_prime == m.h) throw DomainError("degenerate steps: h' equals h");
  if (!(m.h_prime > m.h) || !std::isfinite(m.h_prime)) throw DomainError("step h' must exceed h");
  // Half a cycle plus rounding slack for estimates sitting on the band edge.
  constexpr double kBand = 0.5 + 1e-9;
  if (!(std::fabs(m.nu * m.h) <= kBand) || !(std::fabs(m.nu_prime * m.h_prime) <= kBand)) {
    throw DomainError("measured frequency outside its Nyquist band");
  }
  const double eps = m.h_prime - m.h;
  const double a = m.nu_prime * m.h_prime;
  const double b = m.nu * m.h;
  const std::int64_t turns = bracket(a - b);
  const double k_raw =
      (m.h / eps) * ((m.nu_prime - m.nu) * m.h_prime - static_cast<double>(turns));
  const std::int64_t k = bracket(k_raw);
  const double residue = std::fabs(k_raw - static_cast<double>(k));
  if (residue > kMaxTurnResidue) {
    throw InconsistentMeasurement("turn count residue " + std::to_string(residue) +
                                  " exceeds 0.25");
  }
  return {m.nu + static_cast<double>(k) / m.h, k, k_raw, residue};
}

/// One term of a two-rate analysis; k is unset when the pair could not be
/// reconstructed (unmatched amplitudes, inconsistent turn count, or no partner).
struct DualTerm {
  double nu0 = std::nan("");
  double nu = std::nan("");
  double nu_prime = std::nan("");
  Complex amp{};
  std::optional<std::int64_t> k;
  double k_residue = std::nan("");
  std::string note;
};

struct DualAnalysis {
  std::vector<DualTerm> terms;
  Decomposition first;
  Decomposition second;
};

inline DualAnalysis analyze_dual(const SampledSignal& f_h, const SampledSignal& f_hprime,
                                 const WeightWindow& window, const ExtractionConfig& config = {}) {
  const InnerProductSpace space_a = InnerProductSpace::for_signal(f_h, window);
  const InnerProductSpace space_b = InnerProductSpace::for_signal(f_hprime, window);
  DualAnalysis out;
  out.first = decompose(space_a, f_h.samples(), config);
  out.second = decompose(space_b, f_hprime.samples(), config);

  auto by_amplitude = [](std::vector<QPTerm> terms) {
    std::stable_sort(terms.begin(), terms.end(), [](const QPTerm& x, const QPTerm& y) {
      return std::abs(x.amp) > std::abs(y.amp);
    });
    return terms;
  };
  const std::vector<QPTerm> a = by_amplitude(out.first.terms);
  const std::vector<QPTerm> b = by_amplitude(out.second.terms);
  const std::size_t paired = std::min(a.size(), b.size());

  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    DualTerm t;
    if (i >= paired) {
      const bool from_a = i < a.size();
      const QPTerm& only = from_a ? a[i] : b[i];
      (from_a ? t.nu : t.nu_prime) = only.freq / kTwoPi;
      t.amp = only.amp;
      t.note = "unpaired";
      out.terms.push_back(t);
      continue;
    }
    t.nu = a[i].freq / kTwoPi;
    t.nu_prime = b[i].freq / kTwoPi;
    t.amp = a[i].amp;
    const double ma = std::abs(a[i].amp);
    const double mb = std::abs(b[i].amp);
    if (std::fabs(ma - mb) > 0.1 * std::max(ma, mb)) {
      t.note = "amplitude mismatch";
      out.terms.push_back(t);
      continue;
    }
    try {
      const Reconstruction r = reconstruct({t.nu, t.nu_prime, f_h.step(), f_hprime.step()});
      t.nu0 = r.nu0;
      t.k = r.k;
      t.k_residue = r.residue;
    } catch (const InconsistentMeasurement& e) {
      t.note = e.what();
    }
    out.terms.push_back(t);
  }
  return out;
}

}  // namespace naff
