#pragma once

// Quasiperiodic models, uniformly sampled signals on symmetric grids,
// the two benchmark functions F1/F2, and the aliasing forward model.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "naff/error.hpp"
#include "naff/numeric.hpp"

namespace naff {

struct QPTerm {
  double freq = 0.0;  // angular frequency
  Complex amp{};
};

/// Terms ordered by descending |amp|; ties resolved by ascending |freq|.
class QPModel {
 public:
  QPModel() = default;
  explicit QPModel(std::vector<QPTerm> terms, std::string label = {})
      : terms_(std::move(terms)), label_(std::move(label)) {
    for (const QPTerm& t : terms_) {
      if (t.amp == Complex{}) throw DomainError("QPModel: zero amplitude term");
      if (!std::isfinite(t.freq)) throw DomainError("QPModel: non-finite frequency");
    }
    std::sort(terms_.begin(), terms_.end(), [](const QPTerm& a, const QPTerm& b) {
      const double ma = std::abs(a.amp);
      const double mb = std::abs(b.amp);
      if (ma != mb) return ma > mb;
      if (std::fabs(a.freq) != std::fabs(b.freq)) return std::fabs(a.freq) < std::fabs(b.freq);
      return a.freq < b.freq;
    });
    for (std::size_t i = 1; i < terms_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (terms_[i].freq == terms_[j].freq) throw DomainError("QPModel: duplicate frequency");
      }
    }
  }

  std::span<const QPTerm> terms() const { return terms_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return terms_.size(); }
  const QPTerm& operator[](std::size_t i) const { return terms_[i]; }

 private:
  std::vector<QPTerm> terms_;
  std::string label_;
};

inline Complex evaluate_model(const QPModel& m, double t) {
  Complex sum{};
  for (const QPTerm& term : m.terms()) sum += term.amp * phasor(term.freq, t);
  return sum;
}

/// Samples at t_j = (j - M) h, j = 0..2M, so T = M h and t_{2M-j} = -t_j.
class SampledSignal {
 public:
  static constexpr std::size_t kMinHalfCount = 8;

  SampledSignal(double step, std::size_t half_count, std::vector<Complex> samples)
      : step_(step), half_count_(half_count), samples_(std::move(samples)) {
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("sampling step must be positive");
    if (half_count < kMinHalfCount) throw DomainError("grid needs at least 8 steps per half span");
    if (samples_.size() != 2 * half_count + 1) throw DomainError("sample count must be 2M+1");
  }

  /// M = ceil(T/h), with a 1e-12 relative slack for T/h that is integral up to rounding.
  static std::size_t half_count_for(double half_span, double step) {
    if (!(half_span > 0.0) || !(step > 0.0) || !std::isfinite(half_span) || !std::isfinite(step)) {
      throw DomainError("half span and step must be positive and finite");
    }
    const double ratio = half_span / step;
    const double m = std::ceil(ratio - 1e-12 * std::max(1.0, ratio));
    if (m < static_cast<double>(kMinHalfCount)) {
      throw DomainError("grid needs at least 8 steps per half span");
    }
    if (m > 1e9) throw DomainError("grid too large");
    return static_cast<std::size_t>(m);
  }

  double step() const { return step_; }
  std::size_t half_count() const { return half_count_; }
  double half_span() const { return static_cast<double>(half_count_) * step_; }
  std::size_t size() const { return samples_.size(); }
  double time(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(half_count_)) * step_;
  }
  std::span<const Complex> samples() const { return samples_; }
  const Complex& operator[](std::size_t j) const { return samples_[j]; }

 private:
  double step_;
  std::size_t half_count_;
  std::vector<Complex> samples_;
};

template <typename F>
SampledSignal sample_function(F&& f, double half_span, double step) {
  const std::size_t m = SampledSignal::half_count_for(half_span, step);
  std::vector<Complex> samples(2 * m + 1);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double t = (static_cast<double>(j) - static_cast<double>(m)) * step;
    samples[j] = f(t);
  }
  return {step, m, std::move(samples)};
}

inline SampledSignal sample_model(const QPModel& m, double half_span, double step) {
  return sample_function([&m](double t) { return evaluate_model(m, t); }, half_span, step);
}

// ---------------------------------------------------------------------------
// F1(t) = 1 / (1 + e^{it}/2 + e^{-i omega t}/4) and its truncated expansion.

inline constexpr double kDefaultOmega = 2.02;

inline Complex f1_value(double t, double omega = kDefaultOmega) {
  return 1.0 / (1.0 + 0.5 * phasor(1.0, t) + 0.25 * phasor(-omega, t));
}

inline SampledSignal f1_sample(double half_span, double step, double omega = kDefaultOmega) {
  return sample_function([omega](double t) { return f1_value(t, omega); }, half_span, step);
}

/// Geometric expansion of F1: the term (p, q) sits at p - q*omega with
/// amplitude (-1)^{p+q} C(p+q, p) 2^{-p} 4^{-q}; all p + q <= cutoff.
inline QPModel f1_expansion(int cutoff, double omega = kDefaultOmega) {
  if (cutoff < 0 || cutoff > 60) throw DomainError("f1_expansion: cutoff must be in [0, 60]");
  std::vector<QPTerm> terms;
  for (int n = 0; n <= cutoff; ++n) {
    // C(n, p) 2^{-p} 4^{-(n-p)}, built multiplicatively to stay in range.
    for (int p = 0; p <= n; ++p) {
      const int q = n - p;
      double c = 1.0;
      for (int i = 1; i <= p; ++i) c = c * (q + i) / i;
      const double mag = std::ldexp(c, -p - 2 * q);
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      terms.push_back({static_cast<double>(p) - static_cast<double>(q) * omega, sign * mag});
    }
  }
  return QPModel(std::move(terms), "f1-expansion");
}

/// The 50 largest terms of F1's expansion.
inline QPModel f2_model(double omega = kDefaultOmega) {
  QPModel full = f1_expansion(40, omega);
  std::vector<QPTerm> top(full.terms().begin(), full.terms().begin() + 50);
  return QPModel(std::move(top), "f2");
}

// ---------------------------------------------------------------------------

/// Observed (aliased) angular frequency for step h: nu0 - 2 pi k / h with
/// k = [nu0 h / 2 pi], so that nu h / 2 pi lies in (-1/2, 1/2].
inline double alias_frequency(double nu0, double h) {
  if (!(h > 0.0)) throw DomainError("alias_frequency: step must be positive");
  const std::int64_t k = bracket(nu0 * h / kTwoPi);
  return nu0 - static_cast<double>(k) * kTwoPi / h;
}

// ---------------------------------------------------------------------------
// CSV: header "t,re,im", strictly increasing uniform t.

/// Grid read from a file may be centred anywhere; `origin` is the time of
/// the centre sample.
struct SignalFile {
  SampledSignal signal;
  double origin;
};

inline SignalFile read_signal_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&line_no](const std::string& what) -> DomainError {
    return DomainError("line " + std::to_string(line_no) + ": " + what);
  };

  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string compact;
    for (char ch : line) {
      if (ch != ' ' && ch != '\t') compact.push_back(ch);
    }
    if (compact != "t,re,im") throw fail("expected header 't,re,im'");
    have_header = true;
    break;
  }
  if (!have_header) throw fail("empty input");

  std::vector<double> times;
  std::vector<Complex> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    double fields[3];
    for (int i = 0; i < 3; ++i) {
      std::string cell;
      if (!std::getline(row, cell, ',')) throw fail("expected 3 columns");
      std::size_t used = 0;
      try {
        fields[i] = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw fail("not a number: '" + cell + "'");
      }
      while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\t')) ++used;
      if (used != cell.size()) throw fail("not a number: '" + cell + "'");
    }
    std::string extra;
    if (std::getline(row, extra, ',')) throw fail("expected 3 columns");
    if (!times.empty() && !(fields[0] > times.back())) throw fail("times must be strictly increasing");
    times.push_back(fields[0]);
    values.emplace_back(fields[1], fields[2]);
  }
  if (times.size() < 2 * SampledSignal::kMinHalfCount + 1) {
    throw fail("need at least 17 samples");
  }
  if (times.size() % 2 == 0) {
    times.pop_back();
    values.pop_back();
  }
  const std::size_t n = times.size();
  const double step = (times.back() - times.front()) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double expected = times.front() + static_cast<double>(j) * step;
    if (std::fabs(times[j] - expected) > 1e-9 * step) {
      line_no = j + 2;
      throw fail("non-uniform sampling");
    }
  }
  const std::size_t m = (n - 1) / 2;
  return {SampledSignal(step, m, std::move(values)), times[m]};
}

inline void write_signal_csv(std::ostream& out, const SampledSignal& s, double origin = 0.0) {
  out << "t,re,im\n";
  char buf[96];
  for (std::size_t j = 0; j < s.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", origin + s.time(j), s[j].real(),
                  s[j].imag());
    out << buf;
  }
}

}  // namespace naff
