#pragma once

// Convergence experiments: error of the leading frequency versus the half
// span T, log-log slope fits, and the tables built from them.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "naff/analyzer.hpp"
#include "naff/corrections.hpp"
#include "naff/dealias.hpp"
#include "naff/error.hpp"
#include "naff/qpsignal.hpp"
#include "naff/windows.hpp"

namespace naff {

/// Runs task(i) for i in [0, count) on up to `threads` workers. Results must
/// be written by index, which keeps output independent of scheduling.
template <typename Task>
void parallel_for(std::size_t count, int threads, Task&& task) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// `count` half spans T with T/2pi log-spaced over [lo, hi].
inline std::vector<double> log_spaced_spans(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw DomainError("invalid span range");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = kTwoPi * std::pow(10.0, a + (b - a) * i / (count - 1));
  }
  return out;
}

enum class CorrectionKind { kNone, kTheorem1, kTheorem2 };

struct CorrectionSpec {
  CorrectionKind kind = CorrectionKind::kNone;
  int terms = 0;  // perturbers taken from the decomposition

  std::string label() const {
    switch (kind) {
      case CorrectionKind::kNone: return "none";
      case CorrectionKind::kTheorem1: return "t1(" + std::to_string(terms) + ")";
      case CorrectionKind::kTheorem2: return "t2(" + std::to_string(terms) + ")";
    }
    return "?";
  }
};

/// F1 (closed form, sampled directly) or an explicit finite model.
struct BenchTarget {
  std::string name;
  double exact_freq = 0.0;
  std::optional<QPModel> model;  // empty: closed-form F1
  double omega = kDefaultOmega;

  static BenchTarget f1(double omega = kDefaultOmega) { return {"f1", 0.0, std::nullopt, omega}; }
  static BenchTarget f2(double omega = kDefaultOmega) { return {"f2", 0.0, f2_model(omega), omega}; }
  static BenchTarget explicit_model(QPModel m, std::string name = "model") {
    const double target = m.terms().front().freq;
    return {std::move(name), target, std::move(m), kDefaultOmega};
  }

  SampledSignal sample(double half_span, double step) const {
    if (model) return sample_model(*model, half_span, step);
    return f1_sample(half_span, step, omega);
  }
};

inline constexpr double kDefaultBenchStep = kTwoPi / 64.0;

// Default T/2pi range of the convergence runs.
inline const double kSpanLo = std::pow(10.0, 1.5);
inline constexpr double kSpanHiQuick = 1e3;
inline constexpr double kSpanHiFull = 1e4;

struct ConvergenceRequest {
  BenchTarget target = BenchTarget::f1();
  WeightWindow window = WeightWindow::cosine(1);
  std::vector<CorrectionSpec> corrections{CorrectionSpec{}};
  std::vector<double> half_spans;
  double step = kDefaultBenchStep;
  ExtractionConfig extraction{};
  int threads = 1;
};

struct ConvergenceRun {
  std::string target;
  WeightWindow window = WeightWindow::cosine(1);
  CorrectionSpec correction;
  std::vector<double> t_points;
  std::vector<double> errors;  // |nu_exact - nu_estimated|; NaN on failure
  std::vector<double> estimates;
  std::vector<std::size_t> terms_used;
  std::vector<std::size_t> skipped;
  double step = 0.0;
};

/// Error of the leading frequency for every T, one decomposition per T
/// shared by all requested corrections. Returns one run per correction.
inline std::vector<ConvergenceRun> run_convergence(const ConvergenceRequest& req) {
  if (req.half_spans.empty()) throw DomainError("no half spans given");
  if (!std::is_sorted(req.half_spans.begin(), req.half_spans.end()) ||
      std::adjacent_find(req.half_spans.begin(), req.half_spans.end()) != req.half_spans.end()) {
    throw DomainError("half spans must be strictly increasing");
  }
  int needed = 1;
  for (const CorrectionSpec& c : req.corrections) {
    if (c.terms < 0) throw DomainError("negative correction term count");
    if (c.kind == CorrectionKind::kTheorem1 && !req.window.is_cosine()) {
      throw UnsupportedWindow("the closed-form correction needs a cosine window");
    }
    if (c.kind != CorrectionKind::kNone) needed = std::max(needed, c.terms + 1);
  }
  ExtractionConfig config = req.extraction;
  config.max_terms = needed;
  config.validate();

  const std::size_t n_t = req.half_spans.size();
  const std::size_t n_c = req.corrections.size();
  std::vector<ConvergenceRun> runs(n_c);
  for (std::size_t c = 0; c < n_c; ++c) {
    ConvergenceRun& run = runs[c];
    run.target = req.target.name;
    run.window = req.window;
    run.correction = req.corrections[c];
    run.step = req.step;
    run.errors.assign(n_t, std::numeric_limits<double>::quiet_NaN());
    run.estimates.assign(n_t, std::numeric_limits<double>::quiet_NaN());
    run.terms_used.assign(n_t, 0);
    run.skipped.assign(n_t, 0);
  }

  parallel_for(n_t, req.threads, [&](std::size_t i) {
    const double t_half = req.half_spans[i];
    Decomposition d;
    try {
      const SampledSignal s = req.target.sample(t_half, req.step);
      const InnerProductSpace space = InnerProductSpace::for_signal(s, req.window);
      d = decompose(space, s.samples(), config);
    } catch (const std::exception&) {
      return;  // recorded as NaN
    }
    if (d.terms.empty()) return;
    for (std::size_t c = 0; c < n_c; ++c) {
      const CorrectionSpec& spec = req.corrections[c];
      CorrectionInput in;
      in.leading = d.terms.front();
      in.window = req.window;
      in.half_span = d.half_span;
      const std::size_t avail = d.terms.size() - 1;
      const std::size_t used = std::min<std::size_t>(avail, static_cast<std::size_t>(spec.terms));
      in.perturbers.assign(d.terms.begin() + 1, d.terms.begin() + 1 + static_cast<long>(used));
      double nu = in.leading.freq;
      std::size_t skipped = 0;
      if (spec.kind == CorrectionKind::kTheorem1) {
        const Correction r = correct_theorem1(in);
        nu = r.nu;
        skipped = r.skipped;
      } else if (spec.kind == CorrectionKind::kTheorem2) {
        const Correction r = correct_theorem2(in);
        nu = r.nu;
        skipped = r.skipped;
      }
      ConvergenceRun& run = runs[c];
      run.estimates[i] = nu;
      run.errors[i] = std::fabs(req.target.exact_freq - nu);
      run.terms_used[i] = spec.kind == CorrectionKind::kNone ? 0 : used;
      run.skipped[i] = skipped;
    }
  });
  for (ConvergenceRun& run : runs) run.t_points = req.half_spans;
  return runs;
}

struct SlopeFit {
  double slope;
  double intercept;
  std::size_t points;
};

/// Least squares on (log10(T/2pi), log10 err), keeping floor < err < ceiling.
inline SlopeFit fit_slope(std::span<const double> t_points, std::span<const double> errors,
                          double floor = 1e-15,
                          double ceiling = std::numeric_limits<double>::infinity()) {
  if (t_points.size() != errors.size()) throw DomainError("t_points and errors differ in length");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double e = errors[i];
    if (!std::isfinite(e) || !(e >= floor) || !(e <= ceiling) || e <= 0.0) continue;
    xs.push_back(std::log10(t_points[i] / kTwoPi));
    ys.push_back(std::log10(e));
  }
  if (xs.size() < 5) {
    throw InsufficientData("slope fit needs at least 5 usable points, got " +
                           std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientData("slope fit needs distinct T values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, xs.size()};
}

inline SlopeFit fit_slope(const ConvergenceRun& run, double floor = 1e-15,
                          double ceiling = std::numeric_limits<double>::infinity()) {
  return fit_slope(run.t_points, run.errors, floor, ceiling);
}

// ---------------------------------------------------------------------------
// Tables

struct Table1Options {
  bool quick = false;
  int points = 25;
  double span_lo = 0.0;  // T/2pi range; 0 picks the default for the mode
  double span_hi = 0.0;
  double step = kDefaultBenchStep;
  int threads = 1;
};

struct Table1Cell {
  std::optional<double> slope;  // empty: not computed or not enough data
  std::size_t points = 0;
};

struct Table1Row {
  WeightWindow window = WeightWindow::cosine(0);
  // a_0, a_10, a_50, a'_50, b_0, b_50, b'_50
  Table1Cell cells[7];
};

inline constexpr const char* kTable1Columns[7] = {"a_0",  "a_10", "a_50", "a'_50",
                                                  "b_0",  "b_50", "b'_50"};

struct Table1 {
  std::vector<Table1Row> rows;
  std::vector<ConvergenceRun> runs;
  double span_lo = 0.0;
  double span_hi = 0.0;
  Table1Options options;
};

/// Orders p >= 3 on F1 reach the rounding floor early; their fits keep
/// only errors above this.
inline constexpr double kSaturationFloor = 1e-13;

inline Table1Cell fit_cell(const ConvergenceRun& run, double floor) {
  try {
    const SlopeFit f = fit_slope(run, floor);
    return {f.slope, f.points};
  } catch (const InsufficientData&) {
    return {};
  }
}

inline Table1 table1(const Table1Options& opt = {}) {
  Table1 out;
  out.options = opt;
  out.span_lo = opt.span_lo > 0.0 ? opt.span_lo : kSpanLo;
  out.span_hi = opt.span_hi > 0.0 ? opt.span_hi : (opt.quick ? kSpanHiQuick : kSpanHiFull);
  const std::vector<double> spans = log_spaced_spans(out.span_lo, out.span_hi, opt.points);

  std::vector<WeightWindow> windows;
  const int max_p = opt.quick ? 2 : 5;
  for (int p = 0; p <= max_p; ++p) windows.push_back(WeightWindow::cosine(p));
  if (!opt.quick) windows.push_back(WeightWindow::exponential());

  for (const WeightWindow& w : windows) {
    Table1Row row;
    row.window = w;
    for (int which = 0; which < 2; ++which) {
      ConvergenceRequest req;
      req.target = which == 0 ? BenchTarget::f1() : BenchTarget::f2();
      req.window = w;
      req.half_spans = spans;
      req.step = opt.step;
      req.threads = opt.threads;
      if (w.is_cosine()) {
        if (which == 0) {
          req.corrections = {{CorrectionKind::kNone, 0},
                             {CorrectionKind::kTheorem1, 10},
                             {CorrectionKind::kTheorem1, 50},
                             {CorrectionKind::kTheorem2, 50}};
        } else {
          req.corrections = {{CorrectionKind::kNone, 0},
                             {CorrectionKind::kTheorem1, 50},
                             {CorrectionKind::kTheorem2, 50}};
        }
      } else {
        req.corrections = {{CorrectionKind::kNone, 0}};
      }
      const std::vector<ConvergenceRun> runs = run_convergence(req);
      const double floor =
          (which == 0 && w.is_cosine() && w.order() >= 3) ? kSaturationFloor : 1e-15;
      const int base = which == 0 ? 0 : 4;
      for (std::size_t c = 0; c < runs.size(); ++c) {
        row.cells[base + static_cast<int>(c)] = fit_cell(runs[c], floor);
      }
      out.runs.insert(out.runs.end(), runs.begin(), runs.end());
    }
    out.rows.push_back(row);
  }
  return out;
}

struct Table2Row {
  double nu0_over_pi;
  double nu_over_pi;
  double diff_over_pi;
};

/// Single tones just around the Nyquist frequency, h = 1, span [-1000, 1000].
inline std::vector<Table2Row> table2() {
  const WeightWindow window = WeightWindow::cosine(1);
  ExtractionConfig config;
  config.max_terms = 1;
  std::vector<Table2Row> rows;
  for (int i = 0; i < 20; ++i) {
    const double ratio = (990.0 + i) / 1000.0;
    const double nu0 = ratio * kPi;
    const QPModel tone({{nu0, 1.0}});
    const SampledSignal s = sample_model(tone, 1000.0, 1.0);
    const Decomposition d = decompose(InnerProductSpace::for_signal(s, window), s.samples(), config);
    if (d.terms.empty()) throw RefinementEdge("table2: no term extracted");
    const double nu = d.terms.front().freq;
    rows.push_back({ratio, nu / kPi, (nu0 - nu) / kPi});
  }
  return rows;
}

struct Table3Row {
  double nu0_over_pi;
  double nu_over_pi;
  double nu_prime_over_pi;  // aliased frequency from step h'
  double nu_prime_h_over_pi;  // the same scaled by h' (turns per step)
  double nu_final_over_pi;
  std::int64_t k;
  double k_residue;
};

inline std::vector<double> table3_frequencies() {
  std::vector<double> out;
  for (int i = 1; i <= 10; ++i) out.push_back(0.5 * i);
  for (int i = 0; i <= 20; ++i) out.push_back(990.0 + 0.5 * i);
  for (int i = 1; i <= 6; ++i) out.push_back(1000.0 + 0.5 * i);
  return out;
}

/// Tones reconstructed from steps h = 1 and h' = 1.001 over [-1000, 1000].
inline std::vector<Table3Row> table3(int threads = 1) {
  const std::vector<double> freqs = table3_frequencies();
  const double h = 1.0;
  const double h_prime = 1.001;
  const WeightWindow window = WeightWindow::cosine(1);
  ExtractionConfig config;
  config.max_terms = 1;
  std::vector<Table3Row> rows(freqs.size());
  parallel_for(freqs.size(), threads, [&](std::size_t i) {
    const double nu0 = freqs[i] * kPi;
    const QPModel tone({{nu0, 1.0}});
    const SampledSignal a = sample_model(tone, 1000.0, h);
    const SampledSignal b = sample_model(tone, 1000.0, h_prime);
    const DualAnalysis dual = analyze_dual(a, b, window, config);
    if (dual.terms.empty() || !dual.terms.front().k) {
      throw InconsistentMeasurement("table3: tone at " + std::to_string(freqs[i]) +
                                    " pi not reconstructed");
    }
    const DualTerm& t = dual.terms.front();
    rows[i] = {freqs[i],          2.0 * t.nu,  2.0 * t.nu_prime, 2.0 * t.nu_prime * h_prime,
               2.0 * t.nu0,       *t.k,        t.k_residue};
  });
  return rows;
}

}  // namespace naff
