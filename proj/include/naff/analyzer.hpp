#pragma once

// Frequency analysis core: the windowed inner product on [-T, T], the
// correlation peak (coarse FFT search + Newton refinement), and iterative
// extraction of quasiperiodic terms with Gram-Schmidt orthogonalization.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "naff/error.hpp"
#include "naff/fft.hpp"
#include "naff/numeric.hpp"
#include "naff/qpsignal.hpp"
#include "naff/windows.hpp"

namespace naff {

/// Symmetric grid t_n = n h, |n| <= M, with normalized window weights.
class InnerProductSpace {
 public:
  InnerProductSpace(double step, std::size_t half_count, WeightWindow window)
      : step_(step), half_count_(half_count), window_(window) {
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("sampling step must be positive");
    if (half_count < SampledSignal::kMinHalfCount) {
      throw DomainError("grid needs at least 8 steps per half span");
    }
    // Trapezoid rule times chi(t/T); the common factor h drops out in the rescale.
    half_weights_.resize(half_count + 1);
    const double m = static_cast<double>(half_count);
    CompensatedSum total;
    for (std::size_t n = 0; n <= half_count; ++n) {
      double w = chi(window, static_cast<double>(n) / m);
      if (n == half_count) w *= 0.5;
      half_weights_[n] = w;
      total.add(n == 0 ? w : 2.0 * w);
    }
    const double sum = total.value();
    for (double& w : half_weights_) w /= sum;
  }

  static InnerProductSpace for_signal(const SampledSignal& s, WeightWindow window) {
    return {s.step(), s.half_count(), window};
  }

  double step() const { return step_; }
  std::size_t half_count() const { return half_count_; }
  double half_span() const { return static_cast<double>(half_count_) * step_; }
  std::size_t size() const { return 2 * half_count_ + 1; }
  double time(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(half_count_)) * step_;
  }
  const WeightWindow& window() const { return window_; }
  /// 2 pi / T
  double resolution() const { return kTwoPi / half_span(); }

  /// Weight at sample index j (0..2M).
  double weight(std::size_t j) const {
    return half_weights_[j >= half_count_ ? j - half_count_ : half_count_ - j];
  }
  /// Weights for |n| = 0..M.
  std::span<const double> half_weights() const { return half_weights_; }

  void check(std::span<const Complex> f) const {
    if (f.size() != size()) throw DomainError("signal length does not match the grid");
  }

 private:
  double step_;
  std::size_t half_count_;
  WeightWindow window_;
  std::vector<double> half_weights_;
};

namespace detail {

inline constexpr std::size_t kToneBlock = 64;

// Calls visit(n, e) for n = 0..M with e = exp(i nu n h). Within a block of
// 64 samples the phasor is a product of a block base and a per-offset table,
// each evaluated directly, so no error accumulates along the grid.
template <typename Visit>
void for_each_phasor(double nu, double h, std::size_t half_count, Visit&& visit) {
  Complex table[kToneBlock];
  for (std::size_t k = 0; k < kToneBlock; ++k) {
    table[k] = phasor(nu, static_cast<double>(k) * h);
  }
  for (std::size_t n0 = 0; n0 <= half_count; n0 += kToneBlock) {
    const Complex base = phasor(nu, static_cast<double>(n0) * h);
    const std::size_t len = std::min(kToneBlock, half_count + 1 - n0);
    const double br = base.real();
    const double bi = base.imag();
    for (std::size_t k = 0; k < len; ++k) {
      const double tr = table[k].real();
      const double ti = table[k].imag();
      visit(n0 + k, Complex(br * tr - bi * ti, br * ti + bi * tr));
    }
  }
}

struct CorrelationJet {
  Complex psi;  // sum w f e^{-i sigma t}
  Complex d1;   // d psi / d(sigma T)
  Complex d2;   // d^2 psi / d(sigma T)^2
};

inline CorrelationJet correlation_jet(const InnerProductSpace& space,
                                      std::span<const Complex> f, double sigma) {
  const std::size_t m = space.half_count();
  const std::span<const double> w = space.half_weights();
  const double inv_m = 1.0 / static_cast<double>(m);
  CompensatedSum s0r, s0i, s1r, s1i, s2r, s2i;
  double b0r = 0, b0i = 0, b1r = 0, b1i = 0, b2r = 0, b2i = 0;
  for_each_phasor(sigma, space.step(), m, [&](std::size_t n, Complex e) {
    const double er = e.real();
    const double ei = e.imag();
    if (n == 0) {
      b0r += w[0] * f[m].real();
      b0i += w[0] * f[m].imag();
    } else {
      // a = f(t) e^{-i sigma t}, b = f(-t) e^{+i sigma t}
      const Complex fp = f[m + n];
      const Complex fm = f[m - n];
      const double ar = fp.real() * er + fp.imag() * ei;
      const double ai = fp.imag() * er - fp.real() * ei;
      const double cr = fm.real() * er - fm.imag() * ei;
      const double ci = fm.imag() * er + fm.real() * ei;
      const double tau = static_cast<double>(n) * inv_m;
      const double sr = w[n] * (ar + cr);
      const double si = w[n] * (ai + ci);
      const double dr = w[n] * tau * (ar - cr);
      const double di = w[n] * tau * (ai - ci);
      b0r += sr;
      b0i += si;
      // -i tau (a - b)
      b1r += di;
      b1i -= dr;
      // -tau^2 (a + b)
      b2r -= tau * tau * sr;
      b2i -= tau * tau * si;
    }
    if ((n + 1) % kToneBlock == 0 || n == m) {
      s0r.add(b0r), s0i.add(b0i), s1r.add(b1r), s1i.add(b1i), s2r.add(b2r), s2i.add(b2i);
      b0r = b0i = b1r = b1i = b2r = b2i = 0.0;
    }
  });
  return {{s0r.value(), s0i.value()}, {s1r.value(), s1i.value()}, {s2r.value(), s2i.value()}};
}

/// sum_j w_j cos(delta t_j) = <e^{i a t}, e^{i b t}> for a - b = delta.
inline double tone_overlap(const InnerProductSpace& space, double delta) {
  const std::span<const double> w = space.half_weights();
  const std::size_t m = space.half_count();
  CompensatedSum total;
  double block = 0.0;
  for_each_phasor(delta, space.step(), m, [&](std::size_t n, Complex e) {
    block += (n == 0 ? 1.0 : 2.0) * w[n] * e.real();
    if ((n + 1) % kToneBlock == 0 || n == m) {
      total.add(block);
      block = 0.0;
    }
  });
  return total.value();
}

/// out[j] += sum_q coefs[q] exp(i freqs[q] t_j) over the full grid, one pass.
inline void add_tones(const InnerProductSpace& space, std::span<const double> freqs,
                      std::span<const Complex> coefs, std::span<Complex> out) {
  const std::size_t m = space.half_count();
  const double h = space.step();
  const std::size_t count = freqs.size();
  // table[k * count + q] = exp(i freqs[q] k h)
  std::vector<double> tab_re(kToneBlock * count);
  std::vector<double> tab_im(kToneBlock * count);
  for (std::size_t q = 0; q < count; ++q) {
    for (std::size_t k = 0; k < kToneBlock; ++k) {
      const Complex e = phasor(freqs[q], static_cast<double>(k) * h);
      tab_re[k * count + q] = e.real();
      tab_im[k * count + q] = e.imag();
    }
  }
  // coef * base and coef * conj(base) per block
  std::vector<double> pr(count), pi(count), qr(count), qi(count);
  for (std::size_t n0 = 0; n0 <= m; n0 += kToneBlock) {
    for (std::size_t q = 0; q < count; ++q) {
      const Complex base = phasor(freqs[q], static_cast<double>(n0) * h);
      const Complex p = coefs[q] * base;
      const Complex c = coefs[q] * std::conj(base);
      pr[q] = p.real(), pi[q] = p.imag(), qr[q] = c.real(), qi[q] = c.imag();
    }
    const std::size_t len = std::min(kToneBlock, m + 1 - n0);
    for (std::size_t k = 0; k < len; ++k) {
      const double* tr = &tab_re[k * count];
      const double* ti = &tab_im[k * count];
      double sr = 0.0, si = 0.0, mr = 0.0, mi = 0.0;
      for (std::size_t q = 0; q < count; ++q) {
        sr += pr[q] * tr[q] - pi[q] * ti[q];
        si += pr[q] * ti[q] + pi[q] * tr[q];
        mr += qr[q] * tr[q] + qi[q] * ti[q];
        mi += qi[q] * tr[q] - qr[q] * ti[q];
      }
      const std::size_t n = n0 + k;
      out[m + n] += Complex(sr, si);
      if (n != 0) out[m - n] += Complex(mr, mi);
    }
  }
}

}  // namespace detail

/// sum_j w_j f_j conj(g_j).
inline Complex inner_product(const InnerProductSpace& space, std::span<const Complex> f,
                             std::span<const Complex> g) {
  space.check(f);
  space.check(g);
  CompensatedSum re;
  CompensatedSum im;
  double br = 0.0;
  double bi = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double w = space.weight(j);
    const double fr = f[j].real();
    const double fi = f[j].imag();
    const double gr = g[j].real();
    const double gi = g[j].imag();
    br += w * (fr * gr + fi * gi);
    bi += w * (fi * gr - fr * gi);
    if ((j + 1) % detail::kToneBlock == 0 || j + 1 == f.size()) {
      re.add(br);
      im.add(bi);
      br = bi = 0.0;
    }
  }
  return {re.value(), im.value()};
}

inline double residual_norm(const InnerProductSpace& space, std::span<const Complex> f) {
  return std::sqrt(std::max(0.0, inner_product(space, f, f).real()));
}

/// <f, e^{i sigma t}>
inline Complex correlation(const InnerProductSpace& space, std::span<const Complex> f,
                           double sigma) {
  space.check(f);
  return detail::correlation_jet(space, f, sigma).psi;
}

struct CoarsePeak {
  double sigma;
  double bin_width;  // spacing of the zero-padded transform
};

/// Largest bin of the zero-padded windowed DFT over (-pi/h, pi/h].
inline CoarsePeak coarse_peak_bin(const InnerProductSpace& space, std::span<const Complex> f,
                                  int oversample = 4) {
  space.check(f);
  if (oversample < 1) throw DomainError("fft oversample must be >= 1");
  const std::size_t n = f.size();
  const std::size_t len = fft::good_size(n * static_cast<std::size_t>(oversample));
  fft::Buffer buf(len);
  bool nonzero = false;
  for (std::size_t j = 0; j < n; ++j) {
    buf[j] = space.weight(j) * f[j];
    nonzero = nonzero || f[j] != Complex{};
  }
  if (!nonzero) throw EmptyResidual();
  for (std::size_t j = n; j < len; ++j) buf[j] = Complex{};
  fft::forward(buf);

  const double bin = kTwoPi / (static_cast<double>(len) * space.step());
  auto freq_of = [len, bin](std::size_t k) {
    // k <= len/2 maps to non-negative frequencies; len/2 itself is +pi/h.
    return k <= len / 2 ? static_cast<double>(k) * bin
                        : -static_cast<double>(len - k) * bin;
  };
  std::size_t best = 0;
  double best_mag = std::norm(buf[0]);
  for (std::size_t k = 1; k < len; ++k) {
    const double mag = std::norm(buf[k]);
    if (mag > best_mag) {
      best = k;
      best_mag = mag;
    } else if (mag == best_mag) {
      const double a = std::fabs(freq_of(k));
      const double b = std::fabs(freq_of(best));
      if (a < b || (a == b && freq_of(k) > 0.0)) best = k;
    }
  }
  return {freq_of(best), bin};
}

inline double coarse_peak(const InnerProductSpace& space, std::span<const Complex> f,
                          int oversample = 4) {
  return coarse_peak_bin(space, f, oversample).sigma;
}

struct PeakRefinement {
  double nu;
  Complex value;   // correlation at nu
  bool edge;       // no interior maximum in the bracket
  int iterations;
};

/// Maximizes |psi(sigma)|^2 on [sigma0 - width, sigma0 + width] by Newton
/// iteration on its derivative, safeguarded by bisection.
inline PeakRefinement refine_peak_in(const InnerProductSpace& space, std::span<const Complex> f,
                                     double sigma0, double width, double tol = 1e-14) {
  space.check(f);
  const double t_half = space.half_span();
  auto slope = [t_half](const detail::CorrelationJet& j) {
    // P = |psi|^2; derivatives with respect to sigma
    const double g = 2.0 * t_half * (j.d1.real() * j.psi.real() + j.d1.imag() * j.psi.imag());
    const double gp = 2.0 * t_half * t_half *
                      (j.d2.real() * j.psi.real() + j.d2.imag() * j.psi.imag() + std::norm(j.d1));
    return std::pair{g, gp};
  };

  double lo = sigma0 - width;
  double hi = sigma0 + width;
  const auto jet_lo = detail::correlation_jet(space, f, lo);
  const auto jet_hi = detail::correlation_jet(space, f, hi);
  const double g_lo = slope(jet_lo).first;
  const double g_hi = slope(jet_hi).first;
  if (!(g_lo > 0.0) || !(g_hi < 0.0)) {
    const bool low_wins = std::norm(jet_lo.psi) >= std::norm(jet_hi.psi);
    return {low_wins ? lo : hi, low_wins ? jet_lo.psi : jet_hi.psi, true, 0};
  }

  double x = sigma0;
  double step_old = hi - lo;
  double step = step_old;
  detail::CorrelationJet jet{};
  int iter = 0;
  for (; iter < 200; ++iter) {
    jet = detail::correlation_jet(space, f, x);
    const auto [g, gp] = slope(jet);
    if (g > 0.0) {
      lo = x;
    } else if (g < 0.0) {
      hi = x;
    } else {
      break;
    }
    const double threshold = std::max(tol * std::max(1.0, std::fabs(x)) * space.resolution(),
                                      2.0 * std::numeric_limits<double>::epsilon() * std::fabs(x));
    double next;
    const bool newton_ok = gp < 0.0 && std::fabs(2.0 * g) < std::fabs(step_old * gp);
    step_old = step;
    if (newton_ok) {
      next = x - g / gp;
      if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    step = next - x;
    x = next;
    if (std::fabs(step) <= threshold || hi - lo <= threshold) {
      jet = detail::correlation_jet(space, f, x);
      ++iter;
      break;
    }
  }
  return {x, jet.psi, false, iter};
}

/// Angular frequency folded into (-pi/h, pi/h].
inline double wrap_to_band(double sigma, double h) {
  const double nyquist = kPi / h;
  if (sigma > nyquist) return sigma - 2.0 * nyquist;
  if (sigma <= -nyquist) return sigma + 2.0 * nyquist;
  return sigma;
}

/// One bracket of one coarse bin; widened once (to three bins) on an edge result.
inline PeakRefinement refine_peak(const InnerProductSpace& space, std::span<const Complex> f,
                                  double sigma0, double bin_width, double tol = 1e-14) {
  PeakRefinement r = refine_peak_in(space, f, sigma0, bin_width, tol);
  if (r.edge) {
    r = refine_peak_in(space, f, sigma0, 3.0 * bin_width, tol);
    if (r.edge) throw RefinementEdge("no interior correlation maximum near the coarse peak");
  }
  r.nu = wrap_to_band(r.nu, space.step());
  return r;
}

struct ExtractionConfig {
  int max_terms = 50;
  double amp_floor = 1e-10;       // relative to the leading amplitude
  double min_separation = 1.0;    // in units of 2 pi / T
  double refine_tol = 1e-14;
  int fft_oversample = 4;

  void validate() const {
    if (max_terms < 1) throw DomainError("max_terms must be >= 1");
    if (!(amp_floor >= 0.0 && amp_floor < 1.0)) throw DomainError("amp_floor must be in [0, 1)");
    if (!(min_separation > 0.0)) throw DomainError("min_separation must be positive");
    if (!(refine_tol > 0.0)) throw DomainError("refine_tol must be positive");
    if (fft_oversample < 1) throw DomainError("fft_oversample must be >= 1");
  }
};

enum class StopReason {
  kMaxTerms,
  kAmplitudeFloor,
  kResolutionLimit,
  kBasisDegenerate,
  kEmptyResidual,
  kRefinementFailed,
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kMaxTerms: return "max terms";
    case StopReason::kAmplitudeFloor: return "amplitude floor";
    case StopReason::kResolutionLimit: return "resolution limit";
    case StopReason::kBasisDegenerate: return "basis degenerate";
    case StopReason::kEmptyResidual: return "empty residual";
    case StopReason::kRefinementFailed: return "refinement failed";
  }
  return "unknown";
}

struct Decomposition {
  std::vector<QPTerm> terms;            // raw-tone amplitudes, extraction order
  std::vector<double> residual_norms;   // ||f_0||, ||f_1||, ...
  std::vector<double> ortho_diag;       // max_k |<e_n, e'_k>| per step
  std::vector<Complex> projections;     // <f_{n-1}, e'_n>
  std::vector<Complex> peak_values;     // <f_{n-1}, e_n>
  std::vector<double> basis_norms;      // ||e~_n||
  // e'_n = sum_{m <= n} basis[n][m] e_m
  std::vector<std::vector<Complex>> basis;
  std::vector<Complex> residual;
  StopReason status = StopReason::kMaxTerms;
  double step = 0.0;
  double half_span = 0.0;
  WeightWindow window = WeightWindow::cosine(0);

  std::vector<double> frequencies() const {
    std::vector<double> out;
    out.reserve(terms.size());
    for (const QPTerm& t : terms) out.push_back(t.freq);
    return out;
  }
};

/// Samples of e'_n from its tone coordinates.
inline std::vector<Complex> basis_samples(const InnerProductSpace& space,
                                          std::span<const double> freqs,
                                          std::span<const Complex> coords) {
  std::vector<Complex> out(space.size());
  detail::add_tones(space, freqs.first(coords.size()), coords, out);
  return out;
}

inline Decomposition decompose(const InnerProductSpace& space, std::span<const Complex> f,
                               const ExtractionConfig& config = {}) {
  config.validate();
  space.check(f);

  Decomposition d;
  d.step = space.step();
  d.half_span = space.half_span();
  d.window = space.window();
  d.residual.assign(f.begin(), f.end());
  d.residual_norms.push_back(residual_norm(space, d.residual));

  std::vector<double> freqs;
  std::vector<std::vector<double>> gram;  // gram[n][m] = <e_n, e_m>, m <= n
  const double min_gap = config.min_separation * space.resolution();

  auto project = [&](std::span<const Complex> coords, std::size_t k) {
    // <sum_m coords_m e_m, e'_k>, all tones real-overlapping
    Complex sum{};
    for (std::size_t m = 0; m < coords.size(); ++m) {
      if (coords[m] == Complex{}) continue;
      for (std::size_t l = 0; l <= k; ++l) {
        const double g = m >= l ? gram[m][l] : gram[l][m];
        sum += coords[m] * std::conj(d.basis[k][l]) * g;
      }
    }
    return sum;
  };
  auto norm2 = [&gram](std::span<const Complex> coords) {
    double sum = 0.0;
    for (std::size_t m = 0; m < coords.size(); ++m) {
      for (std::size_t l = 0; l < coords.size(); ++l) {
        const double g = m >= l ? gram[m][l] : gram[l][m];
        sum += (coords[m] * std::conj(coords[l])).real() * g;
      }
    }
    return sum;
  };

  while (static_cast<int>(freqs.size()) < config.max_terms) {
    if (d.residual_norms.back() == 0.0) {
      d.status = StopReason::kEmptyResidual;
      break;
    }
    PeakRefinement peak{};
    try {
      const CoarsePeak coarse = coarse_peak_bin(space, d.residual, config.fft_oversample);
      peak = refine_peak(space, d.residual, coarse.sigma, coarse.bin_width, config.refine_tol);
    } catch (const EmptyResidual&) {
      d.status = StopReason::kEmptyResidual;
      break;
    } catch (const RefinementEdge&) {
      d.status = StopReason::kRefinementFailed;
      break;
    }
    const double nu = peak.nu;

    bool too_close = false;
    for (double accepted : freqs) too_close = too_close || std::fabs(nu - accepted) < min_gap;
    if (too_close) {
      d.status = StopReason::kResolutionLimit;
      break;
    }
    if (!d.projections.empty() &&
        std::abs(peak.value) < config.amp_floor * std::abs(d.projections.front())) {
      d.status = StopReason::kAmplitudeFloor;
      break;
    }

    const std::size_t n = freqs.size();
    std::vector<double> row(n + 1);
    for (std::size_t m = 0; m < n; ++m) row[m] = detail::tone_overlap(space, nu - freqs[m]);
    row[n] = detail::tone_overlap(space, 0.0);
    freqs.push_back(nu);
    gram.push_back(std::move(row));

    // Modified Gram-Schmidt in tone coordinates, with one re-orthogonalization pass.
    std::vector<Complex> v(n + 1);
    v[n] = 1.0;
    double overlap = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < n; ++k) {
        const Complex c = project(v, k);
        if (pass == 0) overlap = std::max(overlap, std::abs(c));
        for (std::size_t l = 0; l <= k; ++l) v[l] -= c * d.basis[k][l];
      }
    }
    const double norm = std::sqrt(std::max(0.0, norm2(v)));
    if (norm < 1e-6) {
      freqs.pop_back();
      gram.pop_back();
      d.status = StopReason::kBasisDegenerate;
      break;
    }
    for (Complex& c : v) c /= norm;

    const std::vector<Complex> e = basis_samples(space, freqs, v);
    const Complex c = inner_product(space, d.residual, e);
    for (std::size_t j = 0; j < e.size(); ++j) d.residual[j] -= c * e[j];

    d.basis.push_back(std::move(v));
    d.basis_norms.push_back(norm);
    d.projections.push_back(c);
    d.peak_values.push_back(peak.value);
    d.ortho_diag.push_back(overlap);
    d.residual_norms.push_back(residual_norm(space, d.residual));
  }

  // Raw amplitudes: A_m = sum_{n >= m} c_n basis[n][m].
  const std::size_t count = freqs.size();
  d.terms.resize(count);
  for (std::size_t m = 0; m < count; ++m) {
    Complex a{};
    for (std::size_t n = m; n < count; ++n) a += d.projections[n] * d.basis[n][m];
    d.terms[m] = {freqs[m], a};
  }
  return d;
}

}  // namespace naff
