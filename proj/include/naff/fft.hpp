#pragma once

// Thin RAII layer over FFTW3: aligned complex buffers and cached in-place
// forward plans. Plan creation is serialized; execution is thread-safe.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <new>
#include <utility>

namespace naff::fft {

class Buffer {
 public:
  explicit Buffer(std::size_t n) : n_(n) {
    data_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (data_ == nullptr) throw std::bad_alloc();
  }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  Buffer(Buffer&& other) noexcept
      : data_(std::exchange(other.data_, nullptr)), n_(std::exchange(other.n_, 0)) {}
  Buffer& operator=(Buffer&& other) noexcept {
    std::swap(data_, other.data_);
    std::swap(n_, other.n_);
    return *this;
  }
  ~Buffer() {
    if (data_ != nullptr) fftw_free(data_);
  }

  std::size_t size() const { return n_; }
  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(data_); }
  const std::complex<double>* data() const {
    return reinterpret_cast<const std::complex<double>*>(data_);
  }
  std::complex<double>& operator[](std::size_t i) { return data()[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return data()[i]; }
  fftw_complex* raw() { return data_; }

 private:
  fftw_complex* data_ = nullptr;
  std::size_t n_ = 0;
};

/// Smallest n >= target whose prime factors are all in {2, 3, 5, 7}.
inline std::size_t good_size(std::size_t target) {
  if (target <= 1) return 1;
  for (std::size_t n = target;; ++n) {
    std::size_t m = n;
    for (std::size_t p : {2u, 3u, 5u, 7u}) {
      while (m % p == 0) m /= p;
    }
    if (m == 1) return n;
  }
}

namespace detail {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan forward(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    Buffer scratch(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), scratch.raw(), scratch.raw(),
                                      FFTW_FORWARD, FFTW_ESTIMATE);
    if (plan == nullptr) throw std::bad_alloc();
    plans_.emplace(n, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

inline PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace detail

/// In place: X_k = sum_j x_j exp(-2 pi i j k / n).
inline void forward(Buffer& buf) {
  fftw_plan plan = detail::plan_cache().forward(buf.size());
  fftw_execute_dft(plan, buf.raw(), buf.raw());
}

}  // namespace naff::fft
