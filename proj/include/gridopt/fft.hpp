#pragma once

// Thin FFTW wrapper. Plans are cached per (length, sign) and executed through
// the new-array interface, so one plan serves every aligned buffer of that
// length and concurrent execution is safe.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "gridopt/errors.hpp"

namespace gridopt::fft {

using cplx = std::complex<double>;

enum class Sign : int { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

// fftw-aligned complex array. Move-only.
class Buffer {
 public:
  explicit Buffer(std::size_t n)
      : size_(n), data_(n ? fftw_alloc_complex(n) : nullptr) {
    if (n && !data_) throw std::bad_alloc();
    for (std::size_t i = 0; i < n; ++i) data_[i][0] = data_[i][1] = 0.0;
  }
  ~Buffer() { fftw_free(data_); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  Buffer(Buffer&& o) noexcept : size_(o.size_), data_(std::exchange(o.data_, nullptr)) { o.size_ = 0; }
  Buffer& operator=(Buffer&& o) noexcept {
    std::swap(size_, o.size_);
    std::swap(data_, o.data_);
    return *this;
  }

  std::size_t size() const { return size_; }
  fftw_complex* raw() { return data_; }
  std::span<cplx> view() { return {reinterpret_cast<cplx*>(data_), size_}; }
  cplx& operator[](std::size_t i) { return reinterpret_cast<cplx*>(data_)[i]; }
  const cplx& operator[](std::size_t i) const { return reinterpret_cast<const cplx*>(data_)[i]; }

 private:
  std::size_t size_;
  fftw_complex* data_;
};

namespace detail {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  // In-place plan for the given length; planning is not thread-safe in FFTW,
  // so it happens under the lock.
  fftw_plan get(std::size_t n, Sign sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_pair(n, static_cast<int>(sign));
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    Buffer scratch(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), scratch.raw(), scratch.raw(),
                                   static_cast<int>(sign), FFTW_ESTIMATE);
    if (!p) throw NumericalError("fftw planning failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace detail

// Unnormalized in-place transform: X_k = sum_n x_n exp(sign * 2 pi i nk / n).
inline void transform(Buffer& buf, Sign sign) {
  if (buf.size() == 0) return;
  fftw_plan p = detail::plan_cache().get(buf.size(), sign);
  fftw_execute_dft(p, buf.raw(), buf.raw());
}

inline std::vector<cplx> transform(std::span<const cplx> x, Sign sign) {
  Buffer buf(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i];
  transform(buf, sign);
  auto v = buf.view();
  return {v.begin(), v.end()};
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace gridopt::fft
