#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridopt/errors.hpp"

namespace gridopt {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// sqrt(dnu * sum |s|^2)
inline double weighted_norm(std::span<const cplx> s, double dnu) {
  double acc = 0.0;
  for (const auto& v : s) acc += std::norm(v);
  return std::sqrt(acc * dnu);
}

// Complex samples of a gridding kernel supported on [-W, W], D samples per
// unit. Sample n sits at the cell centre nu_n = -W + (n + 1/2)/D, so the
// table covers the support symmetrically and a rectangle-rule sum is a
// midpoint rule. Always stored with unit dnu-weighted norm.
class KernelTable {
 public:
  KernelTable(int W, int D, std::vector<cplx> samples) : W_(W), D_(D), samples_(std::move(samples)) {
    detail::require(W >= 1, "kernel: W must be >= 1");
    detail::require(D >= 1, "kernel: D must be >= 1");
    detail::require(samples_.size() == static_cast<std::size_t>(2 * W * D),
                    "kernel: expected 2*W*D = " + std::to_string(2 * W * D) + " samples, got " +
                        std::to_string(samples_.size()));
    for (const auto& v : samples_)
      detail::require(std::isfinite(v.real()) && std::isfinite(v.imag()), "kernel: non-finite sample");
    double n = weighted_norm(samples_, spacing());
    if (!(n > 0.0)) throw DegenerateInputError("kernel: all samples are zero");
    for (auto& v : samples_) v /= n;
  }

  template <class F>
  static KernelTable from_function(int W, int D, F&& f) {
    detail::require(W >= 1 && D >= 1, "kernel: W and D must be >= 1");
    std::vector<cplx> s(static_cast<std::size_t>(2 * W * D));
    for (std::size_t n = 0; n < s.size(); ++n) s[n] = cplx(f(node(W, D, n)));
    return KernelTable(W, D, std::move(s));
  }

  static double node(int W, int D, std::size_t n) {
    return -W + (static_cast<double>(n) + 0.5) / D;
  }

  int W() const { return W_; }
  int D() const { return D_; }
  double spacing() const { return 1.0 / D_; }
  std::size_t size() const { return samples_.size(); }
  double node(std::size_t n) const { return node(W_, D_, n); }
  std::span<const cplx> samples() const { return samples_; }
  const cplx& operator[](std::size_t n) const { return samples_[n]; }

  bool operator==(const KernelTable&) const = default;

 private:
  int W_;
  int D_;
  std::vector<cplx> samples_;
};

}  // namespace gridopt
