#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "gridopt/errors.hpp"
#include "gridopt/kernel_table.hpp"

namespace gridopt {

// Natural cubic spline through the kernel table, used to evaluate C at
// arbitrary offsets during gridding. The real and imaginary parts are
// splined independently; a complex spline is the same thing since the
// construction is linear in the data. The end pieces extend to +-W and the
// kernel is zero beyond.
class KernelLookup {
 public:
  explicit KernelLookup(const KernelTable& kernel)
      : W_(kernel.W()), h_(kernel.spacing()), first_(kernel.node(0)),
        values_(kernel.samples().begin(), kernel.samples().end()), second_(values_.size(), 0.0) {
    detail::require(kernel.D() >= 4, "build_lookup: need D >= 4 for a cubic spline");
    solve_second_derivatives();
  }

  int W() const { return W_; }

  cplx operator()(double nu) const {
    if (!(std::abs(nu) <= W_)) return 0.0;
    const double s = (nu - first_) / h_;
    const auto last = static_cast<long>(values_.size()) - 2;
    long i = static_cast<long>(std::floor(s));
    if (i < 0) i = 0;
    if (i > last) i = last;
    const double t = s - static_cast<double>(i);
    const double u = 1.0 - t;
    const auto k = static_cast<std::size_t>(i);
    return u * values_[k] + t * values_[k + 1] +
           (h_ * h_ / 6.0) * ((u * u * u - u) * second_[k] + (t * t * t - t) * second_[k + 1]);
  }

 private:
  // Thomas algorithm on M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / h^2
  // with M_0 = M_{n-1} = 0.
  void solve_second_derivatives() {
    const std::size_t n = values_.size();
    if (n < 3) return;
    const std::size_t inner = n - 2;
    std::vector<double> cprime(inner);
    std::vector<cplx> dprime(inner);
    const double scale = 6.0 / (h_ * h_);
    for (std::size_t j = 0; j < inner; ++j) {
      const std::size_t i = j + 1;
      cplx rhs = scale * (values_[i + 1] - 2.0 * values_[i] + values_[i - 1]);
      double denom = 4.0 - (j ? cprime[j - 1] : 0.0);
      cprime[j] = 1.0 / denom;
      dprime[j] = (rhs - (j ? dprime[j - 1] : 0.0)) / denom;
    }
    for (std::size_t j = inner; j-- > 0;) {
      second_[j + 1] = dprime[j] - (j + 1 < inner ? cprime[j] * second_[j + 2] : 0.0);
    }
  }

  int W_;
  double h_;
  double first_;
  std::vector<cplx> values_;
  std::vector<cplx> second_;
};

inline KernelLookup build_lookup(const KernelTable& kernel) { return KernelLookup(kernel); }

}  // namespace gridopt
