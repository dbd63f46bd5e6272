#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "gridopt/errors.hpp"
#include "gridopt/kernel_table.hpp"
#include "gridopt/lookup.hpp"
#include "gridopt/spectral.hpp"

namespace gridopt {

// Lambda C(x_m) on x_m = -1/2 + m/M.
struct ErrorShape {
  std::size_t M = 0;
  double gamma = 1.0;
  std::vector<double> values;
};

// Optimal deapodization h*(x_m). Indices where the denominator underflowed
// hold 0 and are listed in `flagged`.
struct DeapodizationTable {
  std::size_t M = 0;
  double gamma = 1.0;
  std::vector<cplx> values;
  std::vector<std::size_t> flagged;
};

struct ErrorShapeResult {
  ErrorShape lambda;
  DeapodizationTable h;
};

inline constexpr double denominator_floor = 1e-300;

// Lambda = 1 - |F|^2 / P and h = conj(F) / P, with F the rectangle-rule
// Fourier transform of the kernel at x/gamma and P its periodized spectral
// density. P is a sum of |F|^2 over aliases, so Lambda lies in [0, 1] up to
// rounding; the result is clamped to that range.
inline ErrorShapeResult lambda_and_h(const KernelTable& kernel, std::size_t M, double gamma) {
  detail::require(M >= 2, "lambda_and_h: M must be >= 2");
  detail::require(gamma >= 1.0, "lambda_and_h: gamma must be >= 1");
  const auto num = kernel_ft_samples(kernel, M, gamma);
  const auto den = periodized_psd(autocorrelation_lags(kernel), M, gamma);
  ErrorShapeResult r{{M, gamma, std::vector<double>(M)}, {M, gamma, std::vector<cplx>(M), {}}};
  for (std::size_t m = 0; m < M; ++m) {
    if (!(den[m] > denominator_floor)) {
      r.lambda.values[m] = 0.0;
      r.h.values[m] = 0.0;
      r.h.flagged.push_back(m);
      continue;
    }
    r.lambda.values[m] = std::clamp(1.0 - std::norm(num[m]) / den[m], 0.0, 1.0);
    r.h.values[m] = std::conj(num[m]) / den[m];
  }
  return r;
}

inline ErrorShape error_shape(const KernelTable& kernel, std::size_t M, double gamma) {
  return lambda_and_h(kernel, M, gamma).lambda;
}

// Modulation by exp(2 pi i x0 nu), which translates Lambda by x0.
inline KernelTable shift_kernel(const KernelTable& kernel, double x0) {
  std::vector<cplx> s(kernel.samples().begin(), kernel.samples().end());
  for (std::size_t n = 0; n < s.size(); ++n) s[n] *= unit_phase(-x0 * kernel.node(n));
  return KernelTable(kernel.W(), kernel.D(), std::move(s));
}

// sum_k C(k - nu) exp(-2 pi i x (k - nu) / gamma) over the integers k with
// |k - nu| <= W.
inline cplx gridding_response(const KernelLookup& lookup, double x, double gamma, double nu) {
  const auto lo = static_cast<long>(std::ceil(nu - lookup.W()));
  const auto hi = static_cast<long>(std::floor(nu + lookup.W()));
  cplx acc = 0.0;
  for (long k = lo; k <= hi; ++k) {
    const double off = static_cast<double>(k) - nu;
    acc += lookup(off) * unit_phase(x * off / gamma);
  }
  return acc;
}

// Midpoint rule for the integral over nu in [0, 1) of
// |1 - h * gridding_response(nu)|^2.
inline double ell_direct(const KernelLookup& lookup, cplx h, double x, double gamma, int quad_points = 4096) {
  detail::require(quad_points >= 2, "ell_direct: quad_points must be >= 2");
  if (h == cplx(0.0)) return 1.0;
  double acc = 0.0;
  for (int j = 0; j < quad_points; ++j) {
    const double nu = (j + 0.5) / quad_points;
    acc += std::norm(1.0 - h * gridding_response(lookup, x, gamma, nu));
  }
  return acc / quad_points;
}

inline double ell_direct(const KernelTable& kernel, cplx h, double x, double gamma, int quad_points = 4096) {
  return ell_direct(KernelLookup(kernel), h, x, gamma, quad_points);
}

// Sample mean of |1 - h * gridding_response(frac(gamma t_n))|^2; times the
// sample count this is theta^2, the squared operator norm of the error map.
inline double empirical_operator_norm_sq(const KernelLookup& lookup, cplx h, double x, double gamma,
                                         std::span<const double> times) {
  detail::require(!times.empty(), "empirical_operator_norm_sq: times must be nonempty");
  double acc = 0.0;
  for (double t : times) {
    const double s = gamma * t;
    const double nu = s - std::floor(s);
    acc += std::norm(1.0 - h * gridding_response(lookup, x, gamma, nu));
  }
  return acc / static_cast<double>(times.size());
}

inline double empirical_operator_norm_sq(const KernelTable& kernel, cplx h, double x, double gamma,
                                         std::span<const double> times) {
  return empirical_operator_norm_sq(KernelLookup(kernel), h, x, gamma, times);
}

}  // namespace gridopt
