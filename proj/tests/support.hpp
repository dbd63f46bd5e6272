#pragma once

// Shared fixtures for the test suites: kernels with known structure and
// independent reference computations.

#include <cmath>
#include <complex>
#include <vector>

#include "gridopt.hpp"

namespace gridopt::testing {

// exp(1 - 1/(1 - s^2)) on |s| < 1: smooth, compactly supported, peak 1.
inline double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

// bump(nu/W) times a random trigonometric polynomial. Smooth enough that
// the rectangle rule, the spline lookup and the continuous integrals all
// agree to high accuracy at D >= 32.
struct SmoothKernel {
  int W = 1;
  std::vector<cplx> coef;  // for exp(i pi j nu / W), j = -J .. J

  cplx operator()(double nu) const {
    const int J = static_cast<int>(coef.size() / 2);
    cplx acc = 0.0;
    for (int j = -J; j <= J; ++j) acc += coef[static_cast<std::size_t>(j + J)] * std::polar(1.0, pi * j * nu / W);
    return bump(nu / W) * acc;
  }

  KernelTable table(int D) const { return KernelTable::from_function(W, D, *this); }

  static SmoothKernel random(int W, Rng& rng, int J = 2) {
    SmoothKernel k{W, {}};
    for (int j = -J; j <= J; ++j) k.coef.emplace_back(rng.normal(), rng.normal());
    return k;
  }
};

// i.i.d. complex normal samples: rough, but a valid unit-norm kernel.
inline KernelTable random_kernel(int W, int D, Rng& rng) {
  std::vector<cplx> s(static_cast<std::size_t>(2 * W * D));
  for (auto& v : s) v = {rng.normal(), rng.normal()};
  return KernelTable(W, D, std::move(s));
}

// 1 on [-1/2, 1/2], 0 elsewhere in [-1, 1].
inline KernelTable rect_kernel(int D) {
  return KernelTable::from_function(1, D, [](double nu) { return std::abs(nu) <= 0.5 ? 1.0 : 0.0; });
}

// Rectangle-rule transform of the normalized rect kernel: D cell-centred
// unit samples give the Dirichlet kernel sin(pi x) / (D sin(pi x / D)).
inline double rect_dirichlet(double x, int D) {
  if (x == 0.0) return 1.0;
  return std::sin(pi * x) / (D * std::sin(pi * x / D));
}

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x); }

// Naive O(N M) sum dnu sum_n C_n exp(-2 pi i x nu_n / gamma).
inline cplx naive_ft(const KernelTable& k, double x, double gamma) {
  cplx acc = 0.0;
  for (std::size_t n = 0; n < k.size(); ++n) acc += k[n] * std::polar(1.0, -2.0 * pi * x * k.node(n) / gamma);
  return acc * k.spacing();
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace gridopt::testing
