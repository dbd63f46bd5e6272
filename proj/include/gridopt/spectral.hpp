#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "gridopt/errors.hpp"
#include "gridopt/fft.hpp"
#include "gridopt/kernel_table.hpp"

namespace gridopt {

// x_m = -1/2 + m/M
inline double grid_point(std::size_t m, std::size_t M) {
  return -0.5 + static_cast<double>(m) / static_cast<double>(M);
}

inline std::vector<double> frequency_grid(std::size_t M) {
  std::vector<double> x(M);
  for (std::size_t m = 0; m < M; ++m) x[m] = grid_point(m, M);
  return x;
}

// exp(-2 pi i * turns)
inline cplx unit_phase(double turns) {
  double r = turns - std::round(turns);
  return std::polar(1.0, -2.0 * pi * r);
}

// a(beta) for beta = -(2W-1) .. 2W-1. The lags at +-2W vanish for kernels
// supported in [-W, W] and are not stored.
struct AutocorrLags {
  int W = 0;
  std::vector<cplx> lags;

  int max_lag() const { return 2 * W - 1; }
  const cplx& at(int beta) const { return lags.at(static_cast<std::size_t>(beta + max_lag())); }
};

inline AutocorrLags autocorrelation_lags(const KernelTable& kernel) {
  const int W = kernel.W();
  const int D = kernel.D();
  const auto c = kernel.samples();
  const auto n = static_cast<int>(c.size());
  AutocorrLags out{W, std::vector<cplx>(static_cast<std::size_t>(4 * W - 1))};
  for (int beta = 0; beta <= 2 * W - 1; ++beta) {
    cplx acc = 0.0;
    for (int k = beta * D; k < n; ++k) acc += c[k] * std::conj(c[k - beta * D]);
    acc *= kernel.spacing();
    out.lags[static_cast<std::size_t>(beta + out.max_lag())] = acc;
    out.lags[static_cast<std::size_t>(-beta + out.max_lag())] = std::conj(acc);
  }
  out.lags[static_cast<std::size_t>(out.max_lag())] = out.at(0).real();
  return out;
}

// Chirp Z-transform X_k = sum_n x_n w^(nk), k < m, via Bluestein's identity
// nk = (n^2 + k^2 - (k-n)^2)/2 and one FFT convolution.
inline std::vector<cplx> czt(std::span<const cplx> x, std::size_t m, cplx w) {
  detail::require(m >= 1, "czt: m must be >= 1");
  detail::require(std::abs(std::abs(w) - 1.0) <= 1e-12, "czt: |w| must be 1");
  const std::size_t n = x.size();
  if (n == 0) return std::vector<cplx>(m, 0.0);

  const long double phi = std::arg(w);
  const long double two_pi = 2.0L * static_cast<long double>(pi);
  auto chirp = [&](std::size_t j) {
    long double a = std::fmod(phi * static_cast<long double>(j) * static_cast<long double>(j) / 2.0L, two_pi);
    return std::polar(1.0, static_cast<double>(a));
  };

  const std::size_t len = fft::next_pow2(n + m - 1);
  fft::Buffer a(len), b(len);
  const std::size_t span_len = std::max(n, m);
  std::vector<cplx> c(span_len);
  for (std::size_t j = 0; j < span_len; ++j) c[j] = chirp(j);

  for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * c[j];
  for (std::size_t j = 0; j < m; ++j) b[j] = std::conj(c[j]);
  for (std::size_t j = 1; j < n; ++j) b[len - j] = std::conj(c[j]);

  fft::transform(a, fft::Sign::forward);
  fft::transform(b, fft::Sign::forward);
  for (std::size_t j = 0; j < len; ++j) a[j] *= b[j];
  fft::transform(a, fft::Sign::backward);

  std::vector<cplx> out(m);
  const double scale = 1.0 / static_cast<double>(len);
  for (std::size_t k = 0; k < m; ++k) out[k] = a[k] * scale * c[k];
  return out;
}

// dnu * sum_n C_n exp(-2 pi i x_m nu_n / gamma): the rectangle-rule Fourier
// integral of the kernel at x_m / gamma.
inline std::vector<cplx> kernel_ft_samples(const KernelTable& kernel, std::size_t M, double gamma) {
  detail::require(M >= 1, "kernel_ft_samples: M must be >= 1");
  detail::require(gamma >= 1.0, "kernel_ft_samples: gamma must be >= 1");
  const double D = kernel.D();
  const double dnu = kernel.spacing();
  std::vector<cplx> twisted(kernel.size());
  for (std::size_t n = 0; n < kernel.size(); ++n)
    twisted[n] = kernel[n] * unit_phase(-0.5 * static_cast<double>(n) / (gamma * D));
  auto out = czt(twisted, M, unit_phase(1.0 / (gamma * static_cast<double>(M) * D)));
  const double first_node = kernel.node(0);
  for (std::size_t m = 0; m < M; ++m) out[m] *= dnu * unit_phase(grid_point(m, M) * first_node / gamma);
  return out;
}

// sum_beta a(beta) exp(-2 pi i x_m beta / gamma), the periodized power
// spectral density of the kernel at x_m / gamma.
inline std::vector<double> periodized_psd(const AutocorrLags& lags, std::size_t M, double gamma) {
  detail::require(M >= 1, "periodized_psd: M must be >= 1");
  detail::require(gamma >= 1.0, "periodized_psd: gamma must be >= 1");
  std::vector<double> out(M);
  const int top = lags.max_lag();
  for (std::size_t m = 0; m < M; ++m) {
    const double x = grid_point(m, M);
    cplx acc = 0.0;
    for (int beta = -top; beta <= top; ++beta) acc += lags.at(beta) * unit_phase(x * beta / gamma);
    if (std::abs(acc.imag()) >= 1e-8 * (1.0 + std::abs(acc.real())))
      throw NumericalError("periodized_psd: imaginary residue " + std::to_string(acc.imag()) + " at m = " +
                           std::to_string(m));
    out[m] = acc.real();
  }
  return out;
}

}  // namespace gridopt
