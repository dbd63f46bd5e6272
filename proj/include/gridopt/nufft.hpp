#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "gridopt/error_shape.hpp"
#include "gridopt/errors.hpp"
#include "gridopt/fft.hpp"
#include "gridopt/lookup.hpp"
#include "gridopt/spectral.hpp"

namespace gridopt {

struct NonuniformSignal {
  std::vector<cplx> amplitudes;
  std::vector<double> times;

  std::size_t size() const { return amplitudes.size(); }
  void validate() const {
    detail::require(amplitudes.size() == times.size(), "signal: amplitude and time counts differ");
    for (double t : times) detail::require(std::isfinite(t), "signal: non-finite time");
  }
};

struct Signal2D {
  std::vector<cplx> amplitudes;
  std::vector<double> tx;
  std::vector<double> ty;

  std::size_t size() const { return amplitudes.size(); }
  void validate() const {
    detail::require(amplitudes.size() == tx.size() && tx.size() == ty.size(),
                    "signal2d: amplitude and coordinate counts differ");
    for (std::size_t i = 0; i < tx.size(); ++i)
      detail::require(std::isfinite(tx[i]) && std::isfinite(ty[i]), "signal2d: non-finite coordinate");
  }
};

struct Spectrum {
  std::size_t M = 0;
  std::vector<cplx> values;
};

// Row-major, values[iy * M + ix] at (x_ix, x_iy).
struct Spectrum2D {
  std::size_t M = 0;
  std::vector<cplx> values;

  cplx& at(std::size_t iy, std::size_t ix) { return values[iy * M + ix]; }
  const cplx& at(std::size_t iy, std::size_t ix) const { return values[iy * M + ix]; }
};

inline std::size_t default_grid_len(std::size_t n, double gamma) {
  return static_cast<std::size_t>(std::floor(gamma * static_cast<double>(n)));
}

namespace detail {

inline std::size_t wrap(long k, std::size_t len) {
  const auto n = static_cast<long>(len);
  long r = k % n;
  return static_cast<std::size_t>(r < 0 ? r + n : r);
}

}  // namespace detail

// u*_k = sum_n u_n C(k - gamma t_n), touching only the integers k within W of
// gamma t_n, with k taken modulo grid_len.
inline std::vector<cplx> grid_signal(const NonuniformSignal& signal, const KernelLookup& lookup, double gamma,
                                     std::size_t grid_len) {
  signal.validate();
  detail::require(grid_len >= 1, "grid_signal: grid_len must be >= 1");
  std::vector<cplx> out(grid_len, 0.0);
  const int W = lookup.W();
  for (std::size_t n = 0; n < signal.size(); ++n) {
    const double s = gamma * signal.times[n];
    const auto lo = static_cast<long>(std::ceil(s - W));
    const auto hi = static_cast<long>(std::floor(s + W));
    for (long k = lo; k <= hi; ++k)
      out[detail::wrap(k, grid_len)] += signal.amplitudes[n] * lookup(static_cast<double>(k) - s);
  }
  return out;
}

// sum_k v_k exp(-2 pi i x_m k / gamma) for m < M. When gamma*M is an integer P
// the sum folds modulo P into one length-P FFT; otherwise a chirp Z-transform
// handles the fractional spacing.
inline std::vector<cplx> exponential_sum(std::span<const cplx> v, std::size_t M, double gamma) {
  detail::require(M >= 1, "exponential_sum: M must be >= 1");
  // exp(-2 pi i (-1/2) k / gamma) moves the origin to x = -1/2
  std::vector<cplx> twisted(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) twisted[k] = v[k] * unit_phase(-0.5 * static_cast<double>(k) / gamma);

  const double P_real = gamma * static_cast<double>(M);
  const double P_round = std::round(P_real);
  if (std::abs(P_real - P_round) < 1e-9) {
    const auto P = static_cast<std::size_t>(P_round);
    fft::Buffer buf(P);
    for (std::size_t k = 0; k < twisted.size(); ++k) buf[k % P] += twisted[k];
    fft::transform(buf, fft::Sign::forward);
    std::vector<cplx> out(M);
    for (std::size_t m = 0; m < M; ++m) out[m] = buf[m];
    return out;
  }
  return czt(twisted, M, unit_phase(1.0 / P_real));
}

// Gridding estimate y*(x_m) = h(x_m) sum_k u*_k exp(-2 pi i x_m k / gamma).
// grid_len = 0 selects floor(gamma * N).
inline Spectrum nufft_forward(const NonuniformSignal& signal, const KernelLookup& lookup, const DeapodizationTable& h,
                              std::size_t M, double gamma, std::size_t grid_len = 0) {
  detail::require(h.M == M && h.values.size() == M, "nufft_forward: deapodization grid does not match M");
  detail::require(gamma >= 1.0, "nufft_forward: gamma must be >= 1");
  if (grid_len == 0) grid_len = std::max<std::size_t>(1, default_grid_len(signal.size(), gamma));
  const auto gridded = grid_signal(signal, lookup, gamma, grid_len);
  Spectrum out{M, exponential_sum(gridded, M, gamma)};
  for (std::size_t m = 0; m < M; ++m) out.values[m] *= h.values[m];
  return out;
}

// y(x_m) = sum_n u_n exp(-2 pi i x_m t_n), evaluated term by term.
inline Spectrum nudft_direct(const NonuniformSignal& signal, std::size_t M) {
  signal.validate();
  detail::require(M >= 1, "nudft_direct: M must be >= 1");
  Spectrum out{M, std::vector<cplx>(M, 0.0)};
  for (std::size_t m = 0; m < M; ++m) {
    const double x = grid_point(m, M);
    cplx acc = 0.0;
    for (std::size_t n = 0; n < signal.size(); ++n) acc += signal.amplitudes[n] * unit_phase(x * signal.times[n]);
    out.values[m] = acc;
  }
  return out;
}

// Separable 2D gridding: product kernel C_x(u) C_y(v) onto a grid_len^2
// grid, exponential sums along both axes, then h_x(x) h_y(y).
inline Spectrum2D nufft2d_forward(const Signal2D& signal, const KernelLookup& lookup_x, const KernelLookup& lookup_y,
                                  const DeapodizationTable& h_x, const DeapodizationTable& h_y, std::size_t M,
                                  double gamma, std::size_t grid_len) {
  signal.validate();
  detail::require(h_x.M == M && h_y.M == M && h_x.values.size() == M && h_y.values.size() == M,
                  "nufft2d_forward: deapodization grids do not match M");
  detail::require(grid_len >= 1, "nufft2d_forward: grid_len must be >= 1");
  detail::require(gamma >= 1.0, "nufft2d_forward: gamma must be >= 1");
  const std::size_t L = grid_len;
  std::vector<cplx> grid(L * L, 0.0);
  const int Wx = lookup_x.W();
  const int Wy = lookup_y.W();
  std::vector<cplx> wx;
  for (std::size_t n = 0; n < signal.size(); ++n) {
    const double sx = gamma * signal.tx[n];
    const double sy = gamma * signal.ty[n];
    const auto x_lo = static_cast<long>(std::ceil(sx - Wx));
    const auto x_hi = static_cast<long>(std::floor(sx + Wx));
    const auto y_lo = static_cast<long>(std::ceil(sy - Wy));
    const auto y_hi = static_cast<long>(std::floor(sy + Wy));
    wx.clear();
    for (long kx = x_lo; kx <= x_hi; ++kx) wx.push_back(lookup_x(static_cast<double>(kx) - sx));
    for (long ky = y_lo; ky <= y_hi; ++ky) {
      const cplx wy = signal.amplitudes[n] * lookup_y(static_cast<double>(ky) - sy);
      const std::size_t row = detail::wrap(ky, L) * L;
      for (long kx = x_lo; kx <= x_hi; ++kx)
        grid[row + detail::wrap(kx, L)] += wy * wx[static_cast<std::size_t>(kx - x_lo)];
    }
  }
  // rows first (x axis), then columns (y axis)
  std::vector<cplx> partial(L * M);
  for (std::size_t r = 0; r < L; ++r) {
    auto row = exponential_sum(std::span<const cplx>(grid).subspan(r * L, L), M, gamma);
    std::copy(row.begin(), row.end(), partial.begin() + static_cast<long>(r * M));
  }
  Spectrum2D out{M, std::vector<cplx>(M * M)};
  std::vector<cplx> col(L);
  for (std::size_t ix = 0; ix < M; ++ix) {
    for (std::size_t r = 0; r < L; ++r) col[r] = partial[r * M + ix];
    auto y = exponential_sum(col, M, gamma);
    for (std::size_t iy = 0; iy < M; ++iy) out.at(iy, ix) = y[iy] * h_x.values[ix] * h_y.values[iy];
  }
  return out;
}

// y(x_ix, x_iy) = sum_n u_n exp(-2 pi i (x_ix tx_n + x_iy ty_n)).
inline Spectrum2D nudft2d_direct(const Signal2D& signal, std::size_t M) {
  signal.validate();
  detail::require(M >= 1, "nudft2d_direct: M must be >= 1");
  Spectrum2D out{M, std::vector<cplx>(M * M, 0.0)};
  std::vector<cplx> px(M), py(M);
  for (std::size_t n = 0; n < signal.size(); ++n) {
    for (std::size_t m = 0; m < M; ++m) {
      px[m] = unit_phase(grid_point(m, M) * signal.tx[n]);
      py[m] = signal.amplitudes[n] * unit_phase(grid_point(m, M) * signal.ty[n]);
    }
    for (std::size_t iy = 0; iy < M; ++iy)
      for (std::size_t ix = 0; ix < M; ++ix) out.at(iy, ix) += py[iy] * px[ix];
  }
  return out;
}

}  // namespace gridopt
