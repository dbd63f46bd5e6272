#pragma once

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <vector>

#include "gridopt/errors.hpp"
#include "gridopt/kernel_table.hpp"

namespace gridopt {

// First n_basis discrete prolate spheroidal sequences of length n_samples.
// Columns are orthonormal under the spacing-weighted inner product
// spacing * sum_n a_n b_n; eigenvalues are the in-band energy fractions.
struct SlepianBasis {
  int n_samples = 0;
  double half_bandwidth_product = 0.0;
  double spacing = 1.0;
  Eigen::MatrixXd columns;
  std::vector<double> eigenvalues;

  int size() const { return static_cast<int>(columns.cols()); }
};

namespace detail {

// In-band and out-of-band energy of a unit-norm real sequence, integrated
// pointwise from |V(f)|^2 so that both tiny and near-one ratios keep their
// relative accuracy (the Toeplitz quadratic form cancels catastrophically).
inline double concentration(const Eigen::VectorXd& v, double w) {
  const int n = static_cast<int>(v.size());
  const double centre = 0.5 * (n - 1);
  auto power = [&](double f) {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < n; ++i) {
      double a = 2.0 * pi * f * (i - centre);
      re += v[i] * std::cos(a);
      im += v[i] * std::sin(a);
    }
    return re * re + im * im;
  };
  using quad = boost::math::quadrature::gauss<double, 15>;
  // |V|^2 has about n/2 oscillations over [0, 1/2]; a panel per
  // half-oscillation is plenty for 15 nodes.
  auto integrate = [&](double a, double b) {
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) * 2.0 * n)));
    const double h = (b - a) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) acc += quad::integrate(power, a + p * h, a + (p + 1) * h);
    return acc;
  };
  const double inside = integrate(0.0, w);
  const double outside = integrate(w, 0.5);
  const double total = inside + outside;
  return inside <= outside ? inside / total : 1.0 - outside / total;
}

}  // namespace detail

// Standard tridiagonal recipe: the DPSS are eigenvectors of the symmetric
// tridiagonal matrix that commutes with the time-and-band limiting operator.
// Concentration ratios below roughly 1e-30 sit at the rounding floor of the
// eigenvectors and carry no information.
inline SlepianBasis dpss_basis(int n_samples, double half_bandwidth_product, int n_basis, double spacing = 1.0) {
  detail::require(n_samples >= 2, "dpss_basis: n_samples must be >= 2");
  detail::require(n_basis >= 1 && n_basis <= n_samples, "dpss_basis: need 1 <= n_basis <= n_samples");
  detail::require(half_bandwidth_product > 0.0 && half_bandwidth_product < 0.5 * n_samples,
                  "dpss_basis: need 0 < half_bandwidth_product < n_samples/2");
  detail::require(spacing > 0.0, "dpss_basis: spacing must be positive");

  const int n = n_samples;
  const double w = half_bandwidth_product / n;
  Eigen::VectorXd diag(n), sub(n - 1);
  const double cw = std::cos(2.0 * pi * w);
  for (int i = 0; i < n; ++i) {
    double a = 0.5 * (n - 1 - 2 * i);
    diag[i] = a * a * cw;
  }
  for (int i = 1; i < n; ++i) sub[i - 1] = 0.5 * i * (n - i);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw ConvergenceError("dpss_basis: tridiagonal eigensolver did not converge");

  SlepianBasis out;
  out.n_samples = n;
  out.half_bandwidth_product = half_bandwidth_product;
  out.spacing = spacing;
  out.columns.resize(n, n_basis);
  out.eigenvalues.resize(static_cast<std::size_t>(n_basis));

  for (int l = 0; l < n_basis; ++l) {
    Eigen::VectorXd v = es.eigenvectors().col(n - 1 - l);
    // exact parity: order l has parity (-1)^l
    const double parity = (l % 2 == 0) ? 1.0 : -1.0;
    Eigen::VectorXd r = v.reverse();
    v = 0.5 * (v + parity * r);
    v.normalize();
    double orient = 0.0;
    if (l % 2 == 0) {
      orient = v.sum();
    } else {
      for (int i = 0; i < n; ++i) orient += (n - 1 - 2 * i) * v[i];
    }
    if (orient < 0.0) v = -v;
    out.eigenvalues[static_cast<std::size_t>(l)] = detail::concentration(v, w);
    out.columns.col(l) = v / std::sqrt(spacing);
  }
  return out;
}

// Basis matched to a kernel grid: 2WD samples spaced 1/D, half-bandwidth
// product W (support length 2W against a band of half-width 1/2).
inline SlepianBasis slepian_basis(int W, int D, int n_basis) {
  detail::require(W >= 1 && D >= 1, "slepian_basis: W and D must be >= 1");
  return dpss_basis(2 * W * D, static_cast<double>(W), n_basis, 1.0 / D);
}

inline KernelTable pswf_kernel(int W, int D, const SlepianBasis& basis) {
  detail::require(basis.n_samples == 2 * W * D, "pswf_kernel: basis length does not match 2*W*D");
  detail::require(basis.size() >= 1, "pswf_kernel: empty basis");
  std::vector<cplx> s(static_cast<std::size_t>(basis.n_samples));
  for (int i = 0; i < basis.n_samples; ++i) s[static_cast<std::size_t>(i)] = basis.columns(i, 0);
  return KernelTable(W, D, std::move(s));
}

// I0(beta * sqrt(1 - (nu/W)^2)), unnormalized; zero outside [-W, W].
inline double kaiser_bessel_value(double nu, int W, double beta) {
  double s = nu / W;
  if (std::abs(s) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - s * s));
}

inline KernelTable kaiser_bessel_kernel(int W, int D, double beta) {
  detail::require(beta > 0.0, "kaiser_bessel_kernel: beta must be positive");
  return KernelTable::from_function(W, D, [&](double nu) { return kaiser_bessel_value(nu, W, beta); });
}

// Beatty et al. closed-form rule for kernel width J = 2W at oversampling
// gamma: beta = pi * sqrt((J/gamma)^2 (gamma - 1/2)^2 - 0.8).
inline double kb_default_beta(int W, double gamma) {
  detail::require(W >= 1, "kb_default_beta: W must be >= 1");
  detail::require(gamma >= 1.0, "kb_default_beta: gamma must be >= 1");
  const double J = 2.0 * W;
  const double a = (J / gamma) * (gamma - 0.5);
  return pi * std::sqrt(a * a - 0.8);
}

}  // namespace gridopt
