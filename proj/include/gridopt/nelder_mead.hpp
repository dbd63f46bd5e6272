#pragma once

// Adaptive Nelder-Mead (Gao and Han parameters), which keeps the simplex
// from degenerating in higher dimensions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "gridopt/errors.hpp"

namespace gridopt {

struct NelderMeadOptions {
  double step_tol = 1e-16;
  long max_evals = 1000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  long evals = 0;
  bool converged = false;  // simplex collapsed below step_tol
};

// Axis-aligned starting simplex: 5% of each nonzero coordinate, a small
// absolute step for zeros. `signs` (optional, +-1 per coordinate) flips steps.
inline std::vector<std::vector<double>> initial_simplex(const std::vector<double>& x0,
                                                        const std::vector<double>& signs = {}) {
  std::vector<std::vector<double>> s(x0.size() + 1, x0);
  for (std::size_t i = 0; i < x0.size(); ++i) {
    double step = x0[i] != 0.0 ? 0.05 * x0[i] : 0.00025;
    if (!signs.empty()) step *= signs[i];
    s[i + 1][i] += step;
  }
  return s;
}

// Minimizes f from the given simplex. Non-finite values count as +inf.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<std::vector<double>> simplex, const NelderMeadOptions& opt) {
  detail::require(simplex.size() >= 2, "nelder_mead: simplex needs at least two vertices");
  const std::size_t n = simplex.size() - 1;
  for (const auto& v : simplex) detail::require(v.size() == n, "nelder_mead: vertex dimension mismatch");
  const double dn = static_cast<double>(n);
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / dn;
  const double contract = 0.75 - 1.0 / (2.0 * dn);
  const double shrink = 1.0 - 1.0 / dn;

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evals;
    double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  auto budget_left = [&] { return res.evals < opt.max_evals; };

  std::vector<double> fv(n + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i <= n && budget_left(); ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = std::move(simplex[order[i]]);
      f2[i] = fv[order[i]];
    }
    simplex = std::move(s2);
    fv = std::move(f2);
  };
  auto combine = [&](const std::vector<double>& c, const std::vector<double>& toward, double t) {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = c[j] + t * (toward[j] - c[j]);
    return out;
  };

  std::vector<double> centroid(n);
  while (true) {
    sort_simplex();
    double size = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(simplex[i][j] - simplex[0][j]));
    if (size <= opt.step_tol) {
      res.converged = true;
      break;
    }
    if (!budget_left()) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    for (auto& c : centroid) c /= dn;

    auto xr = combine(centroid, simplex[n], -reflect);
    const double fr = eval(xr);
    bool do_shrink = false;
    if (fr < fv[0]) {
      if (!budget_left()) {
        simplex[n] = std::move(xr);
        fv[n] = fr;
        continue;
      }
      auto xe = combine(centroid, simplex[n], -reflect * expand);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = std::move(xe);
        fv[n] = fe;
      } else {
        simplex[n] = std::move(xr);
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = std::move(xr);
      fv[n] = fr;
    } else if (!budget_left()) {
      if (fr < fv[n]) {
        simplex[n] = std::move(xr);
        fv[n] = fr;
      }
    } else if (fr < fv[n]) {
      auto xc = combine(centroid, xr, contract);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[n] = std::move(xc);
        fv[n] = fc;
      } else {
        do_shrink = true;
      }
    } else {
      auto xcc = combine(centroid, simplex[n], contract);
      const double fcc = eval(xcc);
      if (fcc < fv[n]) {
        simplex[n] = std::move(xcc);
        fv[n] = fcc;
      } else {
        do_shrink = true;
      }
    }
    if (do_shrink) {
      for (std::size_t i = 1; i <= n && budget_left(); ++i) {
        simplex[i] = combine(simplex[0], simplex[i], shrink);
        fv[i] = eval(simplex[i]);
      }
    }
  }
  res.x = simplex[0];
  res.value = fv[0];
  return res;
}

}  // namespace gridopt
