#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridopt/error_shape.hpp"
#include "gridopt/errors.hpp"
#include "gridopt/kernel_table.hpp"
#include "gridopt/nelder_mead.hpp"
#include "gridopt/rng.hpp"
#include "gridopt/slepian.hpp"
#include "gridopt/spectral.hpp"

namespace gridopt {

enum class TargetKind { half_step, notch, multi_notch, custom };

// Desired error level eta(x_m) >= 0.
struct TargetShape {
  std::size_t M = 0;
  std::vector<double> values;
  std::string label;
};

inline constexpr double target_floor_min = 1e-12;

namespace detail {

// log-linear V: floor at the centre, ceiling from |x - centre| >= width on
inline double notch_value(double x, double centre, double width, double floor, double ceiling) {
  const double t = std::min(1.0, std::abs(x - centre) / width);
  return std::exp(std::log(floor) + (std::log(ceiling) - std::log(floor)) * t);
}

inline void check_level(double v, const char* what) {
  require(std::isfinite(v) && v >= target_floor_min, std::string("target_shape: ") + what + " must be >= 1e-12");
}

inline std::string join(std::span<const double> p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ',';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p[i]);
    s += buf;
  }
  return s;
}

}  // namespace detail

// half_step: {low, high}       eta = high for x < 0, low for x >= 0
// notch: {centre, width, floor, ceiling}
// multi_notch: {c_1, .., c_k, width, floor, ceiling}, pointwise minimum
// custom: {eta_0, .., eta_{M-1}} taken verbatim
inline TargetShape target_shape(TargetKind kind, std::span<const double> params, std::size_t M) {
  detail::require(M >= 2, "target_shape: M must be >= 2");
  TargetShape t{M, std::vector<double>(M), {}};
  switch (kind) {
    case TargetKind::half_step: {
      detail::require(params.size() == 2, "target_shape: half_step takes {low, high}");
      detail::check_level(params[0], "low");
      detail::check_level(params[1], "high");
      for (std::size_t m = 0; m < M; ++m) t.values[m] = grid_point(m, M) < 0.0 ? params[1] : params[0];
      t.label = "half_step:" + detail::join(params);
      break;
    }
    case TargetKind::notch:
    case TargetKind::multi_notch: {
      const bool single = kind == TargetKind::notch;
      detail::require(single ? params.size() == 4 : params.size() >= 4,
                      single ? "target_shape: notch takes {centre, width, floor, ceiling}"
                             : "target_shape: multi_notch takes {centres.., width, floor, ceiling}");
      const std::size_t k = params.size() - 3;
      const double width = params[k], floor = params[k + 1], ceiling = params[k + 2];
      detail::require(std::isfinite(width) && width > 0.0, "target_shape: width must be positive");
      detail::check_level(floor, "floor");
      detail::check_level(ceiling, "ceiling");
      detail::require(ceiling >= floor, "target_shape: ceiling must be >= floor");
      for (std::size_t i = 0; i < k; ++i)
        detail::require(std::isfinite(params[i]) && params[i] >= -0.5 && params[i] <= 0.5,
                        "target_shape: notch centres must lie in [-1/2, 1/2]");
      for (std::size_t m = 0; m < M; ++m) {
        double v = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < k; ++i)
          v = std::min(v, detail::notch_value(grid_point(m, M), params[i], width, floor, ceiling));
        t.values[m] = v;
      }
      t.label = std::string(single ? "notch:" : "multi_notch:") + detail::join(params);
      break;
    }
    case TargetKind::custom: {
      detail::require(params.size() == M, "target_shape: custom needs one value per grid point");
      for (double v : params) detail::require(std::isfinite(v) && v >= 0.0, "target_shape: values must be >= 0");
      t.values.assign(params.begin(), params.end());
      t.label = "custom";
      break;
    }
  }
  return t;
}

// Shapes used by the three benchmark tests.
inline TargetShape test_target(int test_id, std::size_t M) {
  switch (test_id) {
    case 1: {
      const double p[] = {1e-7, 1e-2};
      return target_shape(TargetKind::half_step, p, M);
    }
    case 2: {
      const double p[] = {0.25, 0.1, 1e-8, 1.0};
      return target_shape(TargetKind::notch, p, M);
    }
    case 3: {
      const double p[] = {-0.3, 0.25, 0.4, 0.05, 1e-8, 1.0};
      return target_shape(TargetKind::multi_notch, p, M);
    }
    default:
      throw ArgumentError("test id must be 1, 2 or 3");
  }
}

// -||f - eta||_p^p + rho ||(f - eta)_+||_p^p with dx = 1/M weighting.
inline double scalarize(std::span<const double> lambda, std::span<const double> target, double rho, double p) {
  detail::require(lambda.size() == target.size() && !lambda.empty(), "scalarize: grid mismatch");
  detail::require(rho > 1.0, "scalarize: rho must be > 1");
  detail::require(p >= 1.0, "scalarize: p must be >= 1");
  double all = 0.0, positive = 0.0;
  for (std::size_t m = 0; m < lambda.size(); ++m) {
    const double r = lambda[m] - target[m];
    const double a = p == 1.0 ? std::abs(r) : std::pow(std::abs(r), p);
    all += a;
    if (r > 0.0) positive += a;
  }
  const double dx = 1.0 / static_cast<double>(lambda.size());
  return dx * (rho * positive - all);
}

inline double scalarize(const ErrorShape& lambda, const TargetShape& target, double rho, double p) {
  detail::require(lambda.M == target.M, "scalarize: grid mismatch");
  return scalarize(lambda.values, target.values, rho, p);
}

namespace detail {

inline std::pair<int, int> kernel_dims(const SlepianBasis& basis) {
  const double d = 1.0 / basis.spacing;
  const int D = static_cast<int>(std::lround(d));
  require(D >= 1 && std::abs(d - D) < 1e-9, "basis spacing is not 1/D for an integer D");
  require(basis.n_samples % (2 * D) == 0, "basis length is not 2*W*D");
  return {basis.n_samples / (2 * D), D};
}

}  // namespace detail

// B c_real + i B c_imag, normalized.
inline KernelTable coefficients_to_kernel(const SlepianBasis& basis, std::span<const double> c_real,
                                          std::span<const double> c_imag) {
  const auto [W, D] = detail::kernel_dims(basis);
  const auto L1 = static_cast<std::size_t>(basis.size());
  detail::require(c_real.size() == L1 && c_imag.size() == L1, "coefficients_to_kernel: expected L+1 coefficients");
  bool any = false;
  for (std::size_t l = 0; l < L1; ++l) any = any || c_real[l] != 0.0 || c_imag[l] != 0.0;
  if (!any) throw DegenerateInputError("coefficients_to_kernel: all coefficients are zero");
  const Eigen::Map<const Eigen::VectorXd> re(c_real.data(), static_cast<Eigen::Index>(L1));
  const Eigen::Map<const Eigen::VectorXd> im(c_imag.data(), static_cast<Eigen::Index>(L1));
  const Eigen::VectorXd kr = basis.columns * re;
  const Eigen::VectorXd ki = basis.columns * im;
  std::vector<cplx> s(static_cast<std::size_t>(basis.n_samples));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = {kr[static_cast<Eigen::Index>(i)], ki[static_cast<Eigen::Index>(i)]};
  return KernelTable(W, D, std::move(s));
}

struct Coefficients {
  std::vector<double> real;
  std::vector<double> imag;
};

// Orthogonal projection onto the basis under the spacing-weighted product.
inline Coefficients kernel_to_coefficients(const SlepianBasis& basis, const KernelTable& kernel) {
  const auto [W, D] = detail::kernel_dims(basis);
  detail::require(kernel.W() == W && kernel.D() == D, "kernel_to_coefficients: kernel and basis grids differ");
  Eigen::VectorXd kr(basis.n_samples), ki(basis.n_samples);
  for (int i = 0; i < basis.n_samples; ++i) {
    kr[i] = kernel[static_cast<std::size_t>(i)].real();
    ki[i] = kernel[static_cast<std::size_t>(i)].imag();
  }
  const Eigen::VectorXd cr = basis.spacing * (basis.columns.transpose() * kr);
  const Eigen::VectorXd ci = basis.spacing * (basis.columns.transpose() * ki);
  return {{cr.data(), cr.data() + cr.size()}, {ci.data(), ci.data() + ci.size()}};
}

struct CalibrationConfig {
  int W = 2;
  double gamma = 1.0;
  int L = 35;
  int D = 21;
  std::size_t M = 2048;
  double p = 1.0;
  double rho = 1e16;
  double step_tol = 1e-16;
  long max_fun_evals = 1000000;
  std::uint64_t seed = 0;
  int restarts = 3;

  void validate() const {
    detail::require(W >= 1, "config: W must be >= 1");
    detail::require(gamma >= 1.0, "config: gamma must be >= 1");
    detail::require(L >= 0 && L + 1 <= 2 * W * D, "config: need 0 <= L < 2*W*D");
    detail::require(D >= 4, "config: D must be >= 4");
    detail::require(M >= 2, "config: M must be >= 2");
    detail::require(p >= 1.0, "config: p must be >= 1");
    detail::require(rho > 1.0, "config: rho must be > 1");
    detail::require(step_tol >= 0.0, "config: step_tol must be >= 0");
    detail::require(max_fun_evals >= 1, "config: max_fun_evals must be >= 1");
    detail::require(restarts >= 0, "config: restarts must be >= 0");
  }
};

enum class Termination { step_tolerance, eval_budget };

inline const char* to_string(Termination t) {
  return t == Termination::step_tolerance ? "step_tolerance" : "eval_budget";
}

struct TracePoint {
  long eval = 0;
  double objective = 0.0;
};

struct CalibrationResult {
  KernelTable kernel;
  DeapodizationTable h;
  ErrorShape lambda;
  double objective = 0.0;
  std::vector<TracePoint> trace;
  Termination termination_reason = Termination::eval_budget;
  long evaluations = 0;
};

inline double kernel_objective(const KernelTable& kernel, const TargetShape& target, const CalibrationConfig& cfg) {
  return scalarize(error_shape(kernel, target.M, cfg.gamma), target, cfg.rho, cfg.p);
}

// Starting kernel. gamma = 1: the PSWF shifted to the most promising
// location of the target (its weighted centre or one of its local minima);
// gamma >= 2: Kaiser-Bessel with the default beta; in between, whichever of
// the two scores lower.
inline KernelTable initial_kernel(const CalibrationConfig& cfg, const TargetShape& target) {
  cfg.validate();
  detail::require(target.M == cfg.M, "initial_kernel: target grid does not match config M");
  auto kb = [&] { return kaiser_bessel_kernel(cfg.W, cfg.D, kb_default_beta(cfg.W, cfg.gamma)); };
  if (cfg.gamma >= 2.0) return kb();

  const auto basis = slepian_basis(cfg.W, cfg.D, 1);
  const auto pswf = pswf_kernel(cfg.W, cfg.D, basis);
  const auto& eta = target.values;
  const std::size_t M = target.M;
  std::vector<double> centres;
  const double top = *std::max_element(eta.begin(), eta.end());
  double wsum = 0.0, xsum = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    if (eta[m] > 0.0 && top > 0.0) {
      const double w = std::log(top / eta[m]);
      wsum += w;
      xsum += w * grid_point(m, M);
    }
  }
  centres.push_back(wsum > 0.0 ? xsum / wsum : 0.0);
  for (std::size_t m = 1; m + 1 < M; ++m)
    if (eta[m] < eta[m - 1] && eta[m] <= eta[m + 1]) centres.push_back(grid_point(m, M));

  std::optional<KernelTable> best;
  double best_f = std::numeric_limits<double>::infinity();
  for (double c : centres) {
    auto k = shift_kernel(pswf, c / cfg.gamma);
    const double f = kernel_objective(k, target, cfg);
    if (!best || f < best_f) {
      best = std::move(k);
      best_f = f;
    }
  }
  if (cfg.gamma > 1.0) {
    auto k = kb();
    if (kernel_objective(k, target, cfg) < best_f) return k;
  }
  return *best;
}

// Derivative-free minimization of the scalarized objective over the
// 2(L+1) real Slepian coefficients. Each candidate is normalized onto the
// unit sphere before scoring, which is harmless because Lambda ignores
// scale. The budget is split across 1 + restarts simplex runs, each
// restarted from the best point so far.
inline CalibrationResult optimize_kernel(const CalibrationConfig& cfg, const TargetShape& target,
                                         const KernelTable& init) {
  cfg.validate();
  detail::require(target.M == cfg.M && target.values.size() == cfg.M, "optimize_kernel: target grid != M");
  detail::require(init.W() == cfg.W && init.D() == cfg.D, "optimize_kernel: init kernel grid != (W, D)");

  const auto basis = slepian_basis(cfg.W, cfg.D, cfg.L + 1);
  const auto L1 = static_cast<std::size_t>(cfg.L + 1);

  long evals = 0;
  double best_f = kernel_objective(init, target, cfg);
  std::optional<std::vector<double>> best_z;
  std::vector<TracePoint> trace{{0, best_f}};

  auto objective = [&](const std::vector<double>& z) {
    ++evals;
    double f;
    try {
      auto k = coefficients_to_kernel(basis, std::span(z).first(L1), std::span(z).subspan(L1));
      f = kernel_objective(k, target, cfg);
    } catch (const ArgumentError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
    if (std::isfinite(f) && f < best_f) {
      best_f = f;
      best_z = z;
      trace.push_back({evals, f});
    }
    return f;
  };

  const auto c0 = kernel_to_coefficients(basis, init);
  std::vector<double> start(c0.real);
  start.insert(start.end(), c0.imag.begin(), c0.imag.end());

  Rng rng(stream_seed(cfg.seed, 0));
  const int runs = cfg.restarts + 1;
  bool converged = false;
  for (int r = 0; r < runs; ++r) {
    const long remaining = cfg.max_fun_evals - evals;
    if (remaining <= 0) break;
    const long share = remaining / (runs - r);
    std::vector<double> signs;
    if (r > 0) {
      signs.resize(start.size());
      for (auto& s : signs) s = (rng.bits() & 1) ? 1.0 : -1.0;
    }
    const auto from = best_z ? *best_z : start;
    auto res = nelder_mead(objective, initial_simplex(from, signs), {cfg.step_tol, std::max(1L, share)});
    converged = res.converged;
  }

  CalibrationResult out{best_z ? coefficients_to_kernel(basis, std::span(*best_z).first(L1),
                                                        std::span(*best_z).subspan(L1))
                               : init,
                        {}, {}, 0.0, std::move(trace), Termination::eval_budget, evals};
  auto lh = lambda_and_h(out.kernel, cfg.M, cfg.gamma);
  out.lambda = std::move(lh.lambda);
  out.h = std::move(lh.h);
  out.objective = scalarize(out.lambda, target, cfg.rho, cfg.p);
  out.termination_reason = (best_z && converged) ? Termination::step_tolerance : Termination::eval_budget;
  return out;
}

}  // namespace gridopt
