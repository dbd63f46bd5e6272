#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridopt/calibrate.hpp"
#include "gridopt/error_shape.hpp"
#include "gridopt/errors.hpp"
#include "gridopt/nufft.hpp"
#include "gridopt/parallel.hpp"
#include "gridopt/rng.hpp"
#include "gridopt/slepian.hpp"

namespace gridopt {

enum class Placement { uniform_half, log_inv_eta };
enum class WeightKind { indicator_right_half, log_inv_eta };

struct SignalSuite {
  std::vector<NonuniformSignal> signals;
  std::uint64_t seed = 0;
  std::string target_ref;
};

// Frequencies for synthetic signals. log_inv_eta draws grid points x_m with
// probability proportional to max(0, log(1/eta_m)) by inverse CDF.
class FrequencySampler {
 public:
  FrequencySampler(const TargetShape& target, Placement placement) : placement_(placement), M_(target.M) {
    if (placement_ == Placement::uniform_half) return;
    cdf_.resize(target.M);
    double acc = 0.0;
    for (std::size_t m = 0; m < target.M; ++m) {
      const double eta = target.values[m];
      detail::require(eta > 0.0, "generate_signals: eta must be > 0 for log_inv_eta placement");
      acc += std::max(0.0, -std::log(eta));
      cdf_[m] = acc;
    }
    detail::require(acc > 0.0, "generate_signals: log(1/eta) has no positive mass");
  }

  double operator()(Rng& rng) const {
    if (placement_ == Placement::uniform_half) return rng.uniform(0.0, 0.5);
    const double u = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto m = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(M_ - 1)));
    return grid_point(m, M_);
  }

 private:
  Placement placement_;
  std::size_t M_;
  std::vector<double> cdf_;
};

// One signal per stream: Q ~ U{10..100} tones with amplitudes U[0.1, 1] at
// sampled frequencies, observed at N times uniform on [0, N].
inline NonuniformSignal generate_signal(const FrequencySampler& sampler, std::size_t N, Rng& rng) {
  const auto Q = static_cast<std::size_t>(rng.uniform_int(10, 100));
  std::vector<double> freq(Q), amp(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    freq[q] = sampler(rng);
    amp[q] = rng.uniform(0.1, 1.0);
  }
  NonuniformSignal s{std::vector<cplx>(N), std::vector<double>(N)};
  for (std::size_t n = 0; n < N; ++n) {
    const double t = rng.uniform(0.0, static_cast<double>(N));
    cplx acc = 0.0;
    for (std::size_t q = 0; q < Q; ++q) acc += amp[q] * unit_phase(-freq[q] * t);
    s.times[n] = t;
    s.amplitudes[n] = acc;
  }
  return s;
}

inline SignalSuite generate_signals(const TargetShape& target, std::size_t count, std::size_t N, std::uint64_t seed,
                                    Placement placement) {
  detail::require(count >= 1, "generate_signals: count must be >= 1");
  detail::require(N >= 1, "generate_signals: N must be >= 1");
  const FrequencySampler sampler(target, placement);
  SignalSuite suite{{}, seed, target.label};
  suite.signals.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(stream_seed(seed, i));
    suite.signals.push_back(generate_signal(sampler, N, rng));
  }
  return suite;
}

inline std::vector<double> mae(std::span<const Spectrum> truth, std::span<const Spectrum> approx) {
  detail::require(!truth.empty() && truth.size() == approx.size(), "mae: spectrum counts differ");
  const std::size_t M = truth[0].M;
  std::vector<double> out(M, 0.0);
  for (std::size_t s = 0; s < truth.size(); ++s) {
    detail::require(truth[s].M == M && approx[s].M == M && truth[s].values.size() == M && approx[s].values.size() == M,
                    "mae: grid mismatch");
    for (std::size_t m = 0; m < M; ++m) out[m] += std::abs(truth[s].values[m] - approx[s].values[m]);
  }
  for (auto& v : out) v /= static_cast<double>(truth.size());
  return out;
}

inline std::vector<double> weights_from_target(const TargetShape& target, WeightKind kind) {
  std::vector<double> w(target.M);
  for (std::size_t m = 0; m < target.M; ++m) {
    if (kind == WeightKind::indicator_right_half) {
      w[m] = grid_point(m, target.M) < 0.0 ? 0.0 : 1.0;
    } else {
      detail::require(target.values[m] > 0.0, "weights_from_target: eta must be > 0");
      w[m] = -std::log(target.values[m]);
    }
  }
  return w;
}

inline double weighted_l1(std::span<const double> values, std::span<const double> weights) {
  detail::require(values.size() == weights.size() && !values.empty(), "weighted_l1: length mismatch");
  double acc = 0.0;
  for (std::size_t m = 0; m < values.size(); ++m) acc += weights[m] * values[m];
  return acc / static_cast<double>(values.size());
}

// ---------------------------------------------------------------- 1D suite

struct MethodKernel {
  std::string name;
  KernelTable kernel;
};

struct MaeReport {
  std::vector<double> x_grid;
  std::vector<std::string> methods;
  std::map<std::string, std::vector<double>> mae_per_method;
  std::map<std::string, double> weighted_l1_per_method;
};

// MAE of each method against the direct transform over a signal suite.
inline MaeReport evaluate_methods(const SignalSuite& suite, std::span<const MethodKernel> methods,
                                  std::span<const double> weights, std::size_t M, double gamma, unsigned threads) {
  detail::require(weights.size() == M, "evaluate_methods: weight grid != M");
  struct Prepared {
    KernelLookup lookup;
    DeapodizationTable h;
  };
  std::vector<Prepared> prep;
  for (const auto& mk : methods) prep.push_back({KernelLookup(mk.kernel), lambda_and_h(mk.kernel, M, gamma).h});

  const std::size_t S = suite.signals.size();
  // abs errors per (signal, method), summed afterwards in index order
  std::vector<std::vector<std::vector<double>>> err(S);
  parallel_for(S, threads, [&](std::size_t s) {
    const auto truth = nudft_direct(suite.signals[s], M);
    err[s].resize(methods.size());
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const auto y = nufft_forward(suite.signals[s], prep[k].lookup, prep[k].h, M, gamma);
      err[s][k].resize(M);
      for (std::size_t m = 0; m < M; ++m) err[s][k][m] = std::abs(truth.values[m] - y.values[m]);
    }
  });

  MaeReport r;
  r.x_grid = frequency_grid(M);
  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::vector<double> acc(M, 0.0);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t m = 0; m < M; ++m) acc[m] += err[s][k][m];
    for (auto& v : acc) v /= static_cast<double>(S);
    r.methods.push_back(methods[k].name);
    r.weighted_l1_per_method[methods[k].name] = weighted_l1(acc, weights);
    r.mae_per_method[methods[k].name] = std::move(acc);
  }
  return r;
}

struct BenchConfig {
  int test_id = 2;
  CalibrationConfig calibration;  // W, gamma, L, D, M, optimizer settings
  std::size_t signals = 10;
  std::size_t N = 512;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

inline Placement placement_for_test(int test_id) {
  return test_id == 1 ? Placement::uniform_half : Placement::log_inv_eta;
}

inline WeightKind weights_for_test(int test_id) {
  return test_id == 1 ? WeightKind::indicator_right_half : WeightKind::log_inv_eta;
}

struct BenchOutcome {
  TargetShape target;
  SignalSuite suite;
  KernelTable init;
  CalibrationResult calibration;
  MaeReport report;
};

// Full 1D protocol for one test: calibrate, then compare the unshifted PSWF,
// the gamma-matched Kaiser-Bessel kernel, the calibration starting point and
// the optimized kernel.
inline BenchOutcome run_bench(const BenchConfig& cfg) {
  auto cal = cfg.calibration;
  cal.seed = cfg.seed;
  cal.validate();
  detail::require(cfg.signals >= 1 && cfg.N >= 1, "bench: signals and N must be >= 1");
  const std::size_t M = cal.M;
  auto target = test_target(cfg.test_id, M);
  auto suite = generate_signals(target, cfg.signals, cfg.N, cfg.seed, placement_for_test(cfg.test_id));
  auto init = initial_kernel(cal, target);
  auto result = optimize_kernel(cal, target, init);

  const auto basis = slepian_basis(cal.W, cal.D, 1);
  const std::vector<MethodKernel> methods{
      {"pswf", pswf_kernel(cal.W, cal.D, basis)},
      {"kb", kaiser_bessel_kernel(cal.W, cal.D, kb_default_beta(cal.W, cal.gamma))},
      {"init", init},
      {"optimized", result.kernel},
  };
  const auto w = weights_from_target(target, weights_for_test(cfg.test_id));
  auto report = evaluate_methods(suite, methods, w, M, cal.gamma, cfg.threads);
  return {std::move(target), std::move(suite), std::move(init), std::move(result), std::move(report)};
}

// ---------------------------------------------------------------- 2D

// Row-major size x size image; pixel (iy, ix) sits at
// (-1/2 + ix/size, -1/2 + iy/size).
struct Image {
  std::size_t size = 0;
  std::vector<double> pixels;

  double& at(std::size_t iy, std::size_t ix) { return pixels[iy * size + ix]; }
  double at(std::size_t iy, std::size_t ix) const { return pixels[iy * size + ix]; }
};

struct Ellipse {
  double cx, cy, a, b, angle, value;

  bool contains(double x, double y) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const double u = (x - cx) * c + (y - cy) * s;
    const double v = -(x - cx) * s + (y - cy) * c;
    return (u / a) * (u / a) + (v / b) * (v / b) <= 1.0;
  }
};

// A faint large ellipse holding three bright small ones near (0.25, 0.25).
// Later ellipses paint over earlier ones. The small ones have both semi-axes
// above 1/(16 sqrt 2), so each covers a pixel centre at every size >= 16.
inline const std::vector<Ellipse>& phantom_ellipses() {
  static const std::vector<Ellipse> e{
      {0.25, 0.255, 0.17, 0.14, 0.3, 0.2},
      {0.21, 0.22, 0.055, 0.046, 0.35, 1.0},
      {0.30, 0.23, 0.050, 0.046, -0.5, 0.8},
      {0.25, 0.31, 0.060, 0.046, 0.0, 0.9},
  };
  return e;
}

inline Image phantom(std::size_t size) {
  detail::require(size >= 16, "phantom: size must be >= 16");
  Image img{size, std::vector<double>(size * size, 0.0)};
  for (std::size_t iy = 0; iy < size; ++iy)
    for (std::size_t ix = 0; ix < size; ++ix) {
      const double x = grid_point(ix, size), y = grid_point(iy, size);
      for (const auto& e : phantom_ellipses())
        if (e.contains(x, y)) img.at(iy, ix) = e.value;
    }
  return img;
}

// sum_p I[p] exp(+2 pi i (kx px + ky py)), pixel offsets p = index - size/2.
// The sign is opposite to the forward transform so that the gridding
// transform of these samples reconstructs the image.
inline cplx image_spectrum_at(const Image& img, double kx, double ky) {
  const double half = 0.5 * static_cast<double>(img.size);
  std::vector<cplx> ex(img.size);
  for (std::size_t ix = 0; ix < img.size; ++ix) ex[ix] = unit_phase(-kx * (static_cast<double>(ix) - half));
  cplx acc = 0.0;
  for (std::size_t iy = 0; iy < img.size; ++iy) {
    cplx row = 0.0;
    for (std::size_t ix = 0; ix < img.size; ++ix) row += img.at(iy, ix) * ex[ix];
    acc += row * unit_phase(-ky * (static_cast<double>(iy) - half));
  }
  return acc;
}

struct RadialSamples {
  std::size_t image_size = 0;
  std::size_t n_spokes = 0;
  std::size_t n_radial = 0;
  std::vector<double> kx, ky, r;
  std::vector<cplx> values;
};

inline constexpr double golden_ratio = 1.6180339887498948482;

// Golden-angle spokes theta_a = 2 pi a phi mod 2 pi, radii
// r_b = 0.5 b / (n_radial - 1) so that b = 0 .. n_radial-1 spans [0, 1/2].
inline RadialSamples radial_kspace(const Image& img, std::size_t n_spokes, std::size_t n_radial) {
  detail::require(img.size >= 1 && img.pixels.size() == img.size * img.size, "radial_kspace: image not square");
  detail::require(n_spokes >= 1 && n_radial >= 2, "radial_kspace: need spokes >= 1 and radial >= 2");
  RadialSamples s{img.size, n_spokes, n_radial, {}, {}, {}, {}};
  for (std::size_t a = 0; a < n_spokes; ++a) {
    const double turns = static_cast<double>(a) * golden_ratio;
    const double theta = 2.0 * pi * (turns - std::floor(turns));
    for (std::size_t b = 0; b < n_radial; ++b) {
      const double r = 0.5 * static_cast<double>(b) / static_cast<double>(n_radial - 1);
      s.kx.push_back(r * std::cos(theta));
      s.ky.push_back(r * std::sin(theta));
      s.r.push_back(r);
    }
  }
  s.values.resize(s.kx.size());
  for (std::size_t i = 0; i < s.kx.size(); ++i) s.values[i] = image_spectrum_at(img, s.kx[i], s.ky[i]);
  return s;
}

inline RadialSamples density_compensation(RadialSamples s) {
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] *= s.r[i];
  return s;
}

// Times on the pixel-index scale: t = size * k, within [-size/2, size/2].
inline Signal2D to_signal(const RadialSamples& s) {
  Signal2D sig{s.values, {}, {}};
  const double n = static_cast<double>(s.image_size);
  for (std::size_t i = 0; i < s.kx.size(); ++i) {
    sig.tx.push_back(n * s.kx[i]);
    sig.ty.push_back(n * s.ky[i]);
  }
  return sig;
}

inline constexpr double error_map_floor = 1e-15;

inline std::vector<double> error_map_2d(std::span<const double> truth, std::span<const cplx> recon) {
  detail::require(truth.size() == recon.size(), "error_map_2d: size mismatch");
  std::vector<double> out(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i)
    out[i] = std::log10(std::abs(truth[i] - std::abs(recon[i])) + error_map_floor);
  return out;
}

// sum w(x) w(y) |truth - |recon|| dx dy on the size x size grid.
inline double weighted_error_2d(std::span<const double> truth, std::span<const cplx> recon,
                                std::span<const double> weights) {
  const std::size_t n = weights.size();
  detail::require(truth.size() == n * n && recon.size() == n * n, "weighted_error_2d: size mismatch");
  double acc = 0.0;
  for (std::size_t iy = 0; iy < n; ++iy)
    for (std::size_t ix = 0; ix < n; ++ix)
      acc += weights[iy] * weights[ix] * std::abs(truth[iy * n + ix] - std::abs(recon[iy * n + ix]));
  return acc / static_cast<double>(n * n);
}

struct Bench2DConfig {
  std::size_t size = 32;
  std::size_t spokes = 16;
  std::size_t radial = 33;
  CalibrationConfig calibration;  // W, gamma, L, D, M (calibration grid), optimizer
  std::uint64_t seed = 0;
};

struct Bench2DMethod {
  std::string name;
  KernelTable kernel;
  std::vector<cplx> recon;
  std::vector<double> error_map;
  double weighted_error = 0.0;
};

struct Bench2DOutcome {
  std::vector<double> truth;
  std::vector<Bench2DMethod> methods;  // "kb", "optimized"
  CalibrationResult calibration;
};

// Radial k-space reconstruction with separable kernels. The reference image
// is the direct transform of the same compensated samples, so only the
// gridding error is measured. Weights are log(1/eta) of the Test-2 notch on
// each axis.
inline Bench2DOutcome run_bench2d(const Bench2DConfig& cfg) {
  auto cal = cfg.calibration;
  cal.seed = cfg.seed;
  cal.validate();
  const std::size_t S = cfg.size;
  const auto samples = density_compensation(radial_kspace(phantom(S), cfg.spokes, cfg.radial));
  const auto sig = to_signal(samples);
  const double cell = (2.0 * pi / static_cast<double>(cfg.spokes)) * (0.5 / static_cast<double>(cfg.radial - 1));

  const auto direct = nudft2d_direct(sig, S);
  std::vector<double> truth(S * S);
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = cell * std::abs(direct.values[i]);

  const auto target = test_target(2, cal.M);
  auto init = initial_kernel(cal, target);
  auto result = optimize_kernel(cal, target, init);

  const auto weights = weights_from_target(test_target(2, S), WeightKind::log_inv_eta);
  const std::size_t grid_len = default_grid_len(S, cal.gamma);
  Bench2DOutcome out{std::move(truth), {}, std::move(result)};
  const std::pair<std::string, KernelTable> kernels[] = {
      {"kb", kaiser_bessel_kernel(cal.W, cal.D, kb_default_beta(cal.W, cal.gamma))},
      {"optimized", out.calibration.kernel},
  };
  for (const auto& [name, kernel] : kernels) {
    const KernelLookup lk(kernel);
    const auto h = lambda_and_h(kernel, S, cal.gamma).h;
    auto y = nufft2d_forward(sig, lk, lk, h, h, S, cal.gamma, grid_len);
    for (auto& v : y.values) v *= cell;
    Bench2DMethod m{name, kernel, std::move(y.values), {}, 0.0};
    m.error_map = error_map_2d(out.truth, m.recon);
    m.weighted_error = weighted_error_2d(out.truth, m.recon, weights);
    out.methods.push_back(std::move(m));
  }
  return out;
}

}  // namespace gridopt
