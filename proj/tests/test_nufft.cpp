#include <gtest/gtest.h>

#include "support.hpp"

using namespace gridopt;
using namespace gridopt::testing;

namespace {

NonuniformSignal random_signal(std::size_t n, double t_max, Rng& rng) {
  NonuniformSignal s;
  for (std::size_t i = 0; i < n; ++i) {
    s.amplitudes.emplace_back(rng.normal(), rng.normal());
    s.times.push_back(rng.uniform(0.0, t_max));
  }
  return s;
}

double l2(const std::vector<cplx>& v) {
  double a = 0.0;
  for (const auto& z : v) a += std::norm(z);
  return std::sqrt(a);
}

// cos^4 window: its first three derivatives vanish at the support edge, so
// the natural end conditions cost nothing and the spline is O(h^4).
cplx smooth_window(double nu, int W) {
  if (std::abs(nu) > W) return 0.0;
  const double c = std::cos(pi * nu / (2.0 * W));
  return cplx(c * c * c * c, 0.3 * std::sin(pi * nu / W) * c * c * c * c);
}

}  // namespace

TEST(KernelLookup, ReproducesKnotsAndVanishesOutside) {
  Rng rng(40);
  const auto k = random_kernel(2, 16, rng);
  const KernelLookup lk(k);
  for (std::size_t n = 0; n < k.size(); ++n) EXPECT_NEAR(std::abs(lk(k.node(n)) - k[n]), 0.0, 1e-14);
  EXPECT_EQ(lk(2.5), cplx(0.0));
  EXPECT_EQ(lk(-2.5), cplx(0.0));
  EXPECT_EQ(lk(2.0 + 1e-12), cplx(0.0));
}

TEST(KernelLookup, FourthOrderBetweenKnots) {
  const int W = 2;
  double prev = 0.0;
  for (int D : {8, 16, 32, 64}) {
    const auto k = KernelTable::from_function(W, D, [&](double nu) { return smooth_window(nu, W); });
    // undo the table normalization to compare with the raw formula
    const double scale = std::abs(smooth_window(k.node(0), W)) / std::abs(k[0]);
    const KernelLookup lk(k);
    double err = 0.0;
    for (std::size_t n = 0; n + 1 < k.size(); ++n) {
      const double mid = 0.5 * (k.node(n) + k.node(n + 1));
      err = std::max(err, std::abs(lk(mid) * scale - smooth_window(mid, W)));
    }
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 12.0) << D;  // 16 in the limit
    }
    prev = err;
  }
  EXPECT_LT(prev, 1e-7);
}

TEST(KernelLookup, NeedsFourSamplesPerUnit) {
  Rng rng(41);
  EXPECT_THROW(KernelLookup(random_kernel(2, 3, rng)), ArgumentError);
}

TEST(GridSignal, SingleSampleHitsOneOffset) {
  const auto k = KernelTable::from_function(1, 16, [](double nu) { return std::abs(nu) <= 0.5 ? 1.0 : 0.0; });
  const KernelLookup lk(k);
  const NonuniformSignal s{{1.0}, {0.0}};
  const auto g = grid_signal(s, lk, 1.0, 8);
  EXPECT_NEAR(std::abs(g[0] - lk(0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(g[0] - k[8]), 0.0, 1e-3);  // flat top of the rectangle
  for (std::size_t i = 1; i < 8; ++i) EXPECT_EQ(g[i], lk(static_cast<double>(i <= 4 ? i : static_cast<double>(i) - 8.0)));
}

TEST(GridSignal, MatchesNaiveDoubleLoop) {
  Rng rng(42);
  for (double gamma : {1.0, 1.5, 2.0}) {
    const auto k = random_kernel(2, 8, rng);
    const KernelLookup lk(k);
    const auto s = random_signal(30, 30.0, rng);
    const std::size_t L = default_grid_len(30, gamma);
    const auto g = grid_signal(s, lk, gamma, L);
    for (std::size_t kk = 0; kk < L; ++kk) {
      cplx want = 0.0;
      for (std::size_t n = 0; n < s.size(); ++n)
        for (int j = -3; j <= 3; ++j)
          want += s.amplitudes[n] * lk(static_cast<double>(kk) + j * static_cast<double>(L) - gamma * s.times[n]);
      EXPECT_NEAR(std::abs(g[kk] - want), 0.0, 1e-12) << gamma << " " << kk;
    }
  }
}

TEST(GridSignal, Linear) {
  Rng rng(43);
  const KernelLookup lk(random_kernel(2, 8, rng));
  auto a = random_signal(20, 20.0, rng);
  auto b = a;
  for (auto& v : b.amplitudes) v = {rng.normal(), rng.normal()};
  NonuniformSignal c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.amplitudes[i] += b.amplitudes[i];
  const auto ga = grid_signal(a, lk, 1.0, 20), gb = grid_signal(b, lk, 1.0, 20), gc = grid_signal(c, lk, 1.0, 20);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(std::abs(gc[i] - ga[i] - gb[i]), 0.0, 1e-12);
}

TEST(ExponentialSum, MatchesNaiveForIntegerAndFractionalPeriods) {
  Rng rng(44);
  for (double gamma : {1.0, 2.0, 1.25, 1.3}) {
    std::vector<cplx> v(50);
    for (auto& z : v) z = {rng.normal(), rng.normal()};
    const std::size_t M = 40;
    const auto got = exponential_sum(v, M, gamma);
    for (std::size_t m = 0; m < M; ++m) {
      cplx want = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k)
        want += v[k] * std::polar(1.0, -2.0 * pi * grid_point(m, M) * static_cast<double>(k) / gamma);
      EXPECT_NEAR(std::abs(got[m] - want), 0.0, 1e-10) << gamma << " " << m;
    }
  }
}

TEST(NudftDirect, SingleStationaryAndMovingPhasor) {
  const auto y0 = nudft_direct({{1.0}, {0.0}}, 16);
  for (const auto& v : y0.values) EXPECT_NEAR(std::abs(v - cplx(1.0)), 0.0, 1e-15);
  const auto y1 = nudft_direct({{1.0}, {3.71}}, 16);
  for (const auto& v : y1.values) EXPECT_NEAR(std::abs(v), 1.0, 1e-14);
}

TEST(NudftDirect, IntegerTimesMatchFft) {
  Rng rng(45);
  const std::size_t N = 64;
  NonuniformSignal s;
  std::vector<cplx> alt(N);
  for (std::size_t n = 0; n < N; ++n) {
    s.amplitudes.emplace_back(rng.normal(), rng.normal());
    s.times.push_back(static_cast<double>(n));
    alt[n] = s.amplitudes[n] * (n % 2 ? -1.0 : 1.0);  // exp(i pi n) for x = -1/2
  }
  const auto y = nudft_direct(s, N);
  const auto f = fft::transform(alt, fft::Sign::forward);
  for (std::size_t m = 0; m < N; ++m) EXPECT_NEAR(std::abs(y.values[m] - f[m]), 0.0, 1e-12);
}

TEST(NufftForward, ZeroSignalAndGridMismatch) {
  const auto k = pswf_kernel(2, 21, slepian_basis(2, 21, 1));
  const KernelLookup lk(k);
  const auto h = lambda_and_h(k, 32, 1.0).h;
  NonuniformSignal z{std::vector<cplx>(10, 0.0), std::vector<double>(10)};
  for (std::size_t i = 0; i < 10; ++i) z.times[i] = 1.3 * i;
  for (const auto& v : nufft_forward(z, lk, h, 32, 1.0).values) EXPECT_EQ(v, cplx(0.0));
  EXPECT_THROW(nufft_forward(z, lk, h, 64, 1.0), ArgumentError);
}

TEST(NufftForward, SingleSampleAtOrigin) {
  const auto k = pswf_kernel(2, 21, slepian_basis(2, 21, 1));
  const KernelLookup lk(k);
  const std::size_t M = 32;
  const auto h = lambda_and_h(k, M, 1.0).h;
  const NonuniformSignal s{{1.0}, {0.0}};
  const auto y = nufft_forward(s, lk, h, M, 1.0, M);
  const auto truth = nudft_direct(s, M);
  for (std::size_t m = 0; m < M; ++m) {
    cplx sum = 0.0;
    for (int j = -2; j <= 2; ++j) sum += lk(static_cast<double>(j)) * unit_phase(grid_point(m, M) * j);
    EXPECT_NEAR(std::abs(y.values[m] - h.values[m] * sum), 0.0, 1e-12);
    const double theta =
        std::sqrt(empirical_operator_norm_sq(lk, h.values[m], grid_point(m, M), 1.0, s.times));
    EXPECT_LE(std::abs(truth.values[m] - y.values[m]), theta * (1.0 + 1e-9) + 1e-12);
  }
}

TEST(NufftForward, CauchySchwarzBoundHolds) {
  Rng rng(46);
  const std::size_t M = 64, N = 64;
  const std::vector<KernelTable> kernels{pswf_kernel(2, 21, slepian_basis(2, 21, 1)),
                                         kaiser_bessel_kernel(2, 21, kb_default_beta(2, 2.0)),
                                         SmoothKernel::random(2, rng).table(21)};
  int violations = 0;
  for (double gamma : {1.0, 2.0}) {
    for (const auto& k : kernels) {
      const KernelLookup lk(k);
      const auto h = lambda_and_h(k, M, gamma).h;
      for (int trial = 0; trial < 10; ++trial) {
        const auto s = random_signal(N, static_cast<double>(N), rng);
        const auto y = nudft_direct(s, M);
        const auto ys = nufft_forward(s, lk, h, M, gamma);
        const double un = l2(s.amplitudes);
        for (std::size_t m = 0; m < M; ++m) {
          const double theta = std::sqrt(static_cast<double>(N) * empirical_operator_norm_sq(
                                                                      lk, h.values[m], grid_point(m, M), gamma, s.times));
          if (std::abs(y.values[m] - ys.values[m]) > un * theta * (1.0 + 1e-9) + 1e-12) ++violations;
        }
      }
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(NufftForward, LinearInAmplitudes) {
  Rng rng(47);
  const auto k = SmoothKernel::random(2, rng).table(21);
  const KernelLookup lk(k);
  const auto h = lambda_and_h(k, 48, 1.5).h;
  auto a = random_signal(48, 48.0, rng);
  auto b = a;
  for (auto& v : b.amplitudes) v = {rng.normal(), rng.normal()};
  auto c = a;
  const cplx alpha(0.7, -0.2);
  for (std::size_t i = 0; i < c.size(); ++i) c.amplitudes[i] = alpha * a.amplitudes[i] + b.amplitudes[i];
  const auto ya = nufft_forward(a, lk, h, 48, 1.5), yb = nufft_forward(b, lk, h, 48, 1.5),
             yc = nufft_forward(c, lk, h, 48, 1.5);
  for (std::size_t m = 0; m < 48; ++m)
    EXPECT_NEAR(std::abs(yc.values[m] - alpha * ya.values[m] - yb.values[m]), 0.0, 1e-12);
}

TEST(NufftForward, WiderPswfIsMoreAccurate) {
  const std::size_t M = 128, N = 128;
  const auto target = test_target(2, M);
  const auto suite = generate_signals(target, 5, N, 7, Placement::uniform_half);
  const auto w = std::vector<double>(M, 1.0);
  double worst[2];
  for (int i = 0; i < 2; ++i) {
    const int W = i ? 3 : 1;
    const MethodKernel m{"pswf", pswf_kernel(W, 21, slepian_basis(W, 21, 1))};
    const auto rep = evaluate_methods(suite, std::span(&m, 1), w, M, 1.0, 1);
    const auto& v = rep.mae_per_method.at("pswf");
    worst[i] = *std::max_element(v.begin(), v.end());
  }
  EXPECT_LE(worst[1], worst[0]);
}

TEST(Nufft2d, ZeroAmplitudesGiveZeroImage) {
  const auto k = kaiser_bessel_kernel(2, 21, 6.0);
  const KernelLookup lk(k);
  const auto h = lambda_and_h(k, 16, 2.0).h;
  const Signal2D s{std::vector<cplx>(5, 0.0), {0.1, 1.2, -3.0, 4.0, 2.2}, {1.0, -2.0, 0.5, 3.3, -1.0}};
  for (const auto& v : nufft2d_forward(s, lk, lk, h, h, 16, 2.0, 32).values) EXPECT_EQ(v, cplx(0.0));
}

TEST(Nufft2d, ConstantSecondCoordinateReducesTo1d) {
  Rng rng(48);
  const std::size_t M = 24, L = 48;
  const double gamma = 2.0;
  const auto kx = SmoothKernel::random(2, rng).table(21), ky = kaiser_bessel_kernel(2, 21, 7.0);
  const KernelLookup lx(kx), ly(ky);
  const auto hx = lambda_and_h(kx, M, gamma).h, hy = lambda_and_h(ky, M, gamma).h;
  const double c = 3.37;
  Signal2D s;
  NonuniformSignal line;
  for (int i = 0; i < 15; ++i) {
    const cplx u(rng.normal(), rng.normal());
    const double t = rng.uniform(-12.0, 12.0);
    s.amplitudes.push_back(u);
    s.tx.push_back(t);
    s.ty.push_back(c);
    line.amplitudes.push_back(u);
    line.times.push_back(t);
  }
  const auto y2 = nufft2d_forward(s, lx, ly, hx, hy, M, gamma, L);
  const auto yx = nufft_forward(line, lx, hx, M, gamma, L);
  const auto yy = nufft_forward({{1.0}, {c}}, ly, hy, M, gamma, L);
  for (std::size_t iy = 0; iy < M; ++iy)
    for (std::size_t ix = 0; ix < M; ++ix)
      EXPECT_NEAR(std::abs(y2.at(iy, ix) - yx.values[ix] * yy.values[iy]), 0.0, 1e-10);
}

TEST(Nufft2d, ProductSignalIsOuterProduct) {
  Rng rng(49);
  const std::size_t M = 16, L = 32;
  const double gamma = 2.0;
  const auto k = kaiser_bessel_kernel(2, 21, kb_default_beta(2, gamma));
  const KernelLookup lk(k);
  const auto h = lambda_and_h(k, M, gamma).h;
  NonuniformSignal a, b;
  for (int i = 0; i < 6; ++i) {
    a.amplitudes.emplace_back(rng.normal(), rng.normal());
    a.times.push_back(rng.uniform(-8.0, 8.0));
    b.amplitudes.emplace_back(rng.normal(), rng.normal());
    b.times.push_back(rng.uniform(-8.0, 8.0));
  }
  Signal2D s;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      s.amplitudes.push_back(a.amplitudes[i] * b.amplitudes[j]);
      s.tx.push_back(a.times[i]);
      s.ty.push_back(b.times[j]);
    }
  const auto y2 = nufft2d_forward(s, lk, lk, h, h, M, gamma, L);
  const auto ya = nufft_forward(a, lk, h, M, gamma, L), yb = nufft_forward(b, lk, h, M, gamma, L);
  for (std::size_t iy = 0; iy < M; ++iy)
    for (std::size_t ix = 0; ix < M; ++ix)
      EXPECT_NEAR(std::abs(y2.at(iy, ix) - ya.values[ix] * yb.values[iy]), 0.0, 1e-9);
}

TEST(Nufft2d, DirectTransformMatchesDefinition) {
  const Signal2D s{{cplx(1.0, 0.5), cplx(-0.3, 2.0)}, {1.5, -2.25}, {0.75, 3.0}};
  const auto y = nudft2d_direct(s, 8);
  for (std::size_t iy = 0; iy < 8; ++iy)
    for (std::size_t ix = 0; ix < 8; ++ix) {
      cplx want = 0.0;
      for (std::size_t n = 0; n < 2; ++n)
        want += s.amplitudes[n] * std::polar(1.0, -2.0 * pi * (grid_point(ix, 8) * s.tx[n] + grid_point(iy, 8) * s.ty[n]));
      EXPECT_NEAR(std::abs(y.at(iy, ix) - want), 0.0, 1e-13);
    }
}

TEST(Nufft2d, MismatchedDeapodizationThrows) {
  const auto k = kaiser_bessel_kernel(2, 21, 6.0);
  const KernelLookup lk(k);
  const auto h16 = lambda_and_h(k, 16, 2.0).h, h8 = lambda_and_h(k, 8, 2.0).h;
  const Signal2D s{{1.0}, {0.0}, {0.0}};
  EXPECT_THROW(nufft2d_forward(s, lk, lk, h16, h8, 16, 2.0, 32), ArgumentError);
  const Signal2D bad{{1.0, 2.0}, {0.0}, {0.0}};
  EXPECT_THROW(nufft2d_forward(bad, lk, lk, h16, h16, 16, 2.0, 32), ArgumentError);
}
