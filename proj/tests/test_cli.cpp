#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridopt.hpp"
#include "gridopt/io.hpp"

namespace fs = std::filesystem;
using namespace gridopt;

namespace {

const std::string cli = GRIDOPT_CLI_PATH;
const std::string data = GRIDOPT_DATA_DIR;

int run(const std::string& args) {
  const int rc = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("gridopt_cli_" + std::to_string(::getpid()) + "_" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, CalibrateWritesArtifactsAndIsReproducible) {
  const auto cfg = data + "/calibrate_test2.json";
  ASSERT_EQ(run("calibrate --config " + cfg + " --out " + path("a")), 0);
  for (const char* f : {"kernel.json", "lambda.csv", "h.csv", "trace.csv", "meta.json"})
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  ASSERT_EQ(run("calibrate --config " + cfg + " --out " + path("b")), 0);
  for (const char* f : {"kernel.json", "lambda.csv", "h.csv", "trace.csv", "meta.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;

  const auto k = io::read_kernel(path("a/kernel.json"));
  EXPECT_NEAR(weighted_norm(k.samples(), k.spacing()), 1.0, 1e-12);
  const auto lam = io::read_csv(path("a/lambda.csv"));
  EXPECT_EQ(lam.rows.size(), 512u);
}

TEST_F(Cli, ManifestHashMatchesResolvedConfig) {
  ASSERT_EQ(run("calibrate --config " + data + "/calibrate_test2.json --seed 3 --out " + path("a")), 0);
  const auto meta = io::read_json(path("a/meta.json"));
  EXPECT_EQ(meta.at("command"), "calibrate");
  EXPECT_EQ(meta.at("seed"), 3u);
  EXPECT_EQ(meta.at("config").at("seed"), 3u);
  EXPECT_EQ(meta.at("output_paths").size(), 4u);
  io::write_text(path("config.txt"), meta.at("config").dump());
  ASSERT_EQ(std::system(("sha256sum " + path("config.txt") + " | cut -c1-64 > " + path("digest.txt")).c_str()), 0);
  auto digest = slurp(dir / "digest.txt");
  digest.erase(digest.find_last_not_of("\n") + 1);
  EXPECT_EQ(meta.at("config_hash").get<std::string>(), digest);
}

TEST_F(Cli, CalibrateTargetCsvMustMatchConfigGrid) {
  io::write_target(path("t.csv"), test_target(2, 64));
  io::write_text(path("cfg.json"), R"({"W": 1, "L": 3, "M": 64, "max_fun_evals": 50})");
  EXPECT_EQ(run("calibrate --config " + path("cfg.json") + " --target-csv " + path("t.csv") + " --out " + path("a")), 0);
  io::write_text(path("cfg128.json"), R"({"W": 1, "L": 3, "M": 128, "max_fun_evals": 50})");
  EXPECT_EQ(run("calibrate --config " + path("cfg128.json") + " --target-csv " + path("t.csv") + " --out " + path("b")), 2);
}

TEST_F(Cli, CalibrateInputErrorsExitTwo) {
  EXPECT_EQ(run("calibrate --config " + path("missing.json") + " --target test:2 --out " + path("a")), 2);
  io::write_text(path("bad.json"), R"({"W": 2, "wobble": 1})");
  EXPECT_EQ(run("calibrate --config " + path("bad.json") + " --target test:2 --out " + path("a")), 2);
  io::write_text(path("badL.json"), R"({"W": 1, "D": 4, "L": 8})");
  EXPECT_EQ(run("calibrate --config " + path("badL.json") + " --target test:2 --out " + path("a")), 2);
  io::write_text(path("ok.json"), R"({"W": 1, "L": 3, "M": 64, "max_fun_evals": 10})");
  EXPECT_EQ(run("calibrate --config " + path("ok.json") + " --out " + path("a")), 2);
  EXPECT_EQ(run("calibrate --config " + path("ok.json") + " --target notch:0.25,0.1 --out " + path("a")), 2);
  EXPECT_EQ(run("calibrate --config " + path("ok.json") + " --target wedge:1 --out " + path("a")), 2);
  EXPECT_EQ(run("calibrate --config " + path("ok.json") + " --target test:2 --out " + path("a")), 0);
}

TEST_F(Cli, LambdaOfRectFixtureMatchesSincSquared) {
  ASSERT_EQ(run("lambda --kernel " + data + "/rect_kernel.json --M 1024 --gamma 1 --out " + path("l.csv") +
                " --h-out " + path("h.csv")),
            0);
  const auto t = io::read_csv(path("l.csv"));
  ASSERT_EQ(t.rows.size(), 1024u);
  double worst = 0.0;
  for (const auto& r : t.rows) {
    const double x = r[0], s = x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x);
    worst = std::max(worst, std::abs(r[1] - (1.0 - s * s)));
  }
  EXPECT_LT(worst, 1e-5);
  EXPECT_EQ(io::read_csv(path("h.csv")).header, (std::vector<std::string>{"x", "h_re", "h_im"}));
}

TEST_F(Cli, LambdaDegenerateGridAndCorruptKernel) {
  ASSERT_EQ(run("lambda --kernel " + data + "/rect_kernel.json --M 2 --out " + path("l.csv")), 0);
  EXPECT_EQ(io::read_csv(path("l.csv")).rows.size(), 2u);
  io::write_text(path("bad.json"), "{\"W\": 1, \"D\": 4, \"samples\": [[1, 0]");
  EXPECT_EQ(run("lambda --kernel " + path("bad.json") + " --out " + path("x.csv")), 2);
  io::write_text(path("short.json"), R"({"W": 1, "D": 4, "samples": [[1, 0], [1, 0]]})");
  EXPECT_EQ(run("lambda --kernel " + path("short.json") + " --out " + path("x.csv")), 2);
  io::write_text(path("zero.json"), R"({"W": 1, "D": 1, "samples": [[0, 0], [0, 0]]})");
  EXPECT_EQ(run("lambda --kernel " + path("zero.json") + " --out " + path("x.csv")), 2);
  EXPECT_EQ(run("lambda --kernel " + data + "/rect_kernel.json --gamma 0.5 --out " + path("x.csv")), 2);
}

TEST_F(Cli, NufftShapesAndOracle) {
  const auto k = data + "/rect_kernel.json";
  ASSERT_EQ(run("nufft --kernel " + k + " --signal " + data + "/single_sample.csv --M 16 --out " + path("y.csv")), 0);
  ASSERT_EQ(run("nufft --oracle --signal " + data + "/single_sample.csv --M 16 --out " + path("yo.csv")), 0);
  const auto y = io::read_csv(path("y.csv")), yo = io::read_csv(path("yo.csv"));
  EXPECT_EQ(y.rows.size(), 16u);
  EXPECT_EQ(yo.header, y.header);
  EXPECT_EQ(yo.rows.size(), 16u);
  // single sample at t = 3.25, x = -1/2: e^{i pi 3.25}
  EXPECT_NEAR(yo.rows[0][1], -std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(yo.rows[0][2], -std::sqrt(0.5), 1e-15);
  EXPECT_EQ(run("nufft --signal " + data + "/single_sample.csv --out " + path("z.csv")), 2);
  EXPECT_EQ(run("nufft --kernel " + k + " --signal " + data + "/rect_kernel.json --out " + path("z.csv")), 2);
}

TEST_F(Cli, NufftGriddingObeysErrorBound) {
  const auto sig = std::get<NonuniformSignal>(io::read_signal(data + "/signal_1d.csv"));
  const auto k = kaiser_bessel_kernel(2, 21, kb_default_beta(2, 2.0));
  io::write_kernel(path("kb.json"), k);
  ASSERT_EQ(run("nufft --kernel " + path("kb.json") + " --signal " + data + "/signal_1d.csv --M 32 --gamma 2 --out " +
                path("y.csv")),
            0);
  ASSERT_EQ(run("nufft --oracle --signal " + data + "/signal_1d.csv --M 32 --out " + path("yo.csv")), 0);
  const auto y = io::read_csv(path("y.csv")), yo = io::read_csv(path("yo.csv"));
  double un = 0.0;
  for (auto u : sig.amplitudes) un += std::norm(u);
  un = std::sqrt(un);
  const KernelLookup lk(k);
  const auto h = lambda_and_h(k, 32, 2.0).h;
  for (std::size_t m = 0; m < 32; ++m) {
    const double err = std::hypot(y.rows[m][1] - yo.rows[m][1], y.rows[m][2] - yo.rows[m][2]);
    const double theta = std::sqrt(static_cast<double>(sig.size()) *
                                   empirical_operator_norm_sq(lk, h.values[m], grid_point(m, 32), 2.0, sig.times));
    EXPECT_LE(err, un * theta * (1.0 + 1e-9) + 1e-12) << m;
  }
}

TEST_F(Cli, Nufft2DWritesHeaderAndGrid) {
  ASSERT_EQ(run("nufft --kernel " + data + "/rect_kernel.json --signal " + data + "/signal_2d.csv --M 8 --gamma 2 --out " +
                path("y.csv")),
            0);
  std::ifstream in(path("y.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "8,2");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(io::split(line).size(), 16u);
    ++rows;
  }
  EXPECT_EQ(rows, 8);
}

TEST_F(Cli, BenchWritesReportsDeterministically) {
  const std::string args = "bench --test 1 --W 1 --gamma 1 --signals 10 --L 5 --M 128 --N 64 --evals 300 --seed 4 ";
  ASSERT_EQ(run(args + "--threads 3 --out " + path("a")), 0);
  ASSERT_EQ(std::system(("GRIDOPT_THREADS=1 " + cli + " " + args + "--out " + path("b") + " >/dev/null 2>&1").c_str()), 0);
  const auto mae = io::read_csv(path("a/mae.csv"));
  EXPECT_EQ(mae.header, (std::vector<std::string>{"x", "pswf", "kb", "init", "optimized"}));
  EXPECT_EQ(mae.rows.size(), 128u);
  for (const char* f : {"mae.csv", "summary.csv", "kernel.json", "trace.csv"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  EXPECT_EQ(slurp(dir / "a/summary.csv").substr(0, 18), "method,weighted_l1");
  EXPECT_EQ(run("bench --test 1 --out " + path("c")), 2);
  EXPECT_EQ(run("bench --test 4 --seed 1 --out " + path("c")), 2);
}

TEST_F(Cli, Bench2DSmokeRun) {
  ASSERT_EQ(run("bench2d --size 32 --spokes 16 --radial 33 --W 2 --gamma 2 --L 7 --M 128 --evals 300 --seed 2 --out " +
                path("a")),
            0);
  std::ifstream in(path("a/error_map.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(io::split(line).size(), 32u);
    ++rows;
  }
  EXPECT_EQ(rows, 32);
  EXPECT_TRUE(fs::exists(dir / "a/error_map_kb.csv"));
  EXPECT_TRUE(fs::exists(dir / "a/meta.json"));
  EXPECT_EQ(run("bench2d --size 8 --seed 1 --out " + path("b")), 2);
}

TEST_F(Cli, SignalsSuiteRoundTrips) {
  ASSERT_EQ(run("signals --test 3 --count 2 --N 20 --M 64 --seed 9 --out " + path("s")), 0);
  const auto suite = generate_signals(test_target(3, 64), 2, 20, 9, Placement::log_inv_eta);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto s = std::get<NonuniformSignal>(io::read_signal(path("s/signal_000" + std::to_string(i) + ".csv")));
    EXPECT_EQ(s.times, suite.signals[i].times);
    EXPECT_EQ(s.amplitudes, suite.signals[i].amplitudes);
  }
  const auto t = io::read_target(path("s/target.csv"));
  EXPECT_EQ(t.values, test_target(3, 64).values);
}

TEST_F(Cli, HelpAndUnknownCommand) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("bench --help"), 0);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
}
