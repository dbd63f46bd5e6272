// gridopt: calibrate gridding kernels, evaluate error shapes, run NUFFTs and
// benchmark suites. Exit status 0 ok, 2 bad input or config, 3 numerical
// failure.

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridopt.hpp"
#include "gridopt/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gridopt;

#ifndef GRIDOPT_VERSION
#define GRIDOPT_VERSION "0.0.0"
#endif

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw NumericalError("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

// meta.json goes out before any result file. config_hash is the digest of
// the compact dump of the resolved config; output paths are relative to dir.
void write_manifest(const fs::path& dir, const std::string& command, const json& config, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
  const json meta{{"command", command},
                  {"config", config},
                  {"config_hash", sha256_hex(config.dump())},
                  {"seed", seed},
                  {"tool_version", GRIDOPT_VERSION},
                  {"output_paths", outputs}};
  io::write_json((dir / "meta.json").string(), meta);
}

fs::path prepare_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ArgumentError("cannot create output directory " + out);
  return dir;
}

unsigned resolve_threads(unsigned flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("GRIDOPT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ArgumentError("GRIDOPT_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return default_thread_count();
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& cell : io::split(s)) out.push_back(io::parse_double(cell));
  return out;
}

// "notch:0.25,0.1,1e-8,1", "half_step:1e-7,1e-2", "multi_notch:...",
// or "test:2".
TargetShape parse_target(const std::string& text, std::size_t M) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ArgumentError("target must look like kind:params, got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const auto params = parse_list(text.substr(colon + 1));
  if (kind == "test") {
    detail::require(params.size() == 1, "target test:<id> takes one value");
    return test_target(static_cast<int>(params[0]), M);
  }
  if (kind == "half_step") return target_shape(TargetKind::half_step, params, M);
  if (kind == "notch") return target_shape(TargetKind::notch, params, M);
  if (kind == "multi_notch") return target_shape(TargetKind::multi_notch, params, M);
  throw ArgumentError("unknown target kind '" + kind + "'");
}

template <class T>
void take(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: bad value for ") + key + ": " + e.what());
  }
}

CalibrationConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("config: top level must be an object");
  static const std::vector<std::string> known{"W",       "gamma",         "L",    "D",        "M",      "p",
                                              "rho",     "step_tol",      "seed", "restarts", "target", "target_csv",
                                              "max_fun_evals"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ArgumentError("config: unknown key '" + key + "'");
  CalibrationConfig c;
  take(j, "W", c.W);
  take(j, "gamma", c.gamma);
  take(j, "L", c.L);
  take(j, "D", c.D);
  take(j, "M", c.M);
  take(j, "p", c.p);
  take(j, "rho", c.rho);
  take(j, "step_tol", c.step_tol);
  take(j, "max_fun_evals", c.max_fun_evals);
  take(j, "seed", c.seed);
  take(j, "restarts", c.restarts);
  return c;
}

json config_to_json(const CalibrationConfig& c) {
  return {{"W", c.W},       {"gamma", c.gamma},           {"L", c.L},       {"D", c.D},
          {"M", c.M},       {"p", c.p},                   {"rho", c.rho},   {"step_tol", c.step_tol},
          {"seed", c.seed}, {"max_fun_evals", c.max_fun_evals}, {"restarts", c.restarts}};
}

void write_summary(const fs::path& path, const std::vector<std::pair<std::string, double>>& rows) {
  std::string text = "method,weighted_l1\n";
  for (const auto& [name, v] : rows) text += name + "," + io::fmt(v) + "\n";
  io::write_text(path.string(), text);
}

// ------------------------------------------------------------ calibrate

struct CalibrateArgs {
  std::string config, target, target_csv, out;
  std::optional<std::uint64_t> seed;
};

int run_calibrate(const CalibrateArgs& a) {
  const json raw = io::read_json(a.config);
  auto cfg = config_from_json(raw);
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();

  std::string target_text = a.target, target_csv = a.target_csv;
  if (target_text.empty() && target_csv.empty()) {
    take(raw, "target", target_text);
    take(raw, "target_csv", target_csv);
  }
  if (target_text.empty() == target_csv.empty()) throw ArgumentError("calibrate: give exactly one of target or target csv");
  TargetShape target;
  if (!target_csv.empty()) {
    target = io::read_target(target_csv);
    if (target.M != cfg.M) throw ArgumentError("calibrate: target csv has " + std::to_string(target.M) + " rows, config M is " + std::to_string(cfg.M));
  } else {
    target = parse_target(target_text, cfg.M);
  }

  auto resolved = config_to_json(cfg);
  resolved["target"] = target.label;
  const auto dir = prepare_dir(a.out);
  write_manifest(dir, "calibrate", resolved, cfg.seed, {"kernel.json", "lambda.csv", "h.csv", "trace.csv"});

  const auto init = initial_kernel(cfg, target);
  const auto r = optimize_kernel(cfg, target, init);
  io::write_kernel((dir / "kernel.json").string(), r.kernel);
  io::write_lambda((dir / "lambda.csv").string(), r.lambda);
  io::write_h((dir / "h.csv").string(), r.h);
  io::write_trace((dir / "trace.csv").string(), r.trace);
  std::cerr << "calibrate: objective " << io::fmt(r.objective) << " after " << r.evaluations << " evaluations ("
            << to_string(r.termination_reason) << ")\n";
  return 0;
}

// ------------------------------------------------------------ lambda

struct LambdaArgs {
  std::string kernel, out, h_out;
  std::size_t M = 1024;
  double gamma = 1.0;
};

int run_lambda(const LambdaArgs& a) {
  const auto k = io::read_kernel(a.kernel);
  const auto r = lambda_and_h(k, a.M, a.gamma);
  if (!r.h.flagged.empty())
    std::cerr << "lambda: " << r.h.flagged.size() << " grid points with vanishing denominator\n";
  io::write_lambda(a.out, r.lambda);
  if (!a.h_out.empty()) io::write_h(a.h_out, r.h);
  return 0;
}

// ------------------------------------------------------------ nufft

struct NufftArgs {
  std::string kernel, signal, out;
  std::size_t M = 64, grid_len = 0;
  double gamma = 2.0;
  bool oracle = false;
};

int run_nufft(const NufftArgs& a) {
  const auto signal = io::read_signal(a.signal);
  if (const auto* s = std::get_if<NonuniformSignal>(&signal)) {
    if (a.oracle) {
      io::write_spectrum(a.out, nudft_direct(*s, a.M));
      return 0;
    }
    const auto k = io::read_kernel(a.kernel);
    const KernelLookup lk(k);
    io::write_spectrum(a.out, nufft_forward(*s, lk, lambda_and_h(k, a.M, a.gamma).h, a.M, a.gamma, a.grid_len));
    return 0;
  }
  const auto& s2 = std::get<Signal2D>(signal);
  if (a.oracle) {
    io::write_spectrum(a.out, nudft2d_direct(s2, a.M), a.gamma);
    return 0;
  }
  const auto k = io::read_kernel(a.kernel);
  const KernelLookup lk(k);
  const auto h = lambda_and_h(k, a.M, a.gamma).h;
  const std::size_t len = a.grid_len ? a.grid_len : default_grid_len(a.M, a.gamma);
  io::write_spectrum(a.out, nufft2d_forward(s2, lk, lk, h, h, a.M, a.gamma, len), a.gamma);
  return 0;
}

// ------------------------------------------------------------ bench

struct BenchArgs {
  int test_id = 2;
  int W = 2, L = 15, D = 21, restarts = 3;
  double gamma = 1.0;
  std::size_t M = 512, N = 512, signals = 10;
  long evals = 20000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
};

int run_bench_cmd(const BenchArgs& a) {
  BenchConfig cfg;
  cfg.test_id = a.test_id;
  cfg.calibration.W = a.W;
  cfg.calibration.gamma = a.gamma;
  cfg.calibration.L = a.L;
  cfg.calibration.D = a.D;
  cfg.calibration.M = a.M;
  cfg.calibration.max_fun_evals = a.evals;
  cfg.calibration.restarts = a.restarts;
  cfg.calibration.seed = a.seed;
  cfg.signals = a.signals;
  cfg.N = a.N;
  cfg.seed = a.seed;
  cfg.threads = resolve_threads(a.threads);
  detail::require(a.test_id >= 1 && a.test_id <= 3, "bench: test must be 1, 2 or 3");
  cfg.calibration.validate();

  auto resolved = config_to_json(cfg.calibration);
  resolved["test"] = a.test_id;
  resolved["signals"] = a.signals;
  resolved["N"] = a.N;
  const auto dir = prepare_dir(a.out);
  write_manifest(dir, "bench", resolved, a.seed, {"mae.csv", "summary.csv", "kernel.json", "trace.csv"});

  const auto o = run_bench(cfg);
  std::vector<std::string> header{"x"};
  std::vector<std::vector<double>> cols{o.report.x_grid};
  std::vector<std::pair<std::string, double>> summary;
  for (const auto& m : o.report.methods) {
    header.push_back(m);
    cols.push_back(o.report.mae_per_method.at(m));
    summary.emplace_back(m, o.report.weighted_l1_per_method.at(m));
  }
  io::write_csv((dir / "mae.csv").string(), header, cols);
  write_summary(dir / "summary.csv", summary);
  io::write_kernel((dir / "kernel.json").string(), o.calibration.kernel);
  io::write_trace((dir / "trace.csv").string(), o.calibration.trace);
  return 0;
}

struct Bench2DArgs {
  std::size_t size = 32, spokes = 16, radial = 33, M = 512;
  int W = 2, L = 15, D = 21, restarts = 3;
  double gamma = 2.0;
  long evals = 20000;
  std::uint64_t seed = 0;
  std::string out;
};

int run_bench2d_cmd(const Bench2DArgs& a) {
  Bench2DConfig cfg;
  cfg.size = a.size;
  cfg.spokes = a.spokes;
  cfg.radial = a.radial;
  cfg.calibration.W = a.W;
  cfg.calibration.gamma = a.gamma;
  cfg.calibration.L = a.L;
  cfg.calibration.D = a.D;
  cfg.calibration.M = a.M;
  cfg.calibration.max_fun_evals = a.evals;
  cfg.calibration.restarts = a.restarts;
  cfg.calibration.seed = a.seed;
  cfg.seed = a.seed;
  detail::require(a.size >= 16 && a.spokes >= 1 && a.radial >= 2, "bench2d: need size >= 16, spokes >= 1, radial >= 2");
  cfg.calibration.validate();

  auto resolved = config_to_json(cfg.calibration);
  resolved["size"] = a.size;
  resolved["spokes"] = a.spokes;
  resolved["radial"] = a.radial;
  const auto dir = prepare_dir(a.out);
  write_manifest(dir, "bench2d", resolved, a.seed, {"error_map.csv", "error_map_kb.csv", "summary.csv", "kernel.json"});

  const auto o = run_bench2d(cfg);
  std::vector<std::pair<std::string, double>> summary;
  for (const auto& m : o.methods) {
    const auto name = m.name == "optimized" ? "error_map.csv" : "error_map_" + m.name + ".csv";
    io::write_grid((dir / name).string(), m.error_map, a.size);
    summary.emplace_back(m.name, m.weighted_error);
  }
  write_summary(dir / "summary.csv", summary);
  io::write_kernel((dir / "kernel.json").string(), o.calibration.kernel);
  return 0;
}

// ------------------------------------------------------------ signals

struct SignalsArgs {
  int test_id = 2;
  std::size_t count = 10, N = 512, M = 512;
  std::uint64_t seed = 0;
  std::string out;
};

int run_signals(const SignalsArgs& a) {
  const auto target = test_target(a.test_id, a.M);
  json resolved{{"test", a.test_id}, {"count", a.count}, {"N", a.N}, {"M", a.M}, {"seed", a.seed}, {"target", target.label}};
  std::vector<std::string> names{"target.csv"};
  char buf[32];
  for (std::size_t i = 0; i < a.count; ++i) {
    std::snprintf(buf, sizeof buf, "signal_%04zu.csv", i);
    names.emplace_back(buf);
  }
  const auto suite = generate_signals(target, a.count, a.N, a.seed, placement_for_test(a.test_id));
  const auto dir = prepare_dir(a.out);
  write_manifest(dir, "signals", resolved, a.seed, names);
  io::write_target((dir / names[0]).string(), target);
  for (std::size_t i = 0; i < a.count; ++i) io::write_signal((dir / names[i + 1]).string(), suite.signals[i]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gridding kernel calibration and NUFFT error analysis"};
  app.set_version_flag("--version", GRIDOPT_VERSION);
  app.require_subcommand(1);

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "Optimize a kernel against a target error shape");
  cal->add_option("--config", ca.config, "Calibration config JSON")->required()->check(CLI::ExistingFile);
  cal->add_option("--target", ca.target, "Target as kind:params (half_step, notch, multi_notch, test)");
  cal->add_option("--target-csv", ca.target_csv, "Target as x,eta CSV on the frequency grid")->check(CLI::ExistingFile);
  cal->add_option("--seed", ca.seed, "Override the config seed");
  cal->add_option("--out", ca.out, "Output directory")->required();

  LambdaArgs la;
  auto* lam = app.add_subcommand("lambda", "Error shape and optimal deapodization of a kernel");
  lam->add_option("--kernel", la.kernel, "Kernel JSON")->required()->check(CLI::ExistingFile);
  lam->add_option("--M", la.M, "Frequency grid size")->capture_default_str()->check(CLI::Range(2ul, 1ul << 26));
  lam->add_option("--gamma", la.gamma, "Oversampling factor")->capture_default_str();
  lam->add_option("--out", la.out, "x,lambda CSV")->required();
  lam->add_option("--h-out", la.h_out, "Optional x,h_re,h_im CSV");

  NufftArgs na;
  auto* nu = app.add_subcommand("nufft", "Gridding transform of a 1D or 2D signal CSV");
  nu->add_option("--kernel", na.kernel, "Kernel JSON")->check(CLI::ExistingFile);
  nu->add_option("--signal", na.signal, "Signal CSV: t,u_re,u_im or tx,ty,u_re,u_im")->required()->check(CLI::ExistingFile);
  nu->add_option("--M", na.M, "Output grid size per axis")->capture_default_str()->check(CLI::Range(1ul, 1ul << 24));
  nu->add_option("--gamma", na.gamma, "Oversampling factor")->capture_default_str();
  nu->add_option("--grid-len", na.grid_len, "Resampling grid length, 0 for floor(gamma * n)")->capture_default_str();
  nu->add_flag("--oracle", na.oracle, "Direct nonuniform DFT instead of gridding");
  nu->add_option("--out", na.out, "Spectrum CSV")->required();

  BenchArgs ba;
  auto* be = app.add_subcommand("bench", "1D test protocol: calibrate, then MAE of pswf, kb, init and optimized");
  be->add_option("--test", ba.test_id, "Test 1, 2 or 3")->capture_default_str()->check(CLI::Range(1, 3));
  be->add_option("--W", ba.W, "Kernel half width")->capture_default_str();
  be->add_option("--gamma", ba.gamma, "Oversampling factor")->capture_default_str();
  be->add_option("--L", ba.L, "Highest Slepian order")->capture_default_str();
  be->add_option("--D", ba.D, "Samples per unit width")->capture_default_str();
  be->add_option("--M", ba.M, "Frequency grid size")->capture_default_str();
  be->add_option("--N", ba.N, "Samples per signal")->capture_default_str();
  be->add_option("--signals", ba.signals, "Number of signals")->capture_default_str();
  be->add_option("--evals", ba.evals, "Objective evaluation budget")->capture_default_str();
  be->add_option("--restarts", ba.restarts, "Optimizer restarts")->capture_default_str();
  be->add_option("--seed", ba.seed, "Seed for signals and optimizer")->required();
  be->add_option("--threads", ba.threads, "Worker threads, 0 for GRIDOPT_THREADS or all cores")->capture_default_str();
  be->add_option("--out", ba.out, "Output directory")->required();

  Bench2DArgs b2;
  auto* bd = app.add_subcommand("bench2d", "Radial k-space phantom reconstruction, kb vs optimized");
  bd->add_option("--size", b2.size, "Image size")->capture_default_str();
  bd->add_option("--spokes", b2.spokes, "Golden-angle spokes")->capture_default_str();
  bd->add_option("--radial", b2.radial, "Samples per spoke")->capture_default_str();
  bd->add_option("--W", b2.W, "Kernel half width")->capture_default_str();
  bd->add_option("--gamma", b2.gamma, "Oversampling factor")->capture_default_str();
  bd->add_option("--L", b2.L, "Highest Slepian order")->capture_default_str();
  bd->add_option("--D", b2.D, "Samples per unit width")->capture_default_str();
  bd->add_option("--M", b2.M, "Calibration grid size")->capture_default_str();
  bd->add_option("--evals", b2.evals, "Objective evaluation budget")->capture_default_str();
  bd->add_option("--restarts", b2.restarts, "Optimizer restarts")->capture_default_str();
  bd->add_option("--seed", b2.seed, "Optimizer seed")->required();
  bd->add_option("--out", b2.out, "Output directory")->required();

  SignalsArgs sa;
  auto* sg = app.add_subcommand("signals", "Write a random signal suite for a test target");
  sg->add_option("--test", sa.test_id, "Test 1, 2 or 3")->capture_default_str()->check(CLI::Range(1, 3));
  sg->add_option("--count", sa.count, "Number of signals")->capture_default_str();
  sg->add_option("--N", sa.N, "Samples per signal")->capture_default_str();
  sg->add_option("--M", sa.M, "Target grid size")->capture_default_str();
  sg->add_option("--seed", sa.seed, "Suite seed")->required();
  sg->add_option("--out", sa.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*cal) return run_calibrate(ca);
    if (*lam) return run_lambda(la);
    if (*nu) {
      if (!na.oracle && na.kernel.empty()) throw ArgumentError("nufft: --kernel is required unless --oracle is given");
      return run_nufft(na);
    }
    if (*be) return run_bench_cmd(ba);
    if (*bd) return run_bench2d_cmd(b2);
    if (*sg) return run_signals(sa);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
