#pragma once

// File formats: kernel JSON, CSV tables with 17 significant digits.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gridopt/calibrate.hpp"
#include "gridopt/error_shape.hpp"
#include "gridopt/errors.hpp"
#include "gridopt/kernel_table.hpp"
#include "gridopt/nufft.hpp"

namespace gridopt::io {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ArgumentError("csv: missing column '" + name + "'");
  }
};

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

inline double parse_double(const std::string& s) {
  if (s.empty()) throw ArgumentError("csv: empty numeric field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw ArgumentError("csv: bad number '" + s + "'");
  return v;
}

// First line is the header; every later nonblank line must have one number
// per header field.
inline Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError(path + ": empty file");
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw ArgumentError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                          " fields");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void ensure_ok(const std::ofstream& out, const std::string& path) {
  if (!out) throw ArgumentError("cannot write " + path);
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path, std::ios::binary);
  ensure_ok(out, path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << fmt(columns[c][r]);
    out << '\n';
  }
  out.flush();
  ensure_ok(out, path);
}

// ------------------------------------------------------------ kernel JSON

inline nlohmann::json kernel_to_json(const KernelTable& k) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& v : k.samples()) samples.push_back({v.real(), v.imag()});
  return {{"W", k.W()}, {"D", k.D()}, {"samples", std::move(samples)}};
}

inline KernelTable kernel_from_json(const nlohmann::json& j) {
  try {
    const int W = j.at("W").get<int>();
    const int D = j.at("D").get<int>();
    std::vector<cplx> s;
    for (const auto& p : j.at("samples")) {
      if (!p.is_array() || p.size() != 2) throw ArgumentError("kernel json: samples must be [re, im] pairs");
      s.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return KernelTable(W, D, std::move(s));
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("kernel json: ") + e.what());
  }
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(path + ": " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  ensure_ok(out, path);
  out << text;
  out.flush();
  ensure_ok(out, path);
}

inline void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

inline KernelTable read_kernel(const std::string& path) { return kernel_from_json(read_json(path)); }

inline void write_kernel(const std::string& path, const KernelTable& k) { write_json(path, kernel_to_json(k)); }

// ------------------------------------------------------------ tables

inline void write_lambda(const std::string& path, const ErrorShape& e) {
  write_csv(path, {"x", "lambda"}, {frequency_grid(e.M), e.values});
}

inline void write_h(const std::string& path, const DeapodizationTable& h) {
  std::vector<double> re, im;
  for (const auto& v : h.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  write_csv(path, {"x", "h_re", "h_im"}, {frequency_grid(h.M), re, im});
}

inline void write_trace(const std::string& path, const std::vector<TracePoint>& trace) {
  std::vector<double> e, f;
  for (const auto& p : trace) {
    e.push_back(static_cast<double>(p.eval));
    f.push_back(p.objective);
  }
  write_csv(path, {"eval", "objective"}, {e, f});
}

// x,eta rows on the x_m grid of size M = row count.
inline TargetShape read_target(const std::string& path) {
  const auto t = read_csv(path);
  const auto cx = t.column("x"), ce = t.column("eta");
  const std::size_t M = t.rows.size();
  detail::require(M >= 2, path + ": need at least two rows");
  std::vector<double> eta(M);
  for (std::size_t m = 0; m < M; ++m) {
    if (std::abs(t.rows[m][cx] - grid_point(m, M)) > 1e-9)
      throw ArgumentError(path + ": row " + std::to_string(m) + " is not on the grid x_m = -1/2 + m/M");
    eta[m] = t.rows[m][ce];
  }
  auto target = target_shape(TargetKind::custom, eta, M);
  target.label = "custom:" + path;
  return target;
}

inline void write_target(const std::string& path, const TargetShape& t) {
  write_csv(path, {"x", "eta"}, {frequency_grid(t.M), t.values});
}

// ------------------------------------------------------------ signals

using AnySignal = std::variant<NonuniformSignal, Signal2D>;

inline AnySignal read_signal(const std::string& path) {
  const auto t = read_csv(path);
  const auto has = [&](const char* n) {
    for (const auto& h : t.header)
      if (h == n) return true;
    return false;
  };
  const auto cre = t.column("u_re"), cim = t.column("u_im");
  if (has("tx")) {
    const auto cx = t.column("tx"), cy = t.column("ty");
    Signal2D s;
    for (const auto& r : t.rows) {
      s.amplitudes.emplace_back(r[cre], r[cim]);
      s.tx.push_back(r[cx]);
      s.ty.push_back(r[cy]);
    }
    s.validate();
    return s;
  }
  const auto ct = t.column("t");
  NonuniformSignal s;
  for (const auto& r : t.rows) {
    s.amplitudes.emplace_back(r[cre], r[cim]);
    s.times.push_back(r[ct]);
  }
  s.validate();
  return s;
}

inline void write_signal(const std::string& path, const NonuniformSignal& s) {
  std::vector<double> re, im;
  for (const auto& v : s.amplitudes) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  write_csv(path, {"t", "u_re", "u_im"}, {s.times, re, im});
}

inline void write_signal(const std::string& path, const Signal2D& s) {
  std::vector<double> re, im;
  for (const auto& v : s.amplitudes) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  write_csv(path, {"tx", "ty", "u_re", "u_im"}, {s.tx, s.ty, re, im});
}

inline void write_spectrum(const std::string& path, const Spectrum& y) {
  std::vector<double> re, im;
  for (const auto& v : y.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  write_csv(path, {"x", "y_re", "y_im"}, {frequency_grid(y.M), re, im});
}

// First line "M,gamma" with the values, then M rows of M (re,im) pairs.
inline void write_spectrum(const std::string& path, const Spectrum2D& y, double gamma) {
  std::ofstream out(path, std::ios::binary);
  ensure_ok(out, path);
  out << y.M << ',' << fmt(gamma) << '\n';
  for (std::size_t iy = 0; iy < y.M; ++iy) {
    for (std::size_t ix = 0; ix < y.M; ++ix) {
      const auto& v = y.at(iy, ix);
      out << (ix ? "," : "") << fmt(v.real()) << ',' << fmt(v.imag());
    }
    out << '\n';
  }
  out.flush();
  ensure_ok(out, path);
}

// Row-major square grid of numbers, no header.
inline void write_grid(const std::string& path, const std::vector<double>& values, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  ensure_ok(out, path);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) out << (c ? "," : "") << fmt(values[r * n + c]);
    out << '\n';
  }
  out.flush();
  ensure_ok(out, path);
}

}  // namespace gridopt::io
