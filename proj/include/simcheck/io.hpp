#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "simcheck/dataset.hpp"
#include "simcheck/errors.hpp"
#include "simcheck/experiments.hpp"
#include "simcheck/pipeline.hpp"

namespace simcheck {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

// Round-trippable, locale-independent double formatting.
inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline constexpr Eigen::Index kMinRows = 10;

// CSV with header `y,x1,...,xp`. Every cell must be a finite number.
inline Dataset parse_dataset(std::istream& in, Eigen::Index min_rows = kMinRows) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset: empty input");
  std::vector<std::string> header;
  for (auto cell : detail::split_csv(line)) header.emplace_back(cell);
  if (header.size() < 3) throw InputError("dataset: header must be y,x1,...,xp with p >= 2");
  if (header[0] != "y") throw InputError("dataset: first header column must be 'y'");
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "x" + std::to_string(j))
      throw InputError("dataset: header column " + std::to_string(j + 1) + " must be 'x" + std::to_string(j) +
                       "', found '" + header[j] + "'");
  }
  const std::size_t cols = header.size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    const std::size_t row_no = rows + 1;
    if (cells.size() != cols)
      throw InputError("dataset: row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(cols));
    for (std::size_t j = 0; j < cols; ++j) {
      double v = 0.0;
      const auto cell = cells[j];
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw InputError("dataset: row " + std::to_string(row_no) + ", column '" + header[j] +
                         "': invalid numeric value '" + std::string(cell) + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (static_cast<Eigen::Index>(rows) < min_rows)
    throw InputError("dataset: need at least " + std::to_string(min_rows) + " rows, found " + std::to_string(rows));
  Dataset d;
  d.y.resize(static_cast<Eigen::Index>(rows));
  d.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols - 1));
  for (std::size_t i = 0; i < rows; ++i) {
    d.y(static_cast<Eigen::Index>(i)) = values[i * cols];
    for (std::size_t j = 1; j < cols; ++j)
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) = values[i * cols + j];
  }
  return d;
}

inline Dataset load_dataset(const std::string& path, Eigen::Index min_rows = kMinRows) {
  std::ifstream in(path);
  if (!in) throw InputError("dataset: cannot open '" + path + "'");
  return parse_dataset(in, min_rows);
}

inline void write_dataset(std::ostream& out, const Dataset& d) {
  out << "y";
  for (Eigen::Index j = 0; j < d.p(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    out << detail::fmt(d.y(i));
    for (Eigen::Index j = 0; j < d.p(); ++j) out << "," << detail::fmt(d.x(i, j));
    out << "\n";
  }
}

// Ordered key/value pairs of a test report; the same fields appear in every
// successful run.
inline std::vector<std::pair<std::string, std::string>> report_fields(const TestReport& r) {
  using detail::fmt;
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](std::string k, std::string v) { kv.emplace_back(std::move(k), std::move(v)); };
  std::string beta;
  for (Eigen::Index j = 0; j < r.fit.direction.dim(); ++j) beta += (j ? ";" : "") + fmt(r.fit.direction.beta()(j));
  add("test", r.kind == TestKind::Mean ? "mean" : "law");
  add("n", std::to_string(r.n));
  add("p", std::to_string(r.p));
  add("I_n", fmt(r.statistic.i_n));
  add("v_n", fmt(r.statistic.v_n));
  add("T_n", fmt(r.statistic.t_n));
  add("asymptotic_p_value", fmt(r.asymptotic_p_value));
  add("asymptotic_reject", r.asymptotic_reject ? "1" : "0");
  add("bootstrap_p_value", fmt(r.bootstrap.p_value));
  add("bootstrap_critical_value", fmt(r.bootstrap.critical_value));
  add("bootstrap_reject", r.bootstrap.reject() ? "1" : "0");
  add("B", std::to_string(r.bootstrap.B));
  add("bootstrap_failed", std::to_string(r.bootstrap.failed));
  add("bootstrap_redraws", std::to_string(r.bootstrap.redraws));
  add("alpha", fmt(r.alpha));
  add("c", fmt(r.c));
  add("h", fmt(r.h));
  add("h_override", r.h_overridden ? "1" : "0");
  add("beta_hat", beta);
  add("g", fmt(r.fit.bandwidth_g));
  add("raw_norm", fmt(r.fit.raw_norm));
  add("g_y", r.fit.gy ? fmt(*r.fit.gy) : "NA");
  add("objective", fmt(r.fit.objective));
  add("optimizer_evals", std::to_string(r.fit.optimizer_evals));
  add("optimizer_converged", r.fit.converged ? "1" : "0");
  add("seed", std::to_string(r.seed));
  add("warn_floor_events", std::to_string(r.fit.floor_events));
  add("warn_bandwidth_range", r.fit.bandwidth_out_of_range ? "1" : "0");
  add("warn_complement_fallback", r.complement_fallback ? "1" : "0");
  add("warn_bootstrap_degraded", r.bootstrap.degraded ? "1" : "0");
  return kv;
}

inline std::string format_report(const TestReport& r) {
  std::ostringstream os;
  for (const auto& [k, v] : report_fields(r)) os << k << "=" << v << "\n";
  return os.str();
}

// Two-line CSV: header of field names, then values.
inline std::string format_report_csv(const TestReport& r) {
  const auto kv = report_fields(r);
  std::ostringstream os;
  for (std::size_t i = 0; i < kv.size(); ++i) os << (i ? "," : "") << kv[i].first;
  os << "\n";
  for (std::size_t i = 0; i < kv.size(); ++i) os << (i ? "," : "") << kv[i].second;
  os << "\n";
  return os.str();
}

inline std::string format_monte_carlo_csv(const MonteCarloReport& rep) {
  using detail::fmt;
  std::ostringstream os;
  os << "model,n,p,delta,c,method,rejections,replications,failed,rate,seed\n";
  for (const auto& r : rep.rows) {
    os << r.model << "," << r.n << "," << r.p << "," << fmt(r.delta) << "," << fmt(r.c) << "," << method_name(r.method)
       << "," << r.rejections << "," << r.replications << "," << r.failed << "," << fmt(r.rate()) << "," << r.seed
       << "\n";
  }
  return os.str();
}

// x (c or delta) against rate, one column per method.
inline std::string format_plot_csv(const MonteCarloReport& rep) {
  using detail::fmt;
  std::vector<double> xs;
  for (const auto& r : rep.rows) {
    const double x = rep.x_axis == "c" ? r.c : r.delta;
    if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
  }
  std::ostringstream os;
  os << rep.x_axis << ",asymptotic,bootstrap\n";
  for (double x : xs) {
    const auto* a = rep.find(x, Method::Asymptotic);
    const auto* b = rep.find(x, Method::Bootstrap);
    os << fmt(x) << "," << (a ? fmt(a->rate()) : "NA") << "," << (b ? fmt(b->rate()) : "NA") << "\n";
  }
  return os.str();
}

}  // namespace simcheck
