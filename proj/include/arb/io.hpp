#pragma once

// CSV writers and readers for trajectories, eigensystems, matrices, wavelet
// coefficients and experiment reports. Doubles are written with %.*g at the
// configured precision (17 by default, which round-trips exactly).

#include "arb/core.hpp"
#include "arb/diagnostics.hpp"
#include "arb/process.hpp"
#include "arb/wavelet.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace arb::io {

class csv_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string num(double x, int precision = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

// ---------------------------------------------------------------------------
// Writers (to streams; callers own the files)

inline void write_trajectory(std::ostream& os, const Trajectory& traj, int precision = 17) {
  os << 'i';
  for (Eigen::Index m = 0; m < traj.dim(); ++m) os << ",f" << m + 1;
  os << '\n';
  for (Eigen::Index i = 0; i < traj.length(); ++i) {
    os << i;
    for (Eigen::Index m = 0; m < traj.dim(); ++m) os << ',' << num(traj.samples(i, m), precision);
    os << '\n';
  }
}

/// `j,value`, j starting at 1.
inline void write_vector(std::ostream& os, const Eigen::VectorXd& v, const std::string& col = "value",
                         int precision = 17) {
  os << "j," << col << '\n';
  for (Eigen::Index j = 0; j < v.size(); ++j) os << j + 1 << ',' << num(v[j], precision) << '\n';
}

/// Row-major with header `row,c1..cM`.
inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& a, int precision = 17) {
  os << "row";
  for (Eigen::Index c = 0; c < a.cols(); ++c) os << ",c" << c + 1;
  os << '\n';
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    os << r + 1;
    for (Eigen::Index c = 0; c < a.cols(); ++c) os << ',' << num(a(r, c), precision);
    os << '\n';
  }
}

/// `kind,level,shift,value` with kind alpha (scaling) or beta (detail).
inline void write_coefficients(std::ostream& os, const wavelet::CoeffArray& c, int precision = 17) {
  os << "kind,level,shift,value\n";
  const auto a = c.alpha();
  for (Eigen::Index k = 0; k < a.size(); ++k) os << "alpha," << c.coarsest() << ',' << k << ',' << num(a[k], precision) << '\n';
  for (int j = c.coarsest(); j <= c.finest(); ++j) {
    const auto b = c.beta(j);
    for (Eigen::Index k = 0; k < b.size(); ++k) os << "beta," << j << ',' << k << ',' << num(b[k], precision) << '\n';
  }
}

/// `i,s,value` on the dyadic grid s_i = i / N.
inline void write_samples(std::ostream& os, const Eigen::VectorXd& samples, int precision = 17) {
  os << "i,s,value\n";
  const double n = static_cast<double>(samples.size());
  for (Eigen::Index i = 0; i < samples.size(); ++i)
    os << i << ',' << num(static_cast<double>(i) / n, precision) << ',' << num(samples[i], precision) << '\n';
}

/// Long format `n,replicate,metric,value`; k_n is included as a metric.
inline void write_long_report(std::ostream& os, const std::vector<std::vector<ReplicateResult>>& results,
                              const std::vector<Metric>& metrics, int precision = 17) {
  os << "n,replicate,metric,value\n";
  for (const auto& row : results) {
    for (const auto& r : row) {
      for (Metric m : metrics) os << r.n << ',' << r.replicate << ',' << to_string(m) << ',' << num(r.get(m), precision) << '\n';
      os << r.n << ',' << r.replicate << ",k_n," << r.k_n << '\n';
    }
  }
}

/// `n,median_<metric>` rows, then `slope,<v>` and `r2,<v>` (NA without a fit).
inline void write_summary(std::ostream& os, const RateReport& rep, int precision = 17) {
  os << "n,median_" << to_string(rep.metric) << '\n';
  for (std::size_t g = 0; g < rep.grid.size(); ++g) os << rep.grid[g] << ',' << num(rep.medians[g], precision) << '\n';
  os << "slope," << (rep.fit ? num(rep.fit->slope, precision) : "NA") << '\n';
  os << "r2," << (rep.fit ? num(rep.fit->r2, precision) : "NA") << '\n';
}

/// Wide table for plotting: n, log sqrt(ln n/n), then median and log median per metric.
inline void write_plot_summary(std::ostream& os, const std::vector<RateReport>& reps, int precision = 17) {
  if (reps.empty()) return;
  os << "n,log_rate";
  for (const auto& r : reps) os << ",median_" << to_string(r.metric) << ",log_median_" << to_string(r.metric);
  os << '\n';
  for (std::size_t g = 0; g < reps[0].grid.size(); ++g) {
    os << reps[0].grid[g] << ',' << num(log_rate(reps[0].grid[g]), precision);
    for (const auto& r : reps) os << ',' << num(r.medians[g], precision) << ',' << num(std::log(r.medians[g]), precision);
    os << '\n';
  }
}

inline void write_tail(std::ostream& os, const std::vector<TailRow>& rows, int precision = 17) {
  os << "n,eta,frequency,median_k_n,shape_proxy\n";
  for (const auto& r : rows)
    os << r.n << ',' << num(r.eta, precision) << ',' << num(r.frequency, precision) << ',' << r.k_n << ','
       << num(r.shape_proxy, precision) << '\n';
}

inline void write_audit(std::ostream& os, const std::vector<BoundReport>& reps, int precision = 17) {
  os << "n,replicate,k_n,record,lhs,rhs,holds,status\n";
  for (const auto& rep : reps)
    for (const auto& r : rep.records)
      os << r.n << ',' << r.replicate << ',' << rep.k_n << ',' << r.name << ',' << num(r.lhs, precision) << ','
         << num(r.rhs, precision) << ',' << (r.holds ? 1 : 0) << ',' << to_string(r.status) << '\n';
}

/// Per record: count, holds rate, and how many were violated or informational.
inline void write_audit_summary(std::ostream& os, const std::vector<BoundReport>& reps, int precision = 17) {
  os << "record,count,holds_rate,violated,informational\n";
  if (reps.empty()) return;
  for (std::size_t i = 0; i < reps[0].records.size(); ++i) {
    const std::string& name = reps[0].records[i].name;
    int count = 0, holds = 0, violated = 0, info = 0;
    for (const auto& rep : reps) {
      const auto* r = rep.find(name);
      if (!r) continue;
      ++count;
      holds += r->holds ? 1 : 0;
      violated += r->status == AuditStatus::Violated ? 1 : 0;
      info += r->status == AuditStatus::Informational ? 1 : 0;
    }
    os << name << ',' << count << ',' << num(static_cast<double>(holds) / count, precision) << ',' << violated << ','
       << info << '\n';
  }
}

// ---------------------------------------------------------------------------
// Readers

namespace detail_csv {

inline std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_cell(const std::string& s, const std::string& where) {
  std::string t = s;
  while (!t.empty() && (t.back() == '\r' || t.back() == ' ')) t.pop_back();
  std::size_t b = 0;
  while (b < t.size() && t[b] == ' ') ++b;
  double out = 0;
  const char* first = t.data() + b;
  const char* last = t.data() + t.size();
  const auto [p, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || p != last || first == last) throw csv_error(where + ": malformed number '" + s + "'");
  return out;
}

/// Reads a numeric table with one header line; every row must have `width` cells.
inline Eigen::MatrixXd read_table(std::istream& in, const std::string& origin, std::vector<std::string>& header) {
  std::string line;
  if (!std::getline(in, line)) throw csv_error(origin + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  header = cells(line);
  const auto width = header.size();
  std::vector<double> data;
  int lineno = 1;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = cells(line);
    const std::string where = origin + ": line " + std::to_string(lineno);
    if (c.size() != width)
      throw csv_error(where + ": expected " + std::to_string(width) + " fields, found " + std::to_string(c.size()));
    for (const auto& s : c) data.push_back(parse_cell(s, where));
    ++rows;
  }
  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(width));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index k = 0; k < out.cols(); ++k) out(r, k) = data[static_cast<std::size_t>(r * out.cols() + k)];
  return out;
}

inline std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw csv_error("cannot read '" + path + "'");
  return in;
}

}  // namespace detail_csv

inline Trajectory read_trajectory(std::istream& in, const std::string& origin = "trajectory") {
  std::vector<std::string> header;
  const Eigen::MatrixXd t = detail_csv::read_table(in, origin, header);
  if (header.size() < 2 || header[0] != "i") throw csv_error(origin + ": line 1: expected header 'i,f1,...,fM'");
  for (std::size_t m = 1; m < header.size(); ++m)
    if (header[m] != "f" + std::to_string(m)) throw csv_error(origin + ": line 1: unexpected column '" + header[m] + "'");
  if (t.rows() < 2) throw csv_error(origin + ": need at least 2 observations");
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    if (t(i, 0) != static_cast<double>(i))
      throw csv_error(origin + ": line " + std::to_string(i + 2) + ": time index out of sequence");
  Eigen::MatrixXd s = t.rightCols(t.cols() - 1);
  if (!s.allFinite()) throw csv_error(origin + ": non-finite sample");
  return {std::move(s), 0, 0};
}

inline Trajectory read_trajectory(const std::string& path) {
  auto in = detail_csv::open(path);
  return read_trajectory(in, path);
}

inline Eigen::VectorXd read_vector(std::istream& in, const std::string& origin = "vector") {
  std::vector<std::string> header;
  const Eigen::MatrixXd t = detail_csv::read_table(in, origin, header);
  if (header.size() != 2 || header[0] != "j") throw csv_error(origin + ": line 1: expected header 'j,<name>'");
  return t.col(1);
}

inline Eigen::MatrixXd read_matrix(std::istream& in, const std::string& origin = "matrix") {
  std::vector<std::string> header;
  const Eigen::MatrixXd t = detail_csv::read_table(in, origin, header);
  if (header.size() < 2 || header[0] != "row") throw csv_error(origin + ": line 1: expected header 'row,c1,...'");
  return t.rightCols(t.cols() - 1);
}

inline wavelet::CoeffArray read_coefficients(std::istream& in, const std::string& origin = "coefficients") {
  std::string line;
  if (std::getline(in, line) && !line.empty() && line.back() == '\r') line.pop_back();
  if (line != "kind,level,shift,value")
    throw csv_error(origin + ": line 1: expected header 'kind,level,shift,value'");
  std::vector<double> flat;
  int coarsest = -1, finest = -1, lineno = 1;
  std::size_t alpha_count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = origin + ": line " + std::to_string(lineno);
    const auto c = detail_csv::cells(line);
    if (c.size() != 4) throw csv_error(where + ": expected 4 fields");
    const int level = static_cast<int>(detail_csv::parse_cell(c[1], where));
    const auto shift = static_cast<std::size_t>(detail_csv::parse_cell(c[2], where));
    const double v = detail_csv::parse_cell(c[3], where);
    if (c[0] == "alpha") {
      if (coarsest < 0) coarsest = level;
      if (level != coarsest || shift != alpha_count || finest >= 0) throw csv_error(where + ": alpha out of order");
      ++alpha_count;
    } else if (c[0] == "beta") {
      if (coarsest < 0 || alpha_count != (std::size_t{1} << coarsest)) throw csv_error(where + ": beta before alpha block");
      const std::size_t expected = flat.size();
      if (expected != (std::size_t{1} << level) + shift) throw csv_error(where + ": beta out of order");
      finest = level;
    } else {
      throw csv_error(where + ": unknown kind '" + c[0] + "'");
    }
    flat.push_back(v);
  }
  if (finest < 0) throw csv_error(origin + ": no detail coefficients");
  return {Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size())), coarsest, finest};
}

}  // namespace arb::io
