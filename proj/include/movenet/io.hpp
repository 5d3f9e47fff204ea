#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "movenet/imputation.hpp"
#include "movenet/mcmc.hpp"
#include "movenet/observations.hpp"
#include "movenet/types.hpp"

namespace movenet {

/// Shortest round-trip decimal form of a double.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace detail {

inline std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  while (!s.empty() && !notspace(s.back())) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && !notspace(s[b])) ++b;
  return s.substr(b);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline bool parse_full_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

[[noreturn]] inline void io_fail(const std::string& path, std::size_t line,
                                 const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw std::runtime_error(msg.str());
}

// Days since 1970-01-01 of a proleptic Gregorian date.
inline long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

// ISO-8601 date or datetime ("2016-08-17", "2016-08-17T06:30",
// "2016-08-17 06:30:15.5", optional trailing Z) -> hours since the epoch.
inline bool parse_iso8601_hours(const std::string& field, double& out) {
  std::string s = field;
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  std::string date = s, time;
  const auto sep = s.find_first_of("T ");
  if (sep != std::string::npos) {
    date = s.substr(0, sep);
    time = s.substr(sep + 1);
  }
  int y = 0, mo = 0, d = 0;
  char tail = 0;
  if (std::sscanf(date.c_str(), "%d-%d-%d%c", &y, &mo, &d, &tail) != 3) return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return false;
  double hh = 0.0, mi = 0.0, ss = 0.0;
  if (!time.empty()) {
    int h = 0, m = 0;
    double sec = 0.0;
    const int got = std::sscanf(time.c_str(), "%d:%d:%lf%c", &h, &m, &sec, &tail);
    if (got == 3) {
      hh = h;
      mi = m;
      ss = sec;
    } else if (std::sscanf(time.c_str(), "%d:%d%c", &h, &m, &tail) == 2) {
      hh = h;
      mi = m;
    } else {
      return false;
    }
    if (h < 0 || h > 23 || m < 0 || m > 59 || sec < 0.0 || sec >= 61.0) return false;
  }
  out = 24.0 * static_cast<double>(days_from_civil(y, mo, d)) + hh + mi / 60.0 +
        ss / 3600.0;
  return true;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline void expect_header(const std::string& path, const std::vector<std::string>& lines,
                          const std::string& header) {
  if (lines.empty()) io_fail(path, 1, "empty file");
  if (trim(lines.front()) != header)
    io_fail(path, 1, "expected header '" + header + "', got '" + trim(lines.front()) + "'");
}

inline void check_id_writable(const std::string& id) {
  if (id.empty() || id.find(',') != std::string::npos ||
      id.find('\n') != std::string::npos)
    throw std::invalid_argument("id '" + id + "' cannot be written to csv");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace detail

/// Maps textual error classes in the telemetry error_sd column to values.
struct TelemetryOptions {
  std::map<std::string, double> error_class_map;
};

/// Reads `id,time,x,y,error_sd`. Times are either all numeric hours or all
/// ISO-8601 datetimes; mixing the two is an error. Rows are sorted by
/// (id, time) with ids kept in first-appearance order; a repeated (id, time)
/// pair and a nonpositive error sd are errors.
inline ObservationSet read_telemetry_csv(const std::string& path,
                                         const TelemetryOptions& opt = {}) {
  const auto lines = detail::read_lines(path);
  detail::expect_header(path, lines, "id,time,x,y,error_sd");

  struct Row {
    std::string id;
    double time, x, y, sd;
    std::size_t line;
  };
  std::vector<Row> rows;
  bool any_numeric = false, any_datetime = false;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const auto f = detail::split_csv(lines[ln]);
    if (f.size() != 5) detail::io_fail(path, ln + 1, "expected 5 columns");
    Row r;
    r.line = ln + 1;
    r.id = f[0];
    if (r.id.empty()) detail::io_fail(path, ln + 1, "empty id");
    if (detail::parse_full_double(f[1], r.time)) {
      any_numeric = true;
    } else if (detail::parse_iso8601_hours(f[1], r.time)) {
      any_datetime = true;
    } else {
      detail::io_fail(path, ln + 1, "unparseable time '" + f[1] + "'");
    }
    if (!detail::parse_full_double(f[2], r.x) || !detail::parse_full_double(f[3], r.y))
      detail::io_fail(path, ln + 1, "unparseable coordinate");
    if (!detail::parse_full_double(f[4], r.sd)) {
      const auto it = opt.error_class_map.find(f[4]);
      if (it == opt.error_class_map.end())
        detail::io_fail(path, ln + 1, "unknown error class '" + f[4] + "'");
      r.sd = it->second;
    }
    if (!std::isfinite(r.time) || !std::isfinite(r.x) || !std::isfinite(r.y))
      detail::io_fail(path, ln + 1, "non-finite value");
    if (!(r.sd > 0.0)) detail::io_fail(path, ln + 1, "error_sd must be > 0");
    rows.push_back(std::move(r));
  }
  if (any_numeric && any_datetime)
    throw std::runtime_error(path + ": numeric and datetime times are mixed");
  if (rows.empty()) detail::io_fail(path, 1, "no data rows");

  std::map<std::string, int> order;
  std::vector<std::string> ids;
  for (const auto& r : rows)
    if (order.emplace(r.id, static_cast<int>(ids.size())).second) ids.push_back(r.id);

  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    const int oa = order[a.id], ob = order[b.id];
    return oa != ob ? oa < ob : a.time < b.time;
  });
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k].id == rows[k - 1].id && rows[k].time == rows[k - 1].time) {
      std::ostringstream msg;
      msg << path << ": duplicate observation for id '" << rows[k].id << "' at time "
          << fmt_double(rows[k].time) << " (lines " << rows[k - 1].line << " and "
          << rows[k].line << ")";
      throw std::runtime_error(msg.str());
    }

  ObservationSet obs;
  for (const auto& id : ids) {
    Track tr;
    tr.id = id;
    for (const auto& r : rows)
      if (r.id == id) {
        tr.time.push_back(r.time);
        tr.x.push_back(r.x);
        tr.y.push_back(r.y);
        tr.error_sd.push_back(r.sd);
      }
    obs.tracks.push_back(std::move(tr));
  }
  obs.validate();
  return obs;
}

inline void write_telemetry_csv(const std::string& path, const ObservationSet& obs) {
  obs.validate();
  auto out = detail::open_out(path);
  out << "id,time,x,y,error_sd\n";
  for (const auto& tr : obs.tracks) {
    detail::check_id_writable(tr.id);
    for (std::size_t k = 0; k < tr.size(); ++k)
      out << tr.id << ',' << fmt_double(tr.time[k]) << ',' << fmt_double(tr.x[k]) << ','
          << fmt_double(tr.y[k]) << ',' << fmt_double(tr.error_sd[k]) << '\n';
  }
}

inline void write_paths_csv(const std::string& path, const TrajectoryGrid& g) {
  g.validate();
  if (g.ids.empty()) throw std::invalid_argument("write_paths_csv: grid has no ids");
  for (const auto& id : g.ids) detail::check_id_writable(id);
  auto out = detail::open_out(path);
  out << "id,t,x,y\n";
  for (int t = 0; t < g.T(); ++t)
    for (int i = 0; i < g.n(); ++i)
      out << g.ids[i] << ',' << fmt_double(g.time_at(t)) << ','
          << fmt_double(g.pos[t](i, 0)) << ',' << fmt_double(g.pos[t](i, 1)) << '\n';
}

namespace detail {

struct PathRow {
  std::string id;
  double t, x, y;
};

// Shared core of the paths and bank readers: a complete rectangle of
// (id, time) cells on a uniformly spaced time grid.
inline TrajectoryGrid grid_from_rows(const std::string& path,
                                     const std::vector<PathRow>& rows) {
  std::vector<std::string> ids;
  std::map<std::string, int> id_index;
  std::vector<double> times;
  std::map<double, int> time_index;
  struct Cell {
    double x, y;
    bool seen = false;
  };
  std::vector<std::vector<Cell>> cells;  // [t][i]

  for (const auto& r : rows) {
    if (id_index.emplace(r.id, static_cast<int>(ids.size())).second) ids.push_back(r.id);
    if (time_index.emplace(r.t, static_cast<int>(times.size())).second)
      times.push_back(r.t);
    const int i = id_index[r.id];
    const int tt = time_index[r.t];
    if (tt >= static_cast<int>(cells.size())) cells.resize(tt + 1);
    if (i >= static_cast<int>(cells[tt].size())) cells[tt].resize(i + 1);
    if (cells[tt][i].seen)
      throw std::runtime_error(path + ": duplicate row for id '" + r.id + "' at time " +
                               fmt_double(r.t));
    cells[tt][i] = {r.x, r.y, true};
  }
  if (ids.size() < 2) throw std::runtime_error(path + ": need at least 2 ids");
  if (times.size() < 2) throw std::runtime_error(path + ": need at least 2 times");

  std::vector<int> time_order(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) time_order[k] = static_cast<int>(k);
  std::sort(time_order.begin(), time_order.end(),
            [&](int a, int b) { return times[a] < times[b]; });
  std::vector<double> sorted_times;
  for (int k : time_order) sorted_times.push_back(times[k]);
  const double spacing = sorted_times[1] - sorted_times[0];
  if (!(spacing > 0.0)) throw std::runtime_error(path + ": times are not distinct");
  for (std::size_t k = 1; k < sorted_times.size(); ++k)
    if (std::abs(sorted_times[k] - sorted_times[k - 1] - spacing) > 1e-9 * spacing)
      throw std::runtime_error(path + ": grid times are not uniformly spaced");

  TrajectoryGrid g;
  g.ids = ids;
  g.time_step = spacing;
  g.start_time = sorted_times.front();
  for (int k : time_order) {
    if (cells[k].size() != ids.size())
      throw std::runtime_error(path + ": missing rows at time " + fmt_double(times[k]));
    Eigen::MatrixX2d s(static_cast<int>(ids.size()), 2);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!cells[k][i].seen)
        throw std::runtime_error(path + ": missing row for id '" + ids[i] + "' at time " +
                                 fmt_double(times[k]));
      s(static_cast<int>(i), 0) = cells[k][i].x;
      s(static_cast<int>(i), 1) = cells[k][i].y;
    }
    g.pos.push_back(std::move(s));
  }
  g.validate();
  return g;
}

}  // namespace detail

/// Reads `id,t,x,y` back into a grid. Every id must appear at every time and
/// the times must be uniformly spaced.
inline TrajectoryGrid read_paths_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  detail::expect_header(path, lines, "id,t,x,y");
  std::vector<detail::PathRow> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const auto f = detail::split_csv(lines[ln]);
    if (f.size() != 4) detail::io_fail(path, ln + 1, "expected 4 columns");
    detail::PathRow r;
    r.id = f[0];
    if (!detail::parse_full_double(f[1], r.t) || !detail::parse_full_double(f[2], r.x) ||
        !detail::parse_full_double(f[3], r.y))
      detail::io_fail(path, ln + 1, "unparseable number");
    rows.push_back(std::move(r));
  }
  return detail::grid_from_rows(path, rows);
}

/// Edge table over pairs and times: a truth network (`w` column) or a
/// posterior/baseline summary (`mean,sd` columns).
struct NetworkTable {
  std::vector<std::string> ids;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> mean;  // n x n per time
  std::vector<Eigen::MatrixXd> sd;    // empty when the file carried none
  int n() const { return static_cast<int>(ids.size()); }
  int T() const { return static_cast<int>(times.size()); }
};

inline void write_truth_network_csv(const std::string& path, const DynamicNetwork& W,
                                    const std::vector<std::string>& ids,
                                    const std::vector<double>& times) {
  const int n = W.n_individuals(), T = W.n_times();
  if (static_cast<int>(ids.size()) != n || static_cast<int>(times.size()) != T)
    throw std::invalid_argument("write_truth_network_csv: shape mismatch");
  for (const auto& id : ids) detail::check_id_writable(id);
  auto out = detail::open_out(path);
  out << "i,j,t,w\n";
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        out << ids[i] << ',' << ids[j] << ',' << fmt_double(times[t]) << ','
            << (W.edge(i, j, t) ? 1 : 0) << '\n';
}

inline void write_edge_summary_csv(const std::string& path,
                                   const std::vector<Eigen::MatrixXd>& mean,
                                   const std::vector<Eigen::MatrixXd>& sd,
                                   const std::vector<std::string>& ids,
                                   const std::vector<double>& times) {
  const int T = static_cast<int>(times.size());
  const int n = static_cast<int>(ids.size());
  if (static_cast<int>(mean.size()) != T || static_cast<int>(sd.size()) != T)
    throw std::invalid_argument("write_edge_summary_csv: shape mismatch");
  for (const auto& id : ids) detail::check_id_writable(id);
  auto out = detail::open_out(path);
  out << "i,j,t,mean,sd\n";
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        out << ids[i] << ',' << ids[j] << ',' << fmt_double(times[t]) << ','
            << fmt_double(mean[t](i, j)) << ',' << fmt_double(sd[t](i, j)) << '\n';
}

/// Reads either `i,j,t,w` or `i,j,t,mean,sd`. Ids keep first-appearance
/// order; every pair must be present at every time, in one orientation.
inline NetworkTable read_network_table(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) detail::io_fail(path, 1, "empty file");
  const std::string header = detail::trim(lines.front());
  bool has_sd;
  if (header == "i,j,t,w")
    has_sd = false;
  else if (header == "i,j,t,mean,sd")
    has_sd = true;
  else
    detail::io_fail(path, 1, "unrecognized network header '" + header + "'");

  struct Row {
    std::string i, j;
    double t, mean, sd;
  };
  std::vector<Row> rows;
  std::vector<std::string> ids;
  std::map<std::string, int> id_index;
  std::vector<double> times;
  std::map<double, int> time_index;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const auto f = detail::split_csv(lines[ln]);
    if (f.size() != (has_sd ? 5u : 4u))
      detail::io_fail(path, ln + 1, "wrong column count");
    Row r;
    r.i = f[0];
    r.j = f[1];
    r.sd = 0.0;
    if (!detail::parse_full_double(f[2], r.t) || !detail::parse_full_double(f[3], r.mean))
      detail::io_fail(path, ln + 1, "unparseable number");
    if (has_sd && !detail::parse_full_double(f[4], r.sd))
      detail::io_fail(path, ln + 1, "unparseable sd");
    if (r.i == r.j) detail::io_fail(path, ln + 1, "self edge");
    if (id_index.emplace(r.i, static_cast<int>(ids.size())).second) ids.push_back(r.i);
    if (id_index.emplace(r.j, static_cast<int>(ids.size())).second) ids.push_back(r.j);
    if (time_index.emplace(r.t, static_cast<int>(times.size())).second)
      times.push_back(r.t);
    rows.push_back(std::move(r));
  }
  const int n = static_cast<int>(ids.size());
  if (n < 2) throw std::runtime_error(path + ": need at least 2 ids");

  std::vector<int> time_order(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) time_order[k] = static_cast<int>(k);
  std::sort(time_order.begin(), time_order.end(),
            [&](int a, int b) { return times[a] < times[b]; });
  std::vector<int> time_rank(times.size());
  for (std::size_t k = 0; k < time_order.size(); ++k) time_rank[time_order[k]] = static_cast<int>(k);

  NetworkTable tab;
  tab.ids = ids;
  for (int k : time_order) tab.times.push_back(times[k]);
  const int T = tab.T();
  tab.mean.assign(T, Eigen::MatrixXd::Constant(n, n, -1.0));
  if (has_sd) tab.sd.assign(T, Eigen::MatrixXd::Zero(n, n));
  for (const auto& r : rows) {
    const int a = id_index[r.i], b = id_index[r.j];
    const int t = time_rank[time_index[r.t]];
    if (tab.mean[t](a, b) >= 0.0)
      throw std::runtime_error(path + ": duplicate pair (" + r.i + ", " + r.j + ")");
    tab.mean[t](a, b) = tab.mean[t](b, a) = r.mean;
    if (has_sd) tab.sd[t](a, b) = tab.sd[t](b, a) = r.sd;
  }
  for (int t = 0; t < T; ++t) {
    tab.mean[t].diagonal().setZero();
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (tab.mean[t](a, b) < 0.0)
          throw std::runtime_error(path + ": missing pair (" + ids[a] + ", " + ids[b] +
                                   ") at time " + fmt_double(tab.times[t]));
  }
  return tab;
}

inline void write_chains_csv(const std::string& path, const PosteriorSamples& s) {
  auto out = detail::open_out(path);
  out << "iter,param,value\n";
  for (const auto& name : PosteriorSamples::scalar_names()) {
    const auto& chain = s.chain(name);
    for (std::size_t k = 0; k < chain.size(); ++k)
      out << k << ',' << name << ',' << fmt_double(chain[k]) << '\n';
  }
  for (std::size_t k = 0; k < s.imputation_index.size(); ++k)
    out << k << ",imputation_index," << s.imputation_index[k] << '\n';
}

inline std::map<std::string, std::vector<double>> read_chains_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  detail::expect_header(path, lines, "iter,param,value");
  std::map<std::string, std::vector<double>> chains;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const auto f = detail::split_csv(lines[ln]);
    if (f.size() != 3) detail::io_fail(path, ln + 1, "expected 3 columns");
    double v;
    if (!detail::parse_full_double(f[2], v))
      detail::io_fail(path, ln + 1, "unparseable value");
    chains[f[1]].push_back(v);
  }
  if (chains.empty()) detail::io_fail(path, 1, "no data rows");
  return chains;
}

inline void write_bank_csv(const std::string& path, const ImputationBank& bank) {
  bank.validate();
  const auto& ids = bank.draws.front().ids;
  if (ids.empty()) throw std::invalid_argument("write_bank_csv: draws have no ids");
  for (const auto& id : ids) detail::check_id_writable(id);
  auto out = detail::open_out(path);
  out << "draw_index,id,t,x,y\n";
  for (int k = 0; k < bank.K(); ++k) {
    const auto& g = bank.draws[k];
    for (int t = 0; t < g.T(); ++t)
      for (int i = 0; i < g.n(); ++i)
        out << k << ',' << ids[i] << ',' << fmt_double(g.time_at(t)) << ','
            << fmt_double(g.pos[t](i, 0)) << ',' << fmt_double(g.pos[t](i, 1)) << '\n';
  }
}

inline ImputationBank read_bank_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  detail::expect_header(path, lines, "draw_index,id,t,x,y");

  std::map<long, std::vector<detail::PathRow>> per_draw;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const auto f = detail::split_csv(lines[ln]);
    if (f.size() != 5) detail::io_fail(path, ln + 1, "expected 5 columns");
    double kd;
    if (!detail::parse_full_double(f[0], kd) || kd < 0 || kd != std::floor(kd))
      detail::io_fail(path, ln + 1, "bad draw_index");
    detail::PathRow r;
    r.id = f[1];
    if (!detail::parse_full_double(f[2], r.t) || !detail::parse_full_double(f[3], r.x) ||
        !detail::parse_full_double(f[4], r.y))
      detail::io_fail(path, ln + 1, "unparseable number");
    per_draw[static_cast<long>(kd)].push_back(std::move(r));
  }
  if (per_draw.empty()) detail::io_fail(path, 1, "no data rows");
  long expect = 0;
  ImputationBank bank;
  for (const auto& [k, body] : per_draw) {
    if (k != expect++)
      throw std::runtime_error(path + ": draw indices are not contiguous from 0");
    bank.draws.push_back(detail::grid_from_rows(path, body));
  }
  bank.validate();
  return bank;
}

}  // namespace movenet
