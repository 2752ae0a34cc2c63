#pragma once

// Text serialization of run records, metrics, sweep summaries and
// feasibility reports. Numbers use %.17g so every double round-trips.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "twopoint/analysis.hpp"
#include "twopoint/angles.hpp"
#include "twopoint/errors.hpp"
#include "twopoint/sim.hpp"

namespace twopoint {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_ratio(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

inline const std::vector<std::string>& run_csv_columns() {
  static const std::vector<std::string> cols = {
      "t",        "x",        "y",         "psi",       "delta",
      "beta",     "theta_v",  "theta_n",   "theta_f",   "e",
      "d_lateral", "d_lateral_rate", "u_s", "u_c",      "u_applied",
      "v",        "kappa_e_inst", "lateral_original", "dtheta_dot", "saturated"};
  return cols;
}

inline void write_run_csv(std::ostream& os, const RunRecord& rec) {
  const auto& cols = run_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& s : rec.samples) {
    const auto& c = s.control;
    const double vals[] = {s.t,       s.state.x,  s.state.y,  s.state.psi, s.state.delta,
                           s.beta,    c.theta_v,  c.theta_n,  c.theta_f,   c.e,
                           s.d_lateral, s.d_lateral_rate, c.u_s, c.u_c,    c.u_applied,
                           c.v,       s.kappa_e,  s.lateral_original, c.delta_theta_dot};
    for (std::size_t i = 0; i < std::size(vals); ++i) os << (i ? "," : "") << fmt(vals[i]);
    os << ',' << (c.saturated ? 1 : 0) << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ParseError("not a number: '" + s + "'");
  return v;
}

}  // namespace detail

/// Reads back the metric inputs from a run CSV.
inline std::vector<MetricRow> read_run_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty run CSV");
  const auto header = detail::split(line, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"t", "theta_v", "theta_n", "d_lateral", "d_lateral_rate",
                           "lateral_original", "kappa_e_inst", "dtheta_dot", "saturated"}) {
    if (!col.count(need)) throw ParseError(std::string("run CSV lacks column ") + need);
  }
  std::vector<MetricRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != header.size()) {
      throw ParseError("run CSV line " + std::to_string(lineno) + " has the wrong field count");
    }
    auto get = [&](const char* name) { return detail::to_double(f[col[name]]); };
    MetricRow r;
    r.t = get("t");
    r.dtheta = wrap_angle(get("theta_v") - get("theta_n"));
    r.dtheta_dot = get("dtheta_dot");
    r.lateral = get("d_lateral");
    r.lateral_rate = get("d_lateral_rate");
    r.lateral_original = get("lateral_original");
    r.kappa_e = get("kappa_e_inst");
    r.saturated = get("saturated") != 0.0;
    rows.push_back(r);
  }
  return rows;
}

inline void write_metrics(std::ostream& os, const RunRecord& rec) {
  const RunMetrics& m = rec.metrics;
  os << "status = " << to_string(rec.status) << '\n';
  if (!rec.reason.empty()) os << "reason = " << rec.reason << '\n';
  os << "samples = " << rec.samples.size() << '\n';
  os << "peak_abs_dtheta = " << fmt(m.peak_abs_dtheta) << '\n';
  os << "peak_abs_dtheta_dot = " << fmt(m.peak_abs_dtheta_dot) << '\n';
  os << "final_lateral = " << fmt(m.final_lateral) << '\n';
  os << "settle_time = " << fmt(m.settle_time) << '\n';
  os << "settled = " << (m.settled ? "true" : "false") << '\n';
  os << "lateral_rate_sign_changes = " << m.lateral_rate_sign_changes << '\n';
  os << "saturation_fraction = " << fmt(m.saturation_fraction) << '\n';
  if (m.kappa_e) os << "kappa_e = " << fmt(*m.kappa_e) << '\n';
  if (m.steady_lateral) os << "steady_lateral = " << fmt(*m.steady_lateral) << '\n';
  if (m.converged) os << "converged = " << (*m.converged ? "true" : "false") << '\n';
}

inline std::map<std::string, std::string> read_metrics(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepAxis>& axes,
                            const std::vector<SweepPoint>& points) {
  for (const auto& a : axes) os << a.key << ',';
  os << "status,peak_abs_dtheta,peak_abs_dtheta_dot,final_lateral,settle_time,settled,"
        "lateral_rate_sign_changes,saturation_fraction,kappa_e,steady_lateral,converged,reason\n";
  for (const auto& pt : points) {
    for (double c : pt.coords) os << fmt(c) << ',';
    const RunMetrics& m = pt.metrics;
    std::string reason = pt.reason;
    for (char& ch : reason) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    os << to_string(pt.status) << ',' << fmt(m.peak_abs_dtheta) << ','
       << fmt(m.peak_abs_dtheta_dot) << ',' << fmt(m.final_lateral) << ',' << fmt(m.settle_time)
       << ',' << (m.settled ? 1 : 0) << ',' << m.lateral_rate_sign_changes << ','
       << fmt(m.saturation_fraction) << ',' << (m.kappa_e ? fmt(*m.kappa_e) : "") << ','
       << (m.steady_lateral ? fmt(*m.steady_lateral) : "") << ','
       << (m.converged ? (*m.converged ? "1" : "0") : "") << ',' << reason << '\n';
  }
}

/// One line per constraint: name, lhs, comparator, rhs, pass/fail.
inline void write_checks(std::ostream& os, const std::vector<CheckResult>& checks,
                         const std::string& indent = "  ") {
  for (const auto& c : checks) {
    os << indent << c.name << ' ' << fmt(c.lhs) << ' ' << c.comparator << ' ' << fmt(c.rhs) << ' '
       << (c.satisfied ? "pass" : "fail") << '\n';
  }
}

inline void write_feasibility_report(std::ostream& os, const FeasibilityReport& rep) {
  const PlannerParams& p = rep.params;
  os << "point gamma=" << fmt(p.gamma) << " lambda0=" << fmt(p.lambda0) << " k=" << fmt(p.k)
     << " lambda=" << fmt(p.lambda) << " delta_d0=" << fmt(p.delta_d0)
     << " curvature_ratio=" << fmt_ratio(rep.curvature_ratio) << ' '
     << (rep.feasible ? "feasible" : "infeasible") << '\n';
  write_checks(os, rep.checks);
}

/// Feasible set table. `grid_text` lines describe the grid and go into the
/// header comment with the inputs.
inline void write_feasible_set(std::ostream& os, const FeasibilityInputs& in,
                               const std::vector<std::string>& grid_text,
                               const FeasibilityGrid& grid,
                               const std::vector<FeasibilityReport>& reports) {
  os << "# v=" << fmt(in.v) << " W=" << fmt(in.lane_width) << " kappa0=" << fmt(in.kappa0)
     << " C1=" << fmt(in.C1) << " C2=" << fmt(in.C2) << " C3=" << fmt(in.C3)
     << " alpha=" << fmt(in.alpha) << '\n';
  for (const auto& g : grid_text) os << "# grid " << g << '\n';
  os << "gamma,lambda0,k,lambda,delta_d0,curvature_ratio\n";
  for (const auto& r : reports) {
    os << fmt(grid.gamma[r.grid_index[0]]) << ',' << fmt(grid.lambda0[r.grid_index[1]]) << ','
       << fmt(grid.k[r.grid_index[2]]) << ',' << fmt(r.params.lambda) << ','
       << fmt(r.params.delta_d0) << ',' << fmt_ratio(r.curvature_ratio) << '\n';
  }
}

}  // namespace twopoint
