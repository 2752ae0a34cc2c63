#pragma once

// Deterministic closed-loop simulator: bicycle model + steering law on a
// reference line, lane changes as target swaps, corner steady-state
// measurement, and parameter sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "twopoint/control.hpp"
#include "twopoint/errors.hpp"
#include "twopoint/refline.hpp"
#include "twopoint/vehicle.hpp"

namespace twopoint {

enum class ScenarioKind { kLaneKeep, kLaneChange, kCorner };

inline const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kLaneKeep: return "lane_keep";
    case ScenarioKind::kLaneChange: return "lane_change";
    case ScenarioKind::kCorner: return "corner";
  }
  return "unknown";
}

struct Scenario {
  ScenarioKind kind = ScenarioKind::kLaneKeep;
  // The original lane. For lane changes the initial target is the parallel
  // twin displaced by the lane width to the left.
  ReferenceLine track = ReferenceLine::straight(Vec2::Zero(), 0.0, 100.0);
  VehicleState initial;
  PlannerParams params;
  VehicleGeometry geometry;
  ActuatorLimits limits;
  double h = 1e-3;
  double duration = 10.0;
  int control_divisor = 10;
  std::optional<double> abort_time;
  // Re-derive lambda0 = k v_s sqrt(lambda) whenever parameters change.
  bool lambda0_implied = false;

  void validate() const {
    geometry.validate();
    limits.validate();
    params.validate();
    if (!(h > 0.0 && std::isfinite(h))) throw ValidationError("h must be positive");
    if (!(duration > 0.0 && std::isfinite(duration))) throw ValidationError("duration must be positive");
    if (control_divisor < 1) throw ValidationError("control divisor must be >= 1");
    if (abort_time) {
      if (kind != ScenarioKind::kLaneChange) {
        throw ValidationError("abort time only applies to lane-change scenarios");
      }
      if (!(*abort_time >= 0.0 && *abort_time < duration)) {
        throw ValidationError("abort time must lie in [0, duration)");
      }
    }
    if (std::abs(initial.delta) > limits.delta_max) {
      throw ValidationError("initial wheel angle exceeds delta_max");
    }
    if (kind == ScenarioKind::kCorner) {
      const auto& segs = track.segments();
      const double kappa = segs.front().curvature();
      for (const auto& s : segs) {
        if (s.kind() != SegmentKind::kArc || s.curvature() != kappa) {
          throw ValidationError("corner scenarios need a constant-curvature arc track");
        }
      }
    }
  }
};

enum class RunStatus { kCompleted, kTrackEnd, kFailed };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kTrackEnd: return "track_end";
    case RunStatus::kFailed: return "failed";
  }
  return "unknown";
}

struct RunSample {
  double t = 0.0;
  VehicleState state;
  ControlSample control;
  double d_lateral = 0.0;       // against the current target
  double d_lateral_rate = 0.0;
  double lateral_original = 0.0;  // <y_s, r> against the original track
  double beta = 0.0;
  double kappa_e = 0.0;  // omega / v
};

// The per-sample quantities metrics are computed from. Kept separate so a
// CSV dump can be checked against the metrics it was written with.
struct MetricRow {
  double t = 0.0;
  double dtheta = 0.0;
  double dtheta_dot = 0.0;
  double lateral = 0.0;
  double lateral_rate = 0.0;
  double lateral_original = 0.0;
  double kappa_e = 0.0;
  bool saturated = false;
};

struct RunMetrics {
  double peak_abs_dtheta = 0.0;
  double peak_abs_dtheta_dot = 0.0;
  double final_lateral = 0.0;  // against the original track
  double settle_time = 0.0;
  bool settled = true;
  int lateral_rate_sign_changes = 0;
  double saturation_fraction = 0.0;
  // Corner runs only.
  std::optional<double> kappa_e;
  std::optional<double> steady_lateral;
  std::optional<bool> converged;
};

// Rates below this magnitude carry no sign for oscillation counting.
inline constexpr double kRateDeadband = 1e-6;

inline RunMetrics compute_metrics(const std::vector<MetricRow>& rows, bool steady_window) {
  RunMetrics m;
  if (rows.empty()) return m;
  std::size_t saturated = 0;
  int last_sign = 0;
  for (const auto& r : rows) {
    m.peak_abs_dtheta = std::max(m.peak_abs_dtheta, std::abs(r.dtheta));
    m.peak_abs_dtheta_dot = std::max(m.peak_abs_dtheta_dot, std::abs(r.dtheta_dot));
    if (r.saturated) ++saturated;
    if (std::abs(r.lateral_rate) > kRateDeadband) {
      const int sign = r.lateral_rate > 0.0 ? 1 : -1;
      if (last_sign != 0 && sign != last_sign) ++m.lateral_rate_sign_changes;
      last_sign = sign;
    }
  }
  const std::size_t n = rows.size();
  m.final_lateral = rows.back().lateral_original;
  m.saturation_fraction = static_cast<double>(saturated) / static_cast<double>(n);

  double steady = 0.0;
  if (steady_window) {
    auto window_mean = [&](double fraction, auto field) {
      const auto first = static_cast<std::size_t>(std::floor((1.0 - fraction) * static_cast<double>(n)));
      double sum = 0.0;
      for (std::size_t i = first; i < n; ++i) sum += field(rows[i]);
      return sum / static_cast<double>(n - first);
    };
    auto kappa = [](const MetricRow& r) { return r.kappa_e; };
    auto lateral = [](const MetricRow& r) { return r.lateral; };
    const double k25 = window_mean(0.25, kappa);
    const double k10 = window_mean(0.10, kappa);
    const double l25 = window_mean(0.25, lateral);
    const double l10 = window_mean(0.10, lateral);
    auto agree = [](double a, double b) {
      return std::abs(a - b) <= 0.01 * std::max(std::abs(a), std::abs(b)) + 1e-9;
    };
    m.kappa_e = k25;
    m.steady_lateral = l25;
    m.converged = agree(k25, k10) && agree(l25, l10);
    steady = l25;
  }

  const double offset = std::abs(rows.front().lateral - steady);
  m.settle_time = rows.front().t;
  m.settled = true;
  if (offset > 0.0) {
    const double band = 0.01 * offset;
    std::size_t last_out = n;
    for (std::size_t i = n; i-- > 0;) {
      if (std::abs(rows[i].lateral - steady) >= band) {
        last_out = i;
        break;
      }
    }
    if (last_out == n) {
      m.settle_time = rows.front().t;
    } else if (last_out + 1 < n) {
      m.settle_time = rows[last_out + 1].t;
    } else {
      m.settle_time = rows.back().t;
      m.settled = false;
    }
  }
  return m;
}

inline MetricRow metric_row(const RunSample& s) {
  return {s.t,        s.control.delta_theta, s.control.delta_theta_dot, s.d_lateral,
          s.d_lateral_rate, s.lateral_original, s.kappa_e, s.control.saturated};
}

struct RunRecord {
  std::vector<RunSample> samples;
  RunMetrics metrics;
  RunStatus status = RunStatus::kCompleted;
  std::string reason;
  bool corner = false;

  bool ok() const { return status == RunStatus::kCompleted; }

  std::vector<MetricRow> metric_rows() const {
    std::vector<MetricRow> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) rows.push_back(metric_row(s));
    return rows;
  }
};

namespace detail {

inline double coupled_speed(const ReferenceLine& line, const VehicleGeometry& geom,
                            const VehicleState& state, double v_s) {
  const ShadowResult shadow = line.project(state.position());
  const VehicleFrame vf = frame_of(geom, state);
  return vehicle_speed(v_s, shadow.signed_lateral * shadow.frame.curvature,
                       shadow.frame.tangent.dot(vf.tangent));
}

inline RunRecord simulate_loop(const Scenario& sc, bool corner) {
  sc.validate();
  RunRecord rec;
  rec.corner = corner;
  const ReferenceLine& original = sc.track;
  std::optional<ReferenceLine> twin;
  if (sc.kind == ScenarioKind::kLaneChange) twin = original.offset(sc.params.lane_width);
  const ReferenceLine* target = twin ? &*twin : &original;
  bool swapped = false;

  const auto steps = static_cast<std::int64_t>(std::llround(sc.duration / sc.h));
  const int divisor = sc.control_divisor;
  rec.samples.reserve(static_cast<std::size_t>(steps / divisor + 1));

  VehicleState state = sc.initial;
  double u = 0.0;
  try {
    for (std::int64_t i = 0;; ++i) {
      const double t = static_cast<double>(i) * sc.h;
      double v = 0.0;
      if (i % divisor == 0) {
        if (sc.abort_time && !swapped && t >= *sc.abort_time) {
          target = &original;
          swapped = true;
        }
        const ControlSample cs = plan_step(*target, sc.geometry, sc.limits, state, sc.params);
        RunSample s;
        s.t = t;
        s.state = state;
        s.control = cs;
        s.d_lateral = cs.lateral;
        s.beta = slip_angle(sc.geometry, state.delta);
        s.d_lateral_rate = cs.lateral_rate;
        s.lateral_original =
            target == &original ? cs.lateral : original.project(state.position()).signed_lateral;
        s.kappa_e = cs.omega / cs.v;
        rec.samples.push_back(s);
        u = cs.u_applied;
        v = cs.v;
      }
      if (i >= steps) break;
      if (i % divisor != 0) v = coupled_speed(*target, sc.geometry, state, sc.params.v_s);
      state = step(sc.geometry, state, v, u, sc.h, sc.limits);
    }
  } catch (const RangeError& e) {
    rec.status = RunStatus::kTrackEnd;
    rec.reason = e.what();
  } catch (const Error& e) {
    rec.status = RunStatus::kFailed;
    rec.reason = e.what();
  }
  rec.metrics = compute_metrics(rec.metric_rows(), corner);
  return rec;
}

}  // namespace detail

/// Closed-loop run; lane-change scenarios target the offset twin track.
inline RunRecord run(const Scenario& sc) { return detail::simulate_loop(sc, false); }

/// Lane change that swaps the target back to the original track at abort_time.
inline RunRecord run_abort(const Scenario& sc) {
  if (sc.kind != ScenarioKind::kLaneChange || !sc.abort_time) {
    throw ValidationError("run_abort needs a lane-change scenario with an abort time");
  }
  return detail::simulate_loop(sc, false);
}

/// Arc run with steady-state metrics over the last quarter of the run.
inline RunRecord run_corner(const Scenario& sc) {
  if (sc.kind != ScenarioKind::kCorner) throw ValidationError("run_corner needs a corner scenario");
  return detail::simulate_loop(sc, true);
}

inline RunRecord simulate(const Scenario& sc) {
  if (sc.kind == ScenarioKind::kCorner) return run_corner(sc);
  if (sc.abort_time) return run_abort(sc);
  return run(sc);
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

struct SweepPoint {
  std::vector<double> coords;  // one value per axis, in axis order
  PlannerParams params;
  RunStatus status = RunStatus::kCompleted;
  std::string reason;
  RunMetrics metrics;
};

inline const std::vector<std::string>& sweepable_keys() {
  static const std::vector<std::string> keys = {
      "planner.k",           "planner.lambda",      "planner.lambda0",
      "planner.alpha",       "planner.delta_d0",    "planner.C1",
      "planner.C2",          "planner.C3",          "planner.lane_width_m",
      "planner.v_s_m_s",     "vehicle.l_f_m",       "vehicle.l_r_m",
      "vehicle.delta_max_rad", "vehicle.u_max_rad_s", "sim.h_s",
      "sim.duration_s",      "sim.abort_time_s",    "sim.control_divisor_N",
  };
  return keys;
}

inline void apply_parameter(Scenario& sc, const std::string& key, double value) {
  auto& p = sc.params;
  if (key == "planner.k") p.k = value;
  else if (key == "planner.lambda") p.lambda = value;
  else if (key == "planner.lambda0") { p.lambda0 = value; sc.lambda0_implied = false; }
  else if (key == "planner.alpha") p.alpha = value;
  else if (key == "planner.delta_d0") p.delta_d0 = value;
  else if (key == "planner.C1") p.C1 = value;
  else if (key == "planner.C2") p.C2 = value;
  else if (key == "planner.C3") p.C3 = value;
  else if (key == "planner.lane_width_m") p.lane_width = value;
  else if (key == "planner.v_s_m_s") p.v_s = value;
  else if (key == "vehicle.l_f_m") sc.geometry.l_f = value;
  else if (key == "vehicle.l_r_m") sc.geometry.l_r = value;
  else if (key == "vehicle.delta_max_rad") sc.limits.delta_max = value;
  else if (key == "vehicle.u_max_rad_s") sc.limits.u_max = value;
  else if (key == "sim.h_s") sc.h = value;
  else if (key == "sim.duration_s") sc.duration = value;
  else if (key == "sim.abort_time_s") sc.abort_time = value;
  else if (key == "sim.control_divisor_N") {
    if (value != std::floor(value)) throw ValidationError("control divisor must be an integer");
    sc.control_divisor = static_cast<int>(value);
  } else {
    throw ValidationError("key '" + key + "' cannot be swept");
  }
  p.refresh_gamma();
  if (sc.lambda0_implied) p.lambda0 = p.k * p.v_s * std::sqrt(p.lambda);
}

inline void validate_axes(const std::vector<SweepAxis>& axes) {
  if (axes.empty()) throw ValidationError("sweep needs at least one axis");
  std::set<std::string> keys;
  for (const auto& axis : axes) {
    if (!keys.insert(axis.key).second) throw ValidationError("axis '" + axis.key + "' repeated");
    const auto& known = sweepable_keys();
    if (std::find(known.begin(), known.end(), axis.key) == known.end()) {
      throw ValidationError("key '" + axis.key + "' cannot be swept");
    }
    if (axis.values.empty()) throw ValidationError("axis '" + axis.key + "' has no values");
    std::set<double> seen;
    for (double v : axis.values) {
      if (!std::isfinite(v)) throw ValidationError("axis '" + axis.key + "' has a non-finite value");
      if (!seen.insert(v).second) throw ValidationError("axis '" + axis.key + "' repeats a value");
    }
  }
}

/// Runs every grid point (row-major over the axes). Results are stored by
/// grid position, so they do not depend on thread count or scheduling.
inline std::vector<SweepPoint> sweep(const Scenario& base, const std::vector<SweepAxis>& axes,
                                     unsigned threads = 0) {
  validate_axes(axes);
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();

  std::vector<SweepPoint> out(total);
  auto run_point = [&](std::size_t index) {
    SweepPoint& pt = out[index];
    Scenario sc = base;
    std::size_t rem = index;
    pt.coords.assign(axes.size(), 0.0);
    for (std::size_t a = axes.size(); a-- > 0;) {
      const std::size_t n = axes[a].values.size();
      pt.coords[a] = axes[a].values[rem % n];
      rem /= n;
    }
    try {
      for (std::size_t a = 0; a < axes.size(); ++a) apply_parameter(sc, axes[a].key, pt.coords[a]);
      pt.params = sc.params;
      const RunRecord rec = simulate(sc);
      pt.status = rec.status;
      pt.reason = rec.reason;
      pt.metrics = rec.metrics;
    } catch (const Error& e) {
      pt.status = RunStatus::kFailed;
      pt.reason = e.what();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  if (threads <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_point(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < total; i = next++) run_point(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace twopoint
