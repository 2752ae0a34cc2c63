#pragma once

// Built-in lane-change and corner scenarios and the plots drawn from their
// run records. The bundled figures/*.scenario files describe the same runs.

#include <cmath>
#include <string>
#include <vector>

#include "twopoint/io.hpp"
#include "twopoint/sim.hpp"
#include "twopoint/svg.hpp"

namespace twopoint {

/// 3.5 m lane change at v = 1 m/s, lambda = 1 over 10 s.
inline Scenario lane_change_scenario(double k) {
  Scenario sc;
  sc.kind = ScenarioKind::kLaneChange;
  sc.track = ReferenceLine::straight({-10.0, 0.0}, 0.0, 60.0);
  sc.initial = {0.0, 0.0, 0.0, 0.0};
  sc.params.k = k;
  sc.params.lambda = 1.0;
  sc.params.v_s = 1.0;
  sc.params.lane_width = 3.5;
  sc.params.lambda0 = k * sc.params.v_s * std::sqrt(sc.params.lambda);
  sc.lambda0_implied = true;
  sc.duration = 10.0;
  return sc;
}

/// Constant-curvature corner (kappa0 = 0.01 /m). With alpha > 0 the
/// parameters pass the corner-cutting checks for C3 = 1 m.
inline Scenario corner_scenario(double alpha) {
  Scenario sc;
  sc.kind = ScenarioKind::kCorner;
  sc.track = ReferenceLine::arc({0.0, 0.0}, 0.0, 250.0, 0.01);
  sc.initial = {0.0, 0.0, 0.0, 0.0};
  PlannerParams& p = sc.params;
  p.k = 0.12;
  p.lambda0 = 0.5;
  p.v_s = 1.0;
  const double sl = p.lambda0 / (p.k * p.v_s);
  p.lambda = sl * sl;
  p.alpha = alpha;
  p.delta_d0 = alpha > 0.0 ? 0.995 / (alpha * p.k) : 0.0;
  p.refresh_gamma();
  p.C3 = 1.0;
  p.lane_width = 3.5;
  sc.duration = 150.0;
  return sc;
}

inline const std::vector<double>& figure_gains() {
  static const std::vector<double> ks = {0.5, 1.0, 1.5};
  return ks;
}

inline std::string gain_label(double k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "k = %.1f", k);
  return buf;
}

/// Lateral position relative to the original lane, left positive.
inline PlotSpec lateral_plot(const std::vector<RunRecord>& runs,
                             const std::vector<std::string>& labels) {
  PlotSpec spec{"Lateral deviation of a lane-change maneuver", "time (s)", "lateral position (m)",
                {}, false};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    PlotSeries s{labels[i], {}, {}};
    for (const auto& r : runs[i].samples) {
      s.x.push_back(r.t);
      s.y.push_back(-r.lateral_original);
    }
    spec.series.push_back(std::move(s));
  }
  return spec;
}

inline PlotSpec lateral_rate_plot(const std::vector<RunRecord>& runs,
                                  const std::vector<std::string>& labels) {
  PlotSpec spec{"Time derivative of lateral deviation", "time (s)", "lateral rate (m/s)", {},
                false};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    PlotSeries s{labels[i], {}, {}};
    for (const auto& r : runs[i].samples) {
      s.x.push_back(r.t);
      s.y.push_back(-r.d_lateral_rate);
    }
    spec.series.push_back(std::move(s));
  }
  return spec;
}

/// Vehicle path against the reference. Shadow points are rebuilt from the
/// samples: r_s = r_v + d y_s.
inline PlotSpec corner_plot(const RunRecord& run, const std::string& label) {
  PlotSpec spec{"Corner tracking", "x (m)", "y (m)", {}, true};
  PlotSeries ref{"reference line", {}, {}};
  PlotSeries veh{label, {}, {}};
  for (const auto& r : run.samples) {
    const double th = r.control.theta_n;
    ref.x.push_back(r.state.x - r.d_lateral * std::sin(th));
    ref.y.push_back(r.state.y + r.d_lateral * std::cos(th));
    veh.x.push_back(r.state.x);
    veh.y.push_back(r.state.y);
  }
  spec.series.push_back(std::move(ref));
  spec.series.push_back(std::move(veh));
  return spec;
}

}  // namespace twopoint
