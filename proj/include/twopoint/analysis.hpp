#pragma once

// Closed-form predictions and parameter feasibility for the steering law:
// linearized lane-change response, abort-safety bounds, the oscillation
// condition, corner-cutting constraints and a grid search over them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "twopoint/control.hpp"
#include "twopoint/errors.hpp"

namespace twopoint {

/// Lower end of the admissible gamma window: positive root of
/// gamma^2 + gamma - 1 = 0.
inline const double kGammaLowerBound = (std::sqrt(5.0) - 1.0) / 2.0;

struct PredictionSample {
  double t = 0.0;
  double dtheta = 0.0;
  double dtheta_dot = 0.0;
};

struct LinearizedPrediction {
  double e0 = 0.0;
  double lambda = 1.0;
  double lambda0 = 0.5;
  std::vector<PredictionSample> samples;
  double peak_dtheta = 0.0;          // |dtheta| at its unique extremum
  double peak_dtheta_time = 0.0;
  double peak_dtheta_dot = 0.0;      // |dtheta_dot| at its unique interior extremum
  double peak_dtheta_dot_time = 0.0;
  double initial_dtheta_dot = 0.0;   // |dtheta_dot(0+)| = |e0| / sqrt(lambda)

  double dtheta(double t) const {
    const double sl = std::sqrt(lambda);
    return e0 / (1.0 - lambda0) * (std::exp(-t / sl) - std::exp(-lambda0 * t / sl));
  }

  double dtheta_dot(double t) const {
    const double sl = std::sqrt(lambda);
    return -e0 / (sl * (1.0 - lambda0)) *
           (std::exp(-t / sl) - lambda0 * std::exp(-lambda0 * t / sl));
  }
};

inline LinearizedPrediction predict_lane_change(double e0, double lambda, double lambda0,
                                                std::size_t n_samples = 2001) {
  if (!(lambda0 > 0.0 && lambda0 < 1.0)) throw DomainError("lambda0 must lie in (0, 1)");
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (n_samples < 2) throw DomainError("need at least two samples");
  LinearizedPrediction p;
  p.e0 = e0;
  p.lambda = lambda;
  p.lambda0 = lambda0;
  const double sl = std::sqrt(lambda);
  const double log_l0 = std::log(lambda0);
  p.peak_dtheta_time = sl * log_l0 / (lambda0 - 1.0);
  p.peak_dtheta = std::abs(e0) / lambda0 * std::exp(log_l0 / (1.0 - lambda0));
  p.peak_dtheta_dot_time = 2.0 * sl * log_l0 / (lambda0 - 1.0);
  p.peak_dtheta_dot = std::abs(e0) / (lambda0 * sl) * std::exp(2.0 * log_l0 / (1.0 - lambda0));
  p.initial_dtheta_dot = std::abs(e0) / sl;

  const double horizon = 10.0 * sl / lambda0;
  p.samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = horizon * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    p.samples.push_back({t, p.dtheta(t), p.dtheta_dot(t)});
  }
  return p;
}

struct CheckResult {
  std::string name;
  double lhs = 0.0;
  std::string comparator;
  double rhs = 0.0;
  bool satisfied = false;
};

struct CheckGroup {
  std::vector<CheckResult> checks;
  bool applicable = true;
  bool satisfied = false;

  void finish() {
    satisfied = std::all_of(checks.begin(), checks.end(),
                            [](const CheckResult& c) { return c.satisfied; });
  }
};

namespace detail {
inline CheckResult less(std::string name, double lhs, double rhs) {
  return {std::move(name), lhs, "<", rhs, lhs < rhs};
}
inline CheckResult less_equal(std::string name, double lhs, double rhs) {
  return {std::move(name), lhs, "<=", rhs, lhs <= rhs};
}
inline CheckResult greater(std::string name, double lhs, double rhs) {
  return {std::move(name), lhs, ">", rhs, lhs > rhs};
}
}  // namespace detail

/// No hazardous oscillation: k v sqrt(lambda) = lambda0 with lambda0 in (0, 1).
inline CheckGroup check_oscillation(const PlannerParams& params, double v) {
  CheckGroup g;
  const double implied = params.k * v * std::sqrt(params.lambda);
  g.checks.push_back(detail::greater("lambda0_positive", implied, 0.0));
  g.checks.push_back(detail::less("lambda0_below_one", implied, 1.0));
  g.checks.push_back(
      detail::less("lambda0_consistent", std::abs(implied - params.lambda0), 1e-9));
  g.finish();
  return g;
}

struct AbortSafety {
  CheckGroup group;
  double lhs = 0.0;                // (1/sqrt(lambda)) exp(ln lambda0 / (1 - lambda0))
  double rhs_c1 = 0.0;             // C1 v / W
  double rhs_c2 = 0.0;             // sqrt(C2 v / W)
  double implied_peak_dtheta = 0.0;      // with |e0| = k W
  double implied_peak_dtheta_dot = 0.0;
};

inline AbortSafety check_abort_safety(const PlannerParams& params, double v) {
  AbortSafety out;
  const double l0 = params.lambda0;
  const double sl = std::sqrt(params.lambda);
  const double decay = std::exp(std::log(l0) / (1.0 - l0));
  out.lhs = 1.0 / sl * decay;
  out.rhs_c1 = params.C1 * v / params.lane_width;
  out.rhs_c2 = std::sqrt(params.C2 * v / params.lane_width);
  const double e0 = params.k * params.lane_width;
  out.implied_peak_dtheta = e0 / l0 * decay;
  out.implied_peak_dtheta_dot = e0 / (l0 * sl) * decay * decay;
  out.group.checks.push_back(detail::greater("abort_lambda0_positive", l0, 0.0));
  out.group.checks.push_back(detail::less("abort_lambda0_below_one", l0, 1.0));
  out.group.checks.push_back(detail::less_equal("abort_c1", out.lhs, out.rhs_c1));
  out.group.checks.push_back(detail::less_equal("abort_c2", out.lhs, out.rhs_c2));
  out.group.finish();
  return out;
}

/// Corner-cutting window. Not applicable (and reported satisfied) on a
/// straight lane.
inline CheckGroup check_corner_cutting(const PlannerParams& params, double kappa0) {
  CheckGroup g;
  if (kappa0 == 0.0) {
    g.applicable = false;
    g.satisfied = true;
    return g;
  }
  const double ak = std::abs(kappa0);
  const double gamma = params.gamma;
  g.checks.push_back(detail::greater("gamma_above_golden", gamma, kGammaLowerBound));
  g.checks.push_back(detail::less("gamma_below_one", gamma, 1.0));
  g.checks.push_back(detail::greater("k_above_curvature", params.k, ak * std::sqrt(1.0 + gamma)));
  g.checks.push_back(detail::greater("k_above_offset", params.k, std::sqrt(gamma * ak / params.C3)));
  g.checks.push_back(
      detail::less("k_below_upper", params.k, ak / std::sqrt(1.0 / gamma - 1.0)));
  g.checks.push_back(detail::less(
      "steady_offset", std::abs(params.alpha * params.delta_d0 * kappa0 / params.k), params.C3));
  g.finish();
  return g;
}

/// Predicted kappa_e / kappa0 from the two-point curvature relation.
inline double predict_curvature_ratio(const PlannerParams& params, double kappa0) {
  const double denom = 1.0 - params.alpha * params.delta_d0 * kappa0 * kappa0 / params.k;
  if (denom == 0.0) throw DomainError("speed ratio is singular for these parameters");
  const double speed_ratio = 1.0 / denom;  // v_s / v
  return speed_ratio *
         (1.0 - params.alpha * (params.lambda0 / std::sqrt(params.lambda)) * params.delta_d0 /
                    params.v_s);
}

/// Predicted steady lateral deviation <y_s, r> on an arc of curvature kappa0.
inline double predict_steady_lateral(const PlannerParams& params, double kappa0) {
  if (!(params.k > 0.0)) throw DomainError("k must be positive");
  return -params.alpha * params.delta_d0 * kappa0 / params.k;
}

struct LinearPoles {
  double damping = 0.0;    // coefficient of s: 1/sqrt(lambda) + k v
  double stiffness = 0.0;  // constant term: k v / sqrt(lambda)
  std::array<double, 2> eigenvalues{};
};

/// Linearization of the orientation-difference dynamics around (0, 0).
inline LinearPoles linearized_poles(double lambda, double k, double v) {
  LinearPoles p;
  const double a = 1.0 / std::sqrt(lambda);
  const double b = k * v;
  p.damping = a + b;
  p.stiffness = a * b;
  const double disc = std::sqrt(std::max(0.0, p.damping * p.damping - 4.0 * p.stiffness));
  p.eigenvalues = {(-p.damping - disc) / 2.0, (-p.damping + disc) / 2.0};
  return p;
}

struct FeasibilityInputs {
  double v = 1.0;
  double lane_width = 3.5;
  double kappa0 = 0.0;
  double C1 = std::numeric_limits<double>::infinity();
  double C2 = std::numeric_limits<double>::infinity();
  double C3 = std::numeric_limits<double>::infinity();
  double alpha = 0.5;
};

struct FeasibilityGrid {
  std::vector<double> gamma;
  std::vector<double> lambda0;
  std::vector<double> k;

  /// n evenly spaced values lo + (hi - lo) i / (n - 1).
  static std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw DomainError("grid axes need at least two points");
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return out;
  }
};

struct FeasibilityReport {
  PlannerParams params;
  std::vector<CheckResult> checks;
  bool feasible = false;
  double curvature_ratio = 0.0;
  std::array<std::size_t, 3> grid_index{};  // (gamma, lambda0, k)
};

/// Builds the parameter set for one grid point and evaluates every check.
inline FeasibilityReport evaluate_feasibility(const FeasibilityInputs& in, double gamma,
                                              double lambda0, double k) {
  FeasibilityReport rep;
  PlannerParams& p = rep.params;
  p.k = k;
  p.lambda0 = lambda0;
  const double sl = lambda0 / (k * in.v);
  p.lambda = sl * sl;
  p.alpha = in.alpha;
  p.delta_d0 = gamma / (in.alpha * k);
  p.refresh_gamma();
  p.C1 = in.C1;
  p.C2 = in.C2;
  p.C3 = in.C3;
  p.lane_width = in.lane_width;
  p.v_s = in.v;

  const CheckGroup osc = check_oscillation(p, in.v);
  const AbortSafety abort = check_abort_safety(p, in.v);
  const CheckGroup corner = check_corner_cutting(p, in.kappa0);
  for (const auto* group : {&osc, &abort.group, &corner}) {
    rep.checks.insert(rep.checks.end(), group->checks.begin(), group->checks.end());
  }
  rep.feasible = osc.satisfied && abort.group.satisfied && corner.satisfied;
  rep.curvature_ratio = in.kappa0 != 0.0 ? predict_curvature_ratio(p, in.kappa0) : 1.0;
  return rep;
}

/// Sort key for reports: the curvature ratio rounded to 12 significant
/// digits, so ties from rounding noise fall back to grid order.
inline double ratio_sort_key(double ratio) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12e", ratio);
  return std::strtod(buf, nullptr);
}

inline std::vector<FeasibilityReport> find_feasible(const FeasibilityInputs& in,
                                                    const FeasibilityGrid& grid) {
  if (grid.gamma.empty() || grid.lambda0.empty() || grid.k.empty()) {
    throw DomainError("feasibility grid is empty");
  }
  if (!(in.v > 0.0 && in.lane_width > 0.0)) {
    throw DomainError("speed and lane width must be positive");
  }
  if (!(in.alpha > 0.0 && in.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  std::vector<FeasibilityReport> out;
  for (std::size_t i = 0; i < grid.gamma.size(); ++i) {
    for (std::size_t j = 0; j < grid.lambda0.size(); ++j) {
      for (std::size_t l = 0; l < grid.k.size(); ++l) {
        auto rep = evaluate_feasibility(in, grid.gamma[i], grid.lambda0[j], grid.k[l]);
        if (!rep.feasible) continue;
        rep.grid_index = {i, j, l};
        out.push_back(std::move(rep));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tuple(ratio_sort_key(a.curvature_ratio), a.grid_index) <
           std::tuple(ratio_sort_key(b.curvature_ratio), b.grid_index);
  });
  return out;
}

}  // namespace twopoint
