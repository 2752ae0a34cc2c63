#pragma once

// Sliding-surface steering law: error states for one-point and two-point
// tracking, the stabilizing/optimal control split, and the speed coupling
// that keeps the shadow point moving at the planned speed.

#include <algorithm>
#include <cmath>
#include <limits>

#include "twopoint/angles.hpp"
#include "twopoint/errors.hpp"
#include "twopoint/refline.hpp"
#include "twopoint/vehicle.hpp"

namespace twopoint {

struct PlannerParams {
  double k = 0.5;          // manifold gain, 1/m
  double lambda = 1.0;     // LQR balance, s^2
  double lambda0 = 0.5;    // k v sqrt(lambda) design value
  double alpha = 0.0;      // near/far blend, [0, 1)
  double delta_d0 = 0.0;   // look-ahead distance, m
  double gamma = 0.0;      // alpha k delta_d0 (kept consistent by refresh_gamma)
  double C1 = std::numeric_limits<double>::infinity();  // |dtheta| bound, rad
  double C2 = std::numeric_limits<double>::infinity();  // |dtheta_dot| bound, rad/s
  double C3 = std::numeric_limits<double>::infinity();  // steady lateral bound, m
  double lane_width = 3.5;  // m
  double v_s = 1.0;         // planned speed along the reference line, m/s

  void refresh_gamma() { gamma = alpha * k * delta_d0; }

  double sqrt_lambda() const { return std::sqrt(lambda); }

  // lambda0 is not restricted to (0, 1) here: high-gain configurations are
  // legal to simulate, and check_oscillation reports the violation.
  void validate() const {
    auto fail = [](const char* what) { throw ValidationError(what); };
    if (!(k > 0.0 && std::isfinite(k))) fail("k must be positive");
    if (!(lambda > 0.0 && std::isfinite(lambda))) fail("lambda must be positive");
    if (!(lambda0 > 0.0 && std::isfinite(lambda0))) fail("lambda0 must be positive");
    if (!(alpha >= 0.0 && alpha < 1.0)) fail("alpha must lie in [0, 1)");
    if (!(delta_d0 >= 0.0 && std::isfinite(delta_d0))) fail("delta_d0 must be nonnegative");
    if (!(lane_width > 0.0 && std::isfinite(lane_width))) fail("lane width must be positive");
    if (!(v_s > 0.0 && std::isfinite(v_s))) fail("v_s must be positive");
    if (!(C1 > 0.0 && C2 > 0.0 && C3 > 0.0)) fail("C1, C2, C3 must be positive");
    if (std::abs(gamma - alpha * k * delta_d0) > 1e-12) fail("gamma != alpha k delta_d0");
  }
};

struct ControlSample {
  double e = 0.0;
  double theta_v = 0.0;
  double theta_n = 0.0;
  double theta_f = 0.0;
  double delta_theta = 0.0;  // wrap(theta_v - theta_n)
  double lateral = 0.0;      // <y_s, r>
  double along_track = 0.0;  // <r, x_s>
  double lateral_rate = 0.0; // d/dt <y_s, r> = -v <y_s, x_v>
  double station = 0.0;      // shadow station
  double kappa_n = 0.0;
  double kappa_f = 0.0;
  double v = 0.0;            // vehicle speed from the coupling law
  double u_s = 0.0;
  double u_c = 0.0;
  double u = 0.0;            // u_s + u_c before saturation
  double u_applied = 0.0;
  double theta_dot_ref = 0.0;  // rate of the blended target orientation
  double omega = 0.0;          // rate of theta_v under u_applied
  double delta_theta_dot = 0.0;  // omega - theta_dot_n
  bool saturated = false;
};

inline constexpr double kDefaultAlignmentMin = 0.1;

inline double error_one_point(double theta_v, double theta_n, double lateral, double k) {
  return wrap_angle(theta_v - theta_n) - k * lateral;
}

// The blend is taken around theta_n so it stays valid across the +-pi seam;
// with alpha == 0 it is exactly theta_n.
inline double blended_orientation(double theta_n, double theta_f, double alpha) {
  return theta_n + alpha * wrap_angle(theta_f - theta_n);
}

inline double error_two_point(double theta_v, double theta_n, double theta_f, double lateral,
                              double k, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in [0, 1)");
  return wrap_angle(theta_v - blended_orientation(theta_n, theta_f, alpha)) - k * lateral;
}

/// Vehicle speed that keeps the shadow point advancing at v_s.
/// lateral_term is <r, y_s> kappa; alignment is <x_s, x_v>.
inline double vehicle_speed(double v_s, double lateral_term, double alignment,
                            double alignment_min = kDefaultAlignmentMin) {
  if (!(alignment > alignment_min)) {
    throw GeometryError("vehicle heading nearly perpendicular to the reference line");
  }
  const double numerator = 1.0 + lateral_term;
  if (!(numerator > 0.0)) {
    throw GeometryError("vehicle at or beyond the center of curvature of the reference line");
  }
  return v_s * numerator / alignment;
}

/// Cancels the slip-angle drift, feeds forward the target rotation and
/// applies the manifold term. heading_error is theta_v - theta_n, the angle
/// that drives the lateral deviation.
inline double stabilizing_control(const VehicleGeometry& geom, const VehicleState& state, double v,
                                  double theta_dot_ref, double heading_error, double k) {
  const double beta = slip_angle(geom, state.delta);
  const double g = steering_gain(geom, state.delta);
  return (-(v / geom.l_r) * std::sin(beta) + theta_dot_ref - k * v * std::sin(heading_error)) / g;
}

/// LQR feedback on e mapped to front-wheel rate: g(delta)^-1 * (-e / sqrt(lambda)).
inline double optimal_correction(double e, double lambda, const VehicleGeometry& geom,
                                 double delta) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  return -e / std::sqrt(lambda) / steering_gain(geom, delta);
}

inline ControlSample plan_step(const ReferenceLine& line, const VehicleGeometry& geom,
                               const ActuatorLimits& limits, const VehicleState& state,
                               const PlannerParams& params,
                               double alignment_min = kDefaultAlignmentMin) {
  ControlSample out;
  const ShadowResult shadow = line.project(state.position());
  const FramePoint& near = shadow.frame;
  const FramePoint far =
      params.alpha > 0.0 ? line.lookahead(near.station, params.delta_d0) : near;
  const VehicleFrame vf = frame_of(geom, state);

  out.theta_v = vf.theta_v;
  out.theta_n = near.orientation;
  out.theta_f = far.orientation;
  out.kappa_n = near.curvature;
  out.kappa_f = far.curvature;
  out.station = near.station;
  out.lateral = shadow.signed_lateral;
  out.along_track = shadow.along_track;
  out.delta_theta = wrap_angle(vf.theta_v - near.orientation);

  out.v = vehicle_speed(params.v_s, shadow.signed_lateral * near.curvature,
                        near.tangent.dot(vf.tangent), alignment_min);

  out.lateral_rate = -out.v * near.normal.dot(vf.tangent);

  const double theta_dot_n = params.v_s * near.curvature;
  const double theta_dot_f = params.v_s * far.curvature;
  out.theta_dot_ref = (1.0 - params.alpha) * theta_dot_n + params.alpha * theta_dot_f;

  out.e = error_two_point(vf.theta_v, near.orientation, far.orientation, shadow.signed_lateral,
                          params.k, params.alpha);
  out.u_s = stabilizing_control(geom, state, out.v, out.theta_dot_ref, out.delta_theta, params.k);
  out.u_c = optimal_correction(out.e, params.lambda, geom, state.delta);
  out.u = out.u_s + out.u_c;

  out.u_applied = std::clamp(out.u, -limits.u_max, limits.u_max);
  if ((state.delta >= limits.delta_max && out.u_applied > 0.0) ||
      (state.delta <= -limits.delta_max && out.u_applied < 0.0)) {
    out.u_applied = 0.0;
  }
  out.saturated = out.u_applied != out.u;

  out.omega = omega(geom, state, out.v, out.u_applied);
  out.delta_theta_dot = out.omega - theta_dot_n;
  return out;
}

}  // namespace twopoint
