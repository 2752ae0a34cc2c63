#pragma once

// Kinematic bicycle model and its projection onto the velocity frame
// (position, velocity orientation psi + beta).

#include <algorithm>
#include <cmath>
#include <numbers>

#include "twopoint/angles.hpp"
#include "twopoint/errors.hpp"
#include "twopoint/refline.hpp"

namespace twopoint {

struct VehicleGeometry {
  double l_f = 1.2;  // CoG to front axle, m
  double l_r = 1.6;  // CoG to rear axle, m

  double wheelbase() const { return l_f + l_r; }

  void validate() const {
    if (!(std::isfinite(l_f) && l_f > 0.0 && std::isfinite(l_r) && l_r > 0.0)) {
      throw DomainError("vehicle axle distances must be positive and finite");
    }
  }
};

struct ActuatorLimits {
  double delta_max = 0.6;  // rad
  double u_max = 1.0;      // rad/s

  void validate() const {
    if (!(delta_max > 0.0 && delta_max < 0.5 * std::numbers::pi)) {
      throw DomainError("delta_max must lie in (0, pi/2)");
    }
    if (!(u_max > 0.0)) throw DomainError("u_max must be positive");
  }
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;    // body orientation, wrapped to (-pi, pi]
  double delta = 0.0;  // front-wheel angle

  Vec2 position() const { return {x, y}; }

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct StateDerivative {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double delta = 0.0;
};

struct VehicleFrame {
  Vec2 position = Vec2::Zero();
  Vec2 tangent = Vec2::UnitX();
  Vec2 normal = Vec2::UnitY();
  double theta_v = 0.0;
};

namespace detail {
inline void require_steerable(double delta) {
  if (!(std::abs(delta) < 0.5 * std::numbers::pi)) {
    throw DomainError("front-wheel angle must satisfy |delta| < pi/2");
  }
}
}  // namespace detail

inline double slip_angle(const VehicleGeometry& geom, double delta) {
  detail::require_steerable(delta);
  return std::atan(geom.l_r * std::tan(delta) / geom.wheelbase());
}

/// d(beta)/d(delta): the gain from front-wheel rate to slip-angle rate.
inline double steering_gain(const VehicleGeometry& geom, double delta) {
  detail::require_steerable(delta);
  const double ratio = geom.l_r / geom.wheelbase();
  const double q = ratio * std::tan(delta);
  const double c = std::cos(delta);
  return ratio / ((1.0 + q * q) * c * c);
}

/// Angular velocity of the velocity orientation psi + beta.
inline double omega(const VehicleGeometry& geom, const VehicleState& state, double v, double u) {
  const double beta = slip_angle(geom, state.delta);
  return v / geom.l_r * std::sin(beta) + steering_gain(geom, state.delta) * u;
}

inline StateDerivative derivatives(const VehicleGeometry& geom, const VehicleState& state,
                                   double v, double u) {
  const double beta = slip_angle(geom, state.delta);
  const double th = state.psi + beta;
  return {v * std::cos(th), v * std::sin(th), v / geom.l_r * std::sin(beta), u};
}

inline VehicleFrame frame_of(const VehicleGeometry& geom, const VehicleState& state) {
  VehicleFrame f;
  f.position = state.position();
  f.theta_v = wrap_angle(state.psi + slip_angle(geom, state.delta));
  f.tangent = unit_from_angle(f.theta_v);
  f.normal = left_normal(f.tangent);
  return f;
}

/// One classical RK4 step with speed and front-wheel rate held constant.
/// The wheel angle is clamped to the actuator range afterwards; a rate that
/// pushes further into an active limit is dropped.
inline VehicleState step(const VehicleGeometry& geom, const VehicleState& state, double v,
                         double u, double h, const ActuatorLimits& limits = {}) {
  if (!(h > 0.0)) throw DomainError("integration step must be positive");
  if ((state.delta >= limits.delta_max && u > 0.0) ||
      (state.delta <= -limits.delta_max && u < 0.0)) {
    u = 0.0;
  }
  auto offset = [](const VehicleState& s, const StateDerivative& d, double dt) {
    return VehicleState{s.x + dt * d.x, s.y + dt * d.y, s.psi + dt * d.psi, s.delta + dt * d.delta};
  };
  const auto k1 = derivatives(geom, state, v, u);
  const auto k2 = derivatives(geom, offset(state, k1, 0.5 * h), v, u);
  const auto k3 = derivatives(geom, offset(state, k2, 0.5 * h), v, u);
  const auto k4 = derivatives(geom, offset(state, k3, h), v, u);
  VehicleState next{
      state.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
      state.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
      state.psi + h / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi),
      state.delta + h / 6.0 * (k1.delta + 2.0 * k2.delta + 2.0 * k3.delta + k4.delta),
  };
  if (!(std::isfinite(next.x) && std::isfinite(next.y) && std::isfinite(next.psi) &&
        std::isfinite(next.delta))) {
    throw NumericError("integration produced a non-finite state");
  }
  next.delta = std::clamp(next.delta, -limits.delta_max, limits.delta_max);
  next.psi = wrap_angle(next.psi);
  return next;
}

}  // namespace twopoint
