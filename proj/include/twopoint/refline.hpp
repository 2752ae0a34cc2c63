#pragma once

// Target-lane reference lines built from straight and circular-arc
// primitives, with closed-form frame evaluation and shadow-point projection.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "twopoint/angles.hpp"
#include "twopoint/errors.hpp"

namespace twopoint {

using Vec2 = Eigen::Vector2d;

inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }

// Rotates by +90 degrees (right-handed normal).
inline Vec2 left_normal(const Vec2& t) { return {-t.y(), t.x()}; }

struct FramePoint {
  Vec2 position = Vec2::Zero();
  Vec2 tangent = Vec2::UnitX();
  Vec2 normal = Vec2::UnitY();
  double orientation = 0.0;  // (-pi, pi]
  double curvature = 0.0;    // 1/m, signed, positive turns left
  double station = 0.0;      // arc length from the line start
};

struct ShadowResult {
  FramePoint frame;
  // <y_s, r> with r = r_s - r_v. Positive when the vehicle is on the
  // negative-normal (right) side of the line.
  double signed_lateral = 0.0;
  double distance = 0.0;
  // <r, x_s>; zero for a proper shadow point.
  double along_track = 0.0;
};

enum class SegmentKind { kLine, kArc };

// Primitive shape description, used to build a line from a start pose.
struct SegmentSpec {
  SegmentKind kind = SegmentKind::kLine;
  double length = 0.0;
  double curvature = 0.0;  // must be 0 for lines, nonzero for arcs
};

class Segment {
 public:
  Segment(SegmentKind kind, Vec2 start, double heading, double length,
          double curvature, double station0)
      : kind_(kind),
        start_(std::move(start)),
        heading_(heading),
        length_(length),
        curvature_(curvature),
        station0_(station0) {
    if (!(std::isfinite(length) && length > 0.0)) {
      throw DomainError("segment length must be positive and finite");
    }
    if (!std::isfinite(heading) || !start_.allFinite()) {
      throw DomainError("segment start pose must be finite");
    }
    if (kind == SegmentKind::kLine && curvature != 0.0) {
      throw DomainError("line segment must have zero curvature");
    }
    if (kind == SegmentKind::kArc) {
      if (!(std::isfinite(curvature) && curvature != 0.0)) {
        throw DomainError("arc segment needs a finite nonzero curvature");
      }
      if (std::abs(curvature * length) > 2.0 * std::numbers::pi + 1e-12) {
        throw DomainError("arc sweep exceeds a full turn");
      }
    }
  }

  SegmentKind kind() const { return kind_; }
  const Vec2& start() const { return start_; }
  double start_heading() const { return heading_; }
  double length() const { return length_; }
  double curvature() const { return curvature_; }
  double start_station() const { return station0_; }
  double end_station() const { return station0_ + length_; }

  // Arc-only geometry.
  Vec2 center() const { return start_ + left_normal(unit_from_angle(heading_)) / curvature_; }
  double radius() const { return 1.0 / std::abs(curvature_); }
  double start_angle() const {
    const Vec2 d = start_ - center();
    return std::atan2(d.y(), d.x());
  }
  double sweep() const { return curvature_ * length_; }

  double heading_at(double ds) const { return heading_ + curvature_ * ds; }

  Vec2 position_at(double ds) const {
    if (kind_ == SegmentKind::kLine) {
      return start_ + ds * unit_from_angle(heading_);
    }
    const double phi = heading_at(ds);
    return center() + Vec2(std::sin(phi), -std::cos(phi)) / curvature_;
  }

  FramePoint frame_at(double ds) const {
    FramePoint f;
    const double phi = heading_at(ds);
    f.position = position_at(ds);
    f.tangent = unit_from_angle(phi);
    f.normal = left_normal(f.tangent);
    f.orientation = wrap_angle(phi);
    f.curvature = curvature_;
    f.station = station0_ + ds;
    return f;
  }

  struct Foot {
    double ds = 0.0;
    double distance = 0.0;
    bool singular = false;
  };

  // Closest point on this primitive (endpoints included).
  Foot closest(const Vec2& q) const {
    if (kind_ == SegmentKind::kLine) {
      const double t = std::clamp((q - start_).dot(unit_from_angle(heading_)), 0.0, length_);
      return {t, (position_at(t) - q).norm(), false};
    }
    const Vec2 c = center();
    const Vec2 rel = q - c;
    if (rel.norm() <= 1e-12 * std::max(1.0, radius())) {
      return {0.0, radius(), true};
    }
    // Foot on the full circle: the point whose radial direction matches rel.
    const Vec2 w = curvature_ * rel;
    double delta = std::atan2(w.y(), w.x()) + 0.5 * std::numbers::pi - heading_;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    delta = std::fmod(delta, kTwoPi);
    if (curvature_ > 0.0) {
      if (delta < 0.0) delta += kTwoPi;
    } else if (delta > 0.0) {
      delta -= kTwoPi;
    }
    const double ds = delta / curvature_;
    if (ds >= 0.0 && ds <= length_) {
      return {ds, (position_at(ds) - q).norm(), false};
    }
    const double d0 = (position_at(0.0) - q).norm();
    const double d1 = (position_at(length_) - q).norm();
    return d0 <= d1 ? Foot{0.0, d0, false} : Foot{length_, d1, false};
  }

 private:
  SegmentKind kind_;
  Vec2 start_;
  double heading_;
  double length_;
  double curvature_;
  double station0_;
};

class ReferenceLine {
 public:
  static constexpr double kJunctionTolerance = 1e-9;
  static constexpr double kAmbiguityTolerance = 1e-6;

  // Chains primitives from a start pose; G1 continuity holds by construction.
  static ReferenceLine from_pose(const Vec2& start, double heading,
                                 const std::vector<SegmentSpec>& specs) {
    if (specs.empty()) throw DomainError("reference line needs at least one segment");
    std::vector<Segment> segments;
    segments.reserve(specs.size());
    Vec2 p = start;
    double th = heading;
    double s = 0.0;
    for (const auto& spec : specs) {
      const double kappa = spec.kind == SegmentKind::kLine ? 0.0 : spec.curvature;
      segments.emplace_back(spec.kind, p, th, spec.length, kappa, s);
      p = segments.back().position_at(spec.length);
      th = segments.back().heading_at(spec.length);
      s += spec.length;
    }
    return ReferenceLine(std::move(segments));
  }

  static ReferenceLine straight(const Vec2& start, double heading, double length) {
    return from_pose(start, heading, {{SegmentKind::kLine, length, 0.0}});
  }

  static ReferenceLine arc(const Vec2& start, double heading, double length, double curvature) {
    return from_pose(start, heading, {{SegmentKind::kArc, length, curvature}});
  }

  // Explicit segments; checks station bookkeeping and G1 continuity.
  explicit ReferenceLine(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw DomainError("reference line needs at least one segment");
    double s = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& seg = segments_[i];
      if (std::abs(seg.start_station() - s) > kJunctionTolerance) {
        throw DomainError("segment stations are not contiguous");
      }
      if (i > 0) {
        const auto& prev = segments_[i - 1];
        const double gap = (prev.position_at(prev.length()) - seg.start()).norm();
        const double turn =
            std::abs(wrap_angle(prev.heading_at(prev.length()) - seg.start_heading()));
        if (gap > kJunctionTolerance || turn > kJunctionTolerance) {
          throw DomainError("segments " + std::to_string(i - 1) + " and " + std::to_string(i) +
                            " are not G1-continuous");
        }
      }
      s = seg.end_station();
    }
    total_length_ = s;
  }

  const std::vector<Segment>& segments() const { return segments_; }
  double total_length() const { return total_length_; }

  // Index of the segment owning station s (left-closed; the end belongs to
  // the last segment).
  std::size_t segment_index(double s) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                               [](double v, const Segment& seg) { return v < seg.start_station(); });
    const auto idx = static_cast<std::size_t>(std::distance(segments_.begin(), it));
    return idx == 0 ? 0 : idx - 1;
  }

  FramePoint point_at(double s) const {
    if (!(s >= 0.0 && s <= total_length_)) {
      throw RangeError("station " + std::to_string(s) + " outside [0, " +
                       std::to_string(total_length_) + "]");
    }
    const auto& seg = segments_[segment_index(s)];
    FramePoint f = seg.frame_at(s - seg.start_station());
    f.station = s;
    return f;
  }

  ShadowResult project(const Vec2& q) const {
    struct Candidate {
      double station;
      double distance;
      bool singular;
    };
    std::vector<Candidate> cands;
    cands.reserve(segments_.size());
    for (const auto& seg : segments_) {
      const auto foot = seg.closest(q);
      cands.push_back({seg.start_station() + foot.ds, foot.distance, foot.singular});
    }
    const auto best = std::min_element(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
      return a.distance < b.distance;
    });
    if (best->singular) {
      throw SingularityError("vehicle at the center of an arc segment");
    }
    const Vec2 best_pos = point_at(best->station).position;
    for (const auto& c : cands) {
      if (&c == &*best || c.distance > best->distance + kAmbiguityTolerance) continue;
      if (c.singular) throw SingularityError("vehicle at the center of an arc segment");
      if ((point_at(c.station).position - best_pos).norm() > kAmbiguityTolerance) {
        throw AmbiguityError("two distinct closest points on the reference line");
      }
    }

    ShadowResult out;
    out.frame = point_at(best->station);
    const Vec2 r = out.frame.position - q;
    out.signed_lateral = out.frame.normal.dot(r);
    out.distance = r.norm();
    out.along_track = out.frame.tangent.dot(r);
    const bool at_end = best->station == 0.0 || best->station == total_length_;
    if (at_end && std::abs(out.along_track) > 1e-9) {
      throw RangeError("vehicle lies beyond the end of the reference line");
    }
    return out;
  }

  FramePoint lookahead(double shadow_station, double delta_d0) const {
    if (!(delta_d0 >= 0.0)) throw DomainError("look-ahead distance must be nonnegative");
    const double s = shadow_station + delta_d0;
    if (s > total_length_) {
      throw RangeError("look-ahead point runs past the end of the reference line");
    }
    return point_at(s);
  }

  // Parallel line displaced by `offset` along the +normal (left) side.
  ReferenceLine offset(double offset) const {
    std::vector<SegmentSpec> specs;
    specs.reserve(segments_.size());
    for (const auto& seg : segments_) {
      if (seg.kind() == SegmentKind::kLine) {
        specs.push_back({SegmentKind::kLine, seg.length(), 0.0});
        continue;
      }
      const double scale = 1.0 - offset * seg.curvature();
      if (!(scale > 0.0)) {
        throw DomainError("offset reaches the center of curvature of an arc");
      }
      specs.push_back({SegmentKind::kArc, seg.length() * scale, seg.curvature() / scale});
    }
    const auto& first = segments_.front();
    const Vec2 start = first.start() + offset * left_normal(unit_from_angle(first.start_heading()));
    return from_pose(start, first.start_heading(), specs);
  }

 private:
  std::vector<Segment> segments_;
  double total_length_ = 0.0;
};

// Free-function forms of the queries.
inline FramePoint point_at(const ReferenceLine& line, double s) { return line.point_at(s); }

inline ShadowResult project(const ReferenceLine& line, const Vec2& vehicle_position) {
  return line.project(vehicle_position);
}

inline FramePoint lookahead(const ReferenceLine& line, double shadow_station, double delta_d0) {
  return line.lookahead(shadow_station, delta_d0);
}

}  // namespace twopoint
