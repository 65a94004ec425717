#pragma once

#include <Eigen/Core>

#include <optional>

namespace ctxtrack {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Bearing of `p` as seen from `origin`, in (-pi, pi].
double bearing_to(const Vec2& origin, const Vec2& p);

Vec2 unit_from_angle(double a);

struct Segment {
  Vec2 a;
  Vec2 b;

  double length() const { return (b - a).norm(); }
  Vec2 midpoint() const { return 0.5 * (a + b); }
};

/// Closed-segment intersection test (touching counts).
bool segments_intersect(const Segment& s, const Segment& t);

/// True if the open segment (endpoints excluded) from `from` to `to` crosses `wall`.
/// Crossings within `eps` of either endpoint of the open segment are ignored.
bool open_segment_blocked(const Vec2& from, const Vec2& to, const Segment& wall, double eps = 1e-9);

double point_segment_distance(const Vec2& p, const Segment& s);
Vec2 closest_point_on_segment(const Vec2& p, const Segment& s);
double segment_segment_distance(const Segment& s, const Segment& t);

/// Distance along the ray `origin + t * dir` (|dir| = 1, t >= 0) to the first hit on `s`.
std::optional<double> ray_segment_hit(const Vec2& origin, const Vec2& dir, const Segment& s);

/// Distance along a unit ray to the first hit on a disc.
std::optional<double> ray_disc_hit(const Vec2& origin, const Vec2& dir, const Vec2& center, double radius);

struct Bounds {
  Vec2 min{-10.0, -10.0};
  Vec2 max{10.0, 10.0};

  bool contains(const Vec2& p) const;
  Vec2 clamp(const Vec2& p) const;
  double area() const { return (max - min).prod(); }
};

}  // namespace ctxtrack
