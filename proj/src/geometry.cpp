#include "ctxtrack/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace ctxtrack {

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double bearing_to(const Vec2& origin, const Vec2& p) {
  const Vec2 d = p - origin;
  return wrap_angle(std::atan2(d.y(), d.x()));
}

Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }

namespace {

double cross(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

int orientation(const Vec2& p, const Vec2& q, const Vec2& r) {
  const double v = cross(q - p, r - p);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(const Vec2& p, const Vec2& q, const Vec2& r) {
  // q collinear with p-r; is it between them?
  return q.x() <= std::max(p.x(), r.x()) && q.x() >= std::min(p.x(), r.x()) &&
         q.y() <= std::max(p.y(), r.y()) && q.y() >= std::min(p.y(), r.y());
}

}  // namespace

bool segments_intersect(const Segment& s, const Segment& t) {
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, t.a, s.b)) return true;
  if (o2 == 0 && on_segment(s.a, t.b, s.b)) return true;
  if (o3 == 0 && on_segment(t.a, s.a, t.b)) return true;
  if (o4 == 0 && on_segment(t.a, s.b, t.b)) return true;
  return false;
}

bool open_segment_blocked(const Vec2& from, const Vec2& to, const Segment& wall, double eps) {
  const Vec2 d = to - from;
  const double len = d.norm();
  if (len <= eps) return false;
  const Vec2 e = wall.b - wall.a;
  const double denom = cross(d, e);
  const Vec2 w = wall.a - from;
  if (std::abs(denom) < 1e-15) {
    // Parallel. Collinear overlap strictly inside the open segment blocks.
    if (std::abs(cross(w, d)) > 1e-12 * len) return false;
    const double ta = d.dot(wall.a - from) / (len * len);
    const double tb = d.dot(wall.b - from) / (len * len);
    const double lo = std::max(std::min(ta, tb), 0.0);
    const double hi = std::min(std::max(ta, tb), 1.0);
    const double tol = eps / len;
    return hi - lo > 0.0 && lo < 1.0 - tol && hi > tol;
  }
  const double t = cross(w, e) / denom;  // along from->to
  const double u = cross(w, d) / denom;  // along wall
  const double tol = eps / len;
  return t > tol && t < 1.0 - tol && u >= 0.0 && u <= 1.0;
}

Vec2 closest_point_on_segment(const Vec2& p, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double l2 = e.squaredNorm();
  if (l2 == 0.0) return s.a;
  const double t = std::clamp((p - s.a).dot(e) / l2, 0.0, 1.0);
  return s.a + t * e;
}

double point_segment_distance(const Vec2& p, const Segment& s) {
  return (p - closest_point_on_segment(p, s)).norm();
}

double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

std::optional<double> ray_segment_hit(const Vec2& origin, const Vec2& dir, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double denom = cross(dir, e);
  const Vec2 w = s.a - origin;
  if (std::abs(denom) < 1e-15) {
    if (std::abs(cross(w, dir)) > 1e-12) return std::nullopt;
    // Collinear: nearest endpoint ahead of the origin.
    const double ta = w.dot(dir);
    const double tb = (s.b - origin).dot(dir);
    if (ta < 0.0 && tb < 0.0) return std::nullopt;
    if (ta <= 0.0 || tb <= 0.0) return 0.0;
    return std::min(ta, tb);
  }
  const double t = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::optional<double> ray_disc_hit(const Vec2& origin, const Vec2& dir, const Vec2& center, double radius) {
  const Vec2 oc = origin - center;
  const double b = oc.dot(dir);
  const double c = oc.squaredNorm() - radius * radius;
  if (c <= 0.0) return 0.0;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double t = -b - std::sqrt(disc);
  if (t < 0.0) return std::nullopt;
  return t;
}

bool Bounds::contains(const Vec2& p) const {
  return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
}

Vec2 Bounds::clamp(const Vec2& p) const {
  return {std::clamp(p.x(), min.x(), max.x()), std::clamp(p.y(), min.y(), max.y())};
}

}  // namespace ctxtrack
