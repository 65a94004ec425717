#include "ctxtrack/sensing.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctxtrack {

void SensorParams::validate() const {
  if (!(p_e >= 0.0 && p_e < p_d && p_d <= 1.0)) throw std::invalid_argument("sensor: need 0 <= p_e < p_d <= 1");
  if (!(p_d_human >= 0.0 && p_d_human <= 1.0)) throw std::invalid_argument("sensor: p_d_human must be a probability");
  if (std::abs(cov(0, 1) - cov(1, 0)) > 1e-12 || !(cov(0, 0) > 0.0) || !(cov.determinant() > 0.0))
    throw std::invalid_argument("sensor: covariance must be symmetric positive definite");
  if (!(depth_window > 0.0) || !(depth_threshold > 0.0) || !(target_radius > 0.0))
    throw std::invalid_argument("sensor: window, depth threshold and target radius must be positive");
  if (!(overlap_threshold > 0.0 && overlap_threshold <= 1.0))
    throw std::invalid_argument("sensor: overlap threshold must lie in (0, 1]");
}

double overlap_ratio(const Footprint& bb_i, const Footprint& bb_j) {
  const double area_i = bb_i.area();
  if (!(area_i > 0.0)) throw std::invalid_argument("overlap_ratio: degenerate reference footprint");
  const double w = std::min(bb_i.bearing.hi, bb_j.bearing.hi) - std::max(bb_i.bearing.lo, bb_j.bearing.lo);
  const double h = std::min(bb_i.range.hi, bb_j.range.hi) - std::max(bb_i.range.lo, bb_j.range.lo);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return std::clamp(w * h / area_i, 0.0, 1.0);
}

Footprint disc_footprint(const Vec2& origin, const Vec2& p, double radius, double reference) {
  const double d = (p - origin).norm();
  const double center = wrap_angle(bearing_to(origin, p) - reference);
  const double half = d > radius ? std::asin(radius / d) : 0.5 * kPi;
  return {{center - half, center + half}, {std::max(d - radius, 0.0), d + radius}};
}

std::optional<Footprint> occluder_footprint(const Vec2& origin, const Segment& s, double reference,
                                            double sensor_offset, double half_fov, double max_range) {
  const double near = point_segment_distance(origin, s);
  if (near >= max_range) return std::nullopt;
  const double a = wrap_angle(bearing_to(origin, s.a) - reference);
  const double span = wrap_angle(bearing_to(origin, s.b) - bearing_to(origin, s.a));
  double lo = std::min(a, a + span);
  double hi = std::max(a, a + span);
  lo = std::max(lo, sensor_offset - half_fov);
  hi = std::min(hi, sensor_offset + half_fov);
  if (hi <= lo) return std::nullopt;
  return Footprint{{lo, hi}, {near, max_range}};
}

void RangeHistory::record(double time, double range) {
  samples_.push_back({time, range});
  while (!samples_.empty() && samples_.front().time < time - horizon_) samples_.pop_front();
}

bool RangeHistory::covers(double now, double window) const {
  return !samples_.empty() && samples_.front().time <= now - window + 1e-9;
}

double RangeHistory::mean(double now, double window) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : samples_) {
    if (s.time >= now - window - 1e-9 && s.time < now - 1e-9) {
      sum += s.range;
      ++n;
    }
  }
  return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

Vec2 sample_effective_fov(const WorldState& world, const RobotConfig& q, const FovParams& f, Rng& rng,
                          int max_attempts) {
  Vec2 p = q.position;
  for (int i = 0; i < max_attempts; ++i) {
    const double r = f.radius * std::sqrt(uniform01(rng));
    const double a = q.sensor_bearing() + uniform(rng, -0.5, 0.5) * f.opening_angle;
    p = q.position + r * unit_from_angle(a);
    if (!line_of_sight_blocked(world, q.position, p)) return p;
  }
  return p;
}

Detection detect_target(const WorldState& world, const RobotConfig& q, const FovParams& f,
                        const SensorParams& params, Rng& rng) {
  const auto& t = world.target;
  const bool visible = t.present && !t.carrier && effective_fov_contains(world, q, f, t.position);
  if (visible) {
    if (!bernoulli(rng, params.p_d)) return Detection::none();
    return Detection::at(sample_gaussian(rng, t.position, psd_sqrt(params.cov)), DetectionSource::Target);
  }
  if (!bernoulli(rng, params.p_e)) return Detection::none();
  return Detection::at(sample_effective_fov(world, q, f, rng), DetectionSource::Clutter);
}

std::vector<HumanSighting> detect_humans(const WorldState& world, const RobotConfig& q, const FovParams& f,
                                         const SensorParams& params, Rng& rng) {
  std::vector<HumanSighting> seen;
  for (const auto& h : world.humans) {
    if (!effective_fov_contains(world, q, f, h.position)) continue;
    if (bernoulli(rng, params.p_d_human)) seen.push_back({h.id, h.position});
  }
  return seen;
}

FeatureAnalysis analyze_features(const WorldState& world, const RobotConfig& q, const FovParams& f,
                                 const Detection& z, const std::vector<HumanSighting>& humans,
                                 const RangeHistory& history, const std::optional<Vec2>& last_target,
                                 const SensorParams& params) {
  FeatureAnalysis out;
  out.features.target = !z.empty();
  out.features.human = !humans.empty();
  if (!last_target) return out;

  const Vec2& origin = q.position;
  const double reference = bearing_to(origin, *last_target);
  const double sensor_offset = wrap_angle(q.sensor_bearing() - reference);
  const double half = 0.5 * f.opening_angle;

  if ((*last_target - origin).norm() > 1e-9) {
    const Footprint target_fp = disc_footprint(origin, *last_target, params.target_radius, reference);
    for (const auto& o : world.occluders) {
      const auto fp = occluder_footprint(origin, o.segment, reference, sensor_offset, half, f.radius);
      if (!fp) continue;
      const double ratio = overlap_ratio(target_fp, *fp);
      if (ratio > out.overlap) {
        out.overlap = ratio;
        out.occluder_id = o.id;
      }
    }
  }
  if (out.occluder_id) {
    const Segment& seg = world.find_occluder(*out.occluder_id)->segment;
    const Vec2 dir = unit_from_angle(reference);
    if (auto t = ray_segment_hit(origin, dir, seg))
      out.occluder_point = origin + *t * dir;
    else
      out.occluder_point = closest_point_on_segment(*last_target, seg);
  }
  out.features.overlap = out.overlap > params.overlap_threshold && z.empty();

  if (std::abs(sensor_offset) <= half) {
    out.current_range = range_along(world, origin, reference, f.radius, params.target_radius);
    if (history.covers(world.time, params.depth_window)) {
      const double mean = history.mean(world.time, params.depth_window);
      if (std::isfinite(mean)) out.depth_drop = mean - *out.current_range;
    }
  }
  out.features.depth = out.depth_drop && *out.depth_drop > params.depth_threshold && z.empty();
  return out;
}

FeatureVector extract_features(const WorldState& world, const RobotConfig& q, const FovParams& f,
                               const Detection& z, const std::vector<HumanSighting>& humans,
                               const RangeHistory& history, const std::optional<Vec2>& last_target,
                               const SensorParams& params) {
  return analyze_features(world, q, f, z, humans, history, last_target, params).features;
}

}  // namespace ctxtrack
