#include "ctxtrack/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctxtrack {

void FovParams::validate() const {
  if (!(opening_angle > 0.0 && opening_angle < 2.0 * kPi))
    throw std::invalid_argument("fov opening angle must lie in (0, 2*pi)");
  if (!(radius > 0.0)) throw std::invalid_argument("fov radius must be positive");
}

const Human* WorldState::find_human(int id) const {
  for (const auto& h : humans)
    if (h.id == id) return &h;
  return nullptr;
}

Human* WorldState::find_human(int id) {
  for (auto& h : humans)
    if (h.id == id) return &h;
  return nullptr;
}

const Occluder* WorldState::find_occluder(int id) const {
  for (const auto& o : occluders)
    if (o.id == id) return &o;
  return nullptr;
}

bool fov_contains(const RobotConfig& q, const FovParams& f, const Vec2& p) {
  const Vec2 d = p - q.position;
  const double r = d.norm();
  if (r > f.radius) return false;
  if (r == 0.0) return true;
  const double off = wrap_angle(std::atan2(d.y(), d.x()) - q.sensor_bearing());
  return std::abs(off) <= 0.5 * f.opening_angle;
}

bool line_of_sight_blocked(const WorldState& world, const Vec2& from, const Vec2& to) {
  for (const auto& o : world.occluders)
    if (open_segment_blocked(from, to, o.segment)) return true;
  return false;
}

bool effective_fov_contains(const WorldState& world, const RobotConfig& q, const FovParams& f, const Vec2& p) {
  return fov_contains(q, f, p) && !line_of_sight_blocked(world, q.position, p);
}

double range_along(const WorldState& world, const Vec2& origin, double bearing, double max_range,
                   double target_radius) {
  const Vec2 dir = unit_from_angle(bearing);
  double best = max_range;
  for (const auto& o : world.occluders)
    if (auto t = ray_segment_hit(origin, dir, o.segment)) best = std::min(best, *t);
  if (world.target.present && !world.target.carrier)
    if (auto t = ray_disc_hit(origin, dir, world.target.position, target_radius)) best = std::min(best, *t);
  return best;
}

namespace {

double approach_angle(double current, double goal, double max_step) {
  const double diff = wrap_angle(goal - current);
  if (std::abs(diff) <= max_step) return goal;
  return current + std::copysign(max_step, diff);
}

Vec2 approach_point(const Vec2& current, const Vec2& goal, double max_step) {
  const Vec2 d = goal - current;
  const double dist = d.norm();
  if (dist <= max_step) return goal;
  return current + d * (max_step / dist);
}

}  // namespace

WorldState step_world(const WorldState& world, const NavCommand& cmd, double dt) {
  if (!std::isfinite(dt) || dt <= 0.0) throw std::invalid_argument("step_world: dt must be finite and positive");
  if (!(cmd.max_speed > 0.0) || !(cmd.max_turn_rate > 0.0))
    throw std::invalid_argument("step_world: command speeds must be positive");

  WorldState next = world;
  auto& robot = next.robot;
  const auto& goal = cmd.target_config;

  robot.position = world.bounds.clamp(approach_point(robot.position, goal.position, cmd.max_speed * dt));
  robot.heading = wrap_angle(approach_angle(robot.heading, goal.heading, cmd.max_turn_rate * dt));
  const double pan_goal = std::clamp(goal.pan, -world.pan_max, world.pan_max);
  const double pan_step = cmd.max_turn_rate * dt;
  const double pan_diff = pan_goal - robot.pan;
  robot.pan = std::abs(pan_diff) <= pan_step ? pan_goal : robot.pan + std::copysign(pan_step, pan_diff);

  for (auto& h : next.humans) {
    if (!h.goal) continue;
    h.position = approach_point(h.position, *h.goal, h.speed * dt);
    if (h.position == *h.goal) h.goal.reset();
  }

  auto& target = next.target;
  next.time = world.time + dt;
  if (target.carrier) {
    if (const Human* h = next.find_human(*target.carrier)) target.position = h->position;
    if (target.drop_position && next.time >= target.drop_time - 1e-9) {
      target.position = world.bounds.clamp(*target.drop_position);
      target.present = true;
      target.carrier.reset();
      target.drop_position.reset();
      target.velocity = Vec2::Zero();
    }
  } else if (target.present) {
    const Vec2 moved = target.position + target.velocity * dt;
    target.position = world.bounds.clamp(moved);
    if (target.position != moved) target.velocity = Vec2::Zero();
  }
  return next;
}

NavCommand hold_command(const RobotConfig& q, double max_speed, double max_turn_rate) {
  return NavCommand{q, max_speed, max_turn_rate};
}

}  // namespace ctxtrack
