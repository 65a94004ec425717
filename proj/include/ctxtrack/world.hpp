#pragma once
/**
 * @file   world.hpp
 * @brief  Planar world state, sector field of view and occlusion queries.
 *
 * The sensor sits at the robot position and looks along heading + pan. The
 * field of view is a circular sector; the effective field of view removes the
 * shadows cast by occluder segments.
 */

#include "ctxtrack/geometry.hpp"

#include <optional>
#include <vector>

namespace ctxtrack {

/// Sensor platform configuration: base pose plus head pan relative to the heading.
struct RobotConfig {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
  double pan = 0.0;

  double sensor_bearing() const { return wrap_angle(heading + pan); }
};

struct FovParams {
  double opening_angle = kPi / 3.0;
  double radius = 4.0;

  /// Throws std::invalid_argument unless 0 < opening_angle < 2*pi and radius > 0.
  void validate() const;
  double area() const { return 0.5 * opening_angle * radius * radius; }
};

struct Target {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  bool present = true;
  /// Id of the human carrying the target; a carried target is not observable.
  std::optional<int> carrier;
  std::optional<Vec2> drop_position;
  double drop_time = 0.0;
};

struct Occluder {
  int id = 0;
  Segment segment;
};

struct Human {
  int id = 0;
  Vec2 position = Vec2::Zero();
  std::optional<Vec2> goal;
  double speed = 0.8;
};

struct WorldState {
  RobotConfig robot;
  Target target;
  std::vector<Occluder> occluders;
  std::vector<Human> humans;
  double time = 0.0;
  Bounds bounds;
  double pan_max = kPi / 2.0;

  const Human* find_human(int id) const;
  Human* find_human(int id);
  const Occluder* find_occluder(int id) const;
};

struct NavCommand {
  RobotConfig target_config;
  double max_speed = 0.5;
  double max_turn_rate = 1.0;
};

/// Sector membership, ignoring occlusion.
bool fov_contains(const RobotConfig& q, const FovParams& f, const Vec2& p);

/// Sector membership minus the shadows of the world's occluders.
bool effective_fov_contains(const WorldState& world, const RobotConfig& q, const FovParams& f, const Vec2& p);

/// True if the open sight line from `from` to `to` crosses any occluder.
bool line_of_sight_blocked(const WorldState& world, const Vec2& from, const Vec2& to);

/// Range reading along a world bearing: first occluder or target-disc hit, else `max_range`.
double range_along(const WorldState& world, const Vec2& origin, double bearing, double max_range,
                   double target_radius);

/// Advances the world by `dt`: robot kinematics toward `cmd`, target and human motion, drops.
/// Throws std::invalid_argument for non-finite or non-positive dt.
WorldState step_world(const WorldState& world, const NavCommand& cmd, double dt);

/// The command that holds the robot where it is.
NavCommand hold_command(const RobotConfig& q, double max_speed, double max_turn_rate);

}  // namespace ctxtrack
