#pragma once
/**
 * @file   edits.hpp
 * @brief  World mutations shared by scripted events and live adversary commands.
 *
 * Every function validates its arguments against the current world and throws
 * std::invalid_argument with a readable reason, leaving the world untouched.
 */

#include "ctxtrack/world.hpp"

#include <optional>

namespace ctxtrack {

/// Teleports the target (also releases it from any carrier and stops it).
void move_target(WorldState& world, const Vec2& p);
void set_target_velocity(WorldState& world, const Vec2& v);
/// Adds an occluder; a fresh id is chosen when `id` is empty. Returns the id used.
int place_occluder(WorldState& world, const Segment& s, std::optional<int> id = std::nullopt);
void remove_occluder(WorldState& world, int id);
/// Adds a human; a fresh id is chosen when `id` is empty. Returns the id used.
int spawn_human(WorldState& world, const Vec2& p, std::optional<int> id = std::nullopt,
                std::optional<double> speed = std::nullopt);
/// Sends an existing human walking towards `goal`.
void move_human(WorldState& world, int id, const Vec2& goal, std::optional<double> speed = std::nullopt);
/// Human `id` picks the target up. With `drop`, it walks there and drops it after `carry_duration` s.
void take_target(WorldState& world, int id, std::optional<Vec2> drop = std::nullopt, double carry_duration = 0.0);
/// Releases a carried target at `at`, or at the carrier's position.
void drop_target(WorldState& world, std::optional<Vec2> at = std::nullopt);

}  // namespace ctxtrack
