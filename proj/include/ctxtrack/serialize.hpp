#pragma once
/**
 * @file   serialize.hpp
 * @brief  JSON encodings of the world and agent values shared by traces,
 *         scenario files and the live protocol.
 */

#include "ctxtrack/context.hpp"
#include "ctxtrack/context_filter.hpp"
#include "ctxtrack/world.hpp"

#include <json.hpp>

#include <vector>

namespace ctxtrack {

using Json = nlohmann::json;

Json vec_json(const Vec2& v);
/// Accepts [x, y]; throws std::invalid_argument otherwise.
Vec2 vec_from_json(const Json& j);

Json robot_json(const RobotConfig& q);
RobotConfig robot_from_json(const Json& j);

Json segment_json(const Segment& s);
Segment segment_from_json(const Json& j);

Json world_json(const WorldState& w);
WorldState world_from_json(const Json& j);

/// {"Visible": p, "Occluded": p, ...}
Json belief_json(const ContextBelief& b);
ContextBelief belief_from_json(const Json& j);

/// [[x, y, w], ...]
Json particles_json(const std::vector<Particle>& ps);
std::vector<Particle> particles_from_json(const Json& j);

}  // namespace ctxtrack
