#pragma once
/**
 * @file   scenario.hpp
 * @brief  Scripted trials: an initial world plus a time-sorted event timeline.
 */

#include "ctxtrack/serialize.hpp"
#include "ctxtrack/world.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctxtrack {

enum class EventKind {
  MoveTarget,
  SetTargetVelocity,
  PlaceOccluder,
  RemoveOccluder,
  HumanAppear,
  HumanMove,
  HumanTakesTarget,
};

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct ScenarioEvent {
  double time = 0.0;
  EventKind kind = EventKind::MoveTarget;
  Vec2 position = Vec2::Zero();  ///< target position, human position/goal or drop position
  Vec2 velocity = Vec2::Zero();
  Segment segment{Vec2::Zero(), Vec2::Zero()};
  int id = 0;                    ///< occluder or human id
  double duration = 0.0;         ///< carry duration
  std::optional<double> speed;   ///< human walking speed
  /// Marks the event after which the target can no longer be recovered.
  bool unrecoverable = false;
};

struct ScenarioScript {
  std::string name;
  WorldState initial;
  std::vector<ScenarioEvent> events;
  double duration = 60.0;
  std::uint64_t seed = 0;

  /// Time of the first event flagged unrecoverable.
  std::optional<double> unrecoverable_time() const;
};

/// Carries one message per offending event.
class ScenarioError : public std::invalid_argument {
 public:
  explicit ScenarioError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Checks ordering, bounds, duration and id references by dry-running the timeline.
/// Throws ScenarioError listing every problem found.
void validate(const ScenarioScript& script);

/// Applies one event through the shared world edits; throws std::invalid_argument.
void apply_event(WorldState& world, const ScenarioEvent& e);

/// Short human-readable description used in trace records.
std::string describe(const ScenarioEvent& e);

Json event_json(const ScenarioEvent& e);
ScenarioEvent event_from_json(const Json& j);
Json scenario_json(const ScenarioScript& s);
/// Parses and validates.
ScenarioScript scenario_from_json(const Json& j);
ScenarioScript load_scenario(const std::string& path);

}  // namespace ctxtrack
