#include "ctxtrack/scenario.hpp"

#include "ctxtrack/edits.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ctxtrack {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 7> kEventNames{{
    {EventKind::MoveTarget, "move_target"},
    {EventKind::SetTargetVelocity, "set_target_velocity"},
    {EventKind::PlaceOccluder, "place_occluder"},
    {EventKind::RemoveOccluder, "remove_occluder"},
    {EventKind::HumanAppear, "human_appear"},
    {EventKind::HumanMove, "human_move"},
    {EventKind::HumanTakesTarget, "human_takes_target"},
}};

std::string join(const std::vector<std::string>& lines) {
  std::string out = "invalid scenario:";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

}  // namespace

std::string_view to_string(EventKind k) {
  for (const auto& [kind, name] : kEventNames)
    if (kind == k) return name;
  return "?";
}

EventKind event_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kEventNames)
    if (name == s) return kind;
  throw std::invalid_argument("unknown event kind '" + std::string(s) + "'");
}

std::optional<double> ScenarioScript::unrecoverable_time() const {
  for (const auto& e : events)
    if (e.unrecoverable) return e.time;
  return std::nullopt;
}

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

void apply_event(WorldState& world, const ScenarioEvent& e) {
  switch (e.kind) {
    case EventKind::MoveTarget: move_target(world, e.position); break;
    case EventKind::SetTargetVelocity: set_target_velocity(world, e.velocity); break;
    case EventKind::PlaceOccluder: place_occluder(world, e.segment, e.id); break;
    case EventKind::RemoveOccluder: remove_occluder(world, e.id); break;
    case EventKind::HumanAppear: spawn_human(world, e.position, e.id, e.speed); break;
    case EventKind::HumanMove: move_human(world, e.id, e.position, e.speed); break;
    case EventKind::HumanTakesTarget: take_target(world, e.id, e.position, e.duration); break;
  }
}

std::string describe(const ScenarioEvent& e) {
  std::ostringstream os;
  os << to_string(e.kind);
  switch (e.kind) {
    case EventKind::RemoveOccluder:
    case EventKind::PlaceOccluder:
    case EventKind::HumanAppear:
    case EventKind::HumanMove:
    case EventKind::HumanTakesTarget: os << " id=" << e.id; break;
    default: break;
  }
  return os.str();
}

void validate(const ScenarioScript& script) {
  std::vector<std::string> problems;
  if (!(script.duration > 0.0) || !std::isfinite(script.duration)) problems.push_back("duration must be positive");
  const auto& w = script.initial;
  if (!(w.bounds.max.array() > w.bounds.min.array()).all()) problems.push_back("bounds are empty");
  if (!w.bounds.contains(w.robot.position)) problems.push_back("robot starts outside the bounds");
  if (!w.bounds.contains(w.target.position)) problems.push_back("target starts outside the bounds");
  for (const auto& o : w.occluders)
    if (!w.bounds.contains(o.segment.a) || !w.bounds.contains(o.segment.b))
      problems.push_back("occluder " + std::to_string(o.id) + " lies outside the bounds");
  for (const auto& h : w.humans)
    if (!w.bounds.contains(h.position)) problems.push_back("human " + std::to_string(h.id) + " starts outside the bounds");

  // Dry run on a copy so id references are checked against the world as it will be.
  WorldState dry = w;
  double previous = -INFINITY;
  for (std::size_t i = 0; i < script.events.size(); ++i) {
    const auto& e = script.events[i];
    const std::string where = "event " + std::to_string(i) + " (" + std::string(to_string(e.kind)) + " at t=" +
                              std::to_string(e.time) + "): ";
    if (!std::isfinite(e.time) || e.time < 0.0) problems.push_back(where + "time must be nonnegative");
    if (e.time < previous) problems.push_back(where + "events are not sorted by time");
    if (e.time > script.duration) problems.push_back(where + "occurs after the end of the trial");
    previous = std::max(previous, e.time);
    dry.time = e.time;
    auto& t = dry.target;
    if (t.carrier && t.drop_position && t.drop_time <= e.time + 1e-9) {
      t.position = *t.drop_position;
      t.present = true;
      t.carrier.reset();
      t.drop_position.reset();
    }
    try {
      apply_event(dry, e);
    } catch (const std::exception& ex) {
      problems.push_back(where + ex.what());
    }
  }
  if (!problems.empty()) throw ScenarioError(std::move(problems));
}

Json event_json(const ScenarioEvent& e) {
  Json j = {{"time", e.time}, {"kind", std::string(to_string(e.kind))}};
  switch (e.kind) {
    case EventKind::MoveTarget: j["position"] = vec_json(e.position); break;
    case EventKind::SetTargetVelocity: j["velocity"] = vec_json(e.velocity); break;
    case EventKind::PlaceOccluder:
      j["id"] = e.id;
      j["segment"] = segment_json(e.segment);
      break;
    case EventKind::RemoveOccluder: j["id"] = e.id; break;
    case EventKind::HumanAppear:
    case EventKind::HumanMove:
      j["id"] = e.id;
      j["position"] = vec_json(e.position);
      if (e.speed) j["speed"] = *e.speed;
      break;
    case EventKind::HumanTakesTarget:
      j["id"] = e.id;
      j["position"] = vec_json(e.position);
      j["duration"] = e.duration;
      break;
  }
  if (e.unrecoverable) j["unrecoverable"] = true;
  return j;
}

ScenarioEvent event_from_json(const Json& j) {
  ScenarioEvent e;
  e.time = j.at("time").get<double>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("position")) e.position = vec_from_json(j["position"]);
  if (j.contains("velocity")) e.velocity = vec_from_json(j["velocity"]);
  if (j.contains("segment")) e.segment = segment_from_json(j["segment"]);
  e.id = j.value("id", 0);
  e.duration = j.value("duration", 0.0);
  if (j.contains("speed")) e.speed = j["speed"].get<double>();
  e.unrecoverable = j.value("unrecoverable", false);
  return e;
}

Json scenario_json(const ScenarioScript& s) {
  Json events = Json::array();
  for (const auto& e : s.events) events.push_back(event_json(e));
  return {{"name", s.name}, {"duration", s.duration}, {"seed", s.seed}, {"world", world_json(s.initial)},
          {"events", events}};
}

ScenarioScript scenario_from_json(const Json& j) {
  ScenarioScript s;
  std::vector<std::string> problems;
  try {
    s.name = j.value("name", std::string("unnamed"));
    s.duration = j.at("duration").get<double>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.initial = world_from_json(j.at("world"));
    const auto& events = j.value("events", Json::array());
    for (std::size_t i = 0; i < events.size(); ++i) {
      try {
        s.events.push_back(event_from_json(events[i]));
      } catch (const std::exception& ex) {
        problems.push_back("event " + std::to_string(i) + ": " + ex.what());
      }
    }
  } catch (const std::exception& ex) {
    problems.push_back(ex.what());
  }
  if (!problems.empty()) throw ScenarioError(std::move(problems));
  validate(s);
  return s;
}

ScenarioScript load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"cannot open scenario file " + path});
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ScenarioError({path + ": " + e.what()});
  }
  return scenario_from_json(j);
}

}  // namespace ctxtrack
