#include "ctxtrack/bridge.hpp"

#include "ctxtrack/edits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ctxtrack {

namespace {

constexpr std::size_t kMaxSnapshotParticles = 1000;
constexpr double kMaxSpeed = 100.0;

const std::array<std::pair<CommandKind, std::string_view>, 10> kCommandNames{{
    {CommandKind::DragTarget, "drag_target"},
    {CommandKind::PlaceOccluder, "place_occluder"},
    {CommandKind::RemoveOccluder, "remove_occluder"},
    {CommandKind::MoveHuman, "move_human"},
    {CommandKind::SpawnHuman, "spawn_human"},
    {CommandKind::TakeTarget, "take_target"},
    {CommandKind::DropTarget, "drop_target"},
    {CommandKind::Pause, "pause"},
    {CommandKind::Resume, "resume"},
    {CommandKind::SetSpeed, "set_speed"},
}};

double finite_number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw ProtocolError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ProtocolError(what + " must be finite");
  return v;
}

int integer(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ProtocolError(what + " must be an integer");
  return j.get<int>();
}

Vec2 point(const Json& j, const std::string& what, const Bounds& bounds) {
  if (!j.is_array() || j.size() != 2) throw ProtocolError(what + " must be a point [x, y]");
  const Vec2 p(finite_number(j[0], what + ".x"), finite_number(j[1], what + ".y"));
  if (!bounds.contains(p)) throw ProtocolError(what + " lies outside the world bounds");
  return p;
}

Json opt_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> opt_number_from(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

std::string label(EventKind kind, int id) {
  ScenarioEvent e;
  e.kind = kind;
  e.id = id;
  return describe(e);
}

}  // namespace

const std::vector<int>& supported_protocol_versions() {
  static const std::vector<int> versions{1};
  return versions;
}

std::string_view to_string(CommandKind k) {
  for (const auto& [kind, name] : kCommandNames)
    if (kind == k) return name;
  return "unknown";
}

CommandKind command_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kCommandNames)
    if (name == s) return kind;
  throw ProtocolError("unknown command kind '" + std::string(s) + "'");
}

bool AdversaryCommand::operator==(const AdversaryCommand& o) const {
  auto same_segment = [](const std::optional<Segment>& a, const std::optional<Segment>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->a == b->a && a->b == b->b);
  };
  return kind == o.kind && position == o.position && same_segment(segment, o.segment) && id == o.id &&
         speed == o.speed && duration == o.duration;
}

AdversaryCommand command_from_json(const Json& j, const Bounds& bounds) {
  if (!j.is_object()) throw ProtocolError("command must be an object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ProtocolError("command needs a string 'kind'");
  AdversaryCommand c;
  c.kind = command_kind_from_string(j["kind"].get<std::string>());

  std::set<std::string> required, optional;
  switch (c.kind) {
    case CommandKind::DragTarget: required = {"position"}; break;
    case CommandKind::PlaceOccluder: required = {"segment"}; optional = {"id"}; break;
    case CommandKind::RemoveOccluder: required = {"id"}; break;
    case CommandKind::MoveHuman: required = {"id", "position"}; optional = {"speed"}; break;
    case CommandKind::SpawnHuman: required = {"position"}; optional = {"id", "speed"}; break;
    case CommandKind::TakeTarget: required = {"id"}; optional = {"position", "duration"}; break;
    case CommandKind::DropTarget: optional = {"position"}; break;
    case CommandKind::Pause:
    case CommandKind::Resume: break;
    case CommandKind::SetSpeed: required = {"speed"}; break;
  }
  const std::string kind(to_string(c.kind));
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    if (!required.count(key) && !optional.count(key)) throw ProtocolError(kind + ": unexpected field '" + key + "'");
  }
  for (const auto& key : required)
    if (!j.contains(key)) throw ProtocolError(kind + ": missing field '" + key + "'");

  if (j.contains("position")) c.position = point(j["position"], kind + ".position", bounds);
  if (j.contains("segment")) {
    const auto& s = j["segment"];
    if (!s.is_array() || s.size() != 2) throw ProtocolError(kind + ".segment must be [[x, y], [x, y]]");
    c.segment = Segment{point(s[0], kind + ".segment[0]", bounds), point(s[1], kind + ".segment[1]", bounds)};
    if ((c.segment->b - c.segment->a).norm() <= 0.0) throw ProtocolError(kind + ".segment has zero length");
  }
  if (j.contains("id")) c.id = integer(j["id"], kind + ".id");
  if (j.contains("speed")) {
    c.speed = finite_number(j["speed"], kind + ".speed");
    if (!(*c.speed > 0.0)) throw ProtocolError(kind + ".speed must be positive");
    if (c.kind == CommandKind::SetSpeed && *c.speed > kMaxSpeed)
      throw ProtocolError("set_speed.speed must not exceed " + std::to_string(static_cast<int>(kMaxSpeed)));
  }
  if (j.contains("duration")) {
    c.duration = finite_number(j["duration"], kind + ".duration");
    if (*c.duration < 0.0) throw ProtocolError(kind + ".duration must be nonnegative");
  }
  return c;
}

Json command_json(const AdversaryCommand& c) {
  Json j = {{"kind", std::string(to_string(c.kind))}};
  if (c.position) j["position"] = vec_json(*c.position);
  if (c.segment) j["segment"] = segment_json(*c.segment);
  if (c.id) j["id"] = *c.id;
  if (c.speed) j["speed"] = *c.speed;
  if (c.duration) j["duration"] = *c.duration;
  return j;
}

std::string apply_command(WorldState& world, const AdversaryCommand& c) {
  auto need_id = [&] {
    if (!c.id) throw std::invalid_argument(std::string(to_string(c.kind)) + " needs an id");
    return *c.id;
  };
  auto need_position = [&] {
    if (!c.position) throw std::invalid_argument(std::string(to_string(c.kind)) + " needs a position");
    return *c.position;
  };
  switch (c.kind) {
    case CommandKind::DragTarget:
      move_target(world, need_position());
      return label(EventKind::MoveTarget, 0);
    case CommandKind::PlaceOccluder: {
      if (!c.segment) throw std::invalid_argument("place_occluder needs a segment");
      return label(EventKind::PlaceOccluder, place_occluder(world, *c.segment, c.id));
    }
    case CommandKind::RemoveOccluder:
      remove_occluder(world, need_id());
      return label(EventKind::RemoveOccluder, *c.id);
    case CommandKind::MoveHuman:
      move_human(world, need_id(), need_position(), c.speed);
      return label(EventKind::HumanMove, *c.id);
    case CommandKind::SpawnHuman:
      return label(EventKind::HumanAppear, spawn_human(world, need_position(), c.id, c.speed));
    case CommandKind::TakeTarget:
      take_target(world, need_id(), c.position, c.duration.value_or(0.0));
      return label(EventKind::HumanTakesTarget, *c.id);
    case CommandKind::DropTarget:
      drop_target(world, c.position);
      return "drop_target";
    case CommandKind::Pause:
    case CommandKind::Resume:
    case CommandKind::SetSpeed: break;
  }
  throw std::invalid_argument(std::string(to_string(c.kind)) + " is not a world edit");
}

Json snapshot_json(const Snapshot& s) {
  return {{"tick", s.tick},
          {"world", world_json(s.world)},
          {"belief", belief_json(s.belief)},
          {"particles", particles_json(s.particles)},
          {"action", std::string(to_string(s.action))},
          {"phase", std::string(to_string(s.phase))},
          {"metrics",
           {{"ticks", s.metrics.ticks},
            {"tracking_ratio", s.metrics.tracking_ratio},
            {"episodes", s.metrics.episodes},
            {"restored", s.metrics.restored},
            {"failure_time", opt_number(s.metrics.failure_time)}}},
          {"paused", s.paused},
          {"finished", s.finished},
          {"speed", s.speed}};
}

Snapshot snapshot_from_json(const Json& j) {
  try {
    Snapshot s;
    s.tick = j.at("tick").get<long>();
    s.world = world_from_json(j.at("world"));
    s.belief = belief_from_json(j.at("belief"));
    s.particles = particles_from_json(j.at("particles"));
    if (s.particles.size() > kMaxSnapshotParticles) throw ProtocolError("snapshot carries more than 1000 particles");
    s.action = action_from_string(j.at("action").get<std::string>());
    const auto phase = j.at("phase").get<std::string>();
    if (phase == "Active") s.phase = Phase::Active;
    else if (phase == "Complete") s.phase = Phase::Complete;
    else if (phase == "Failed") s.phase = Phase::Failed;
    else throw ProtocolError("unknown phase '" + phase + "'");
    const auto& m = j.at("metrics");
    s.metrics.ticks = m.at("ticks").get<long>();
    s.metrics.tracking_ratio = m.at("tracking_ratio").get<double>();
    s.metrics.episodes = m.at("episodes").get<int>();
    s.metrics.restored = m.at("restored").get<int>();
    s.metrics.failure_time = opt_number_from(m, "failure_time");
    s.paused = j.at("paused").get<bool>();
    s.finished = j.at("finished").get<bool>();
    s.speed = j.at("speed").get<double>();
    return s;
  } catch (const ProtocolError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolError(std::string("malformed snapshot: ") + e.what());
  }
}

Json hello_message(int version, const Json& session_info) {
  return {{"type", "hello"}, {"version", version}, {"supported", supported_protocol_versions()}, {"session", session_info}};
}

Json snapshot_message(int version, const Snapshot& s) {
  return {{"type", "snapshot"}, {"version", version}, {"snapshot", snapshot_json(s)}};
}

Json command_message(int version, const AdversaryCommand& c, std::optional<long> ref) {
  Json j = {{"type", "command"}, {"version", version}, {"command", command_json(c)}};
  if (ref) j["ref"] = *ref;
  return j;
}

Json error_message(int version, const std::string& reason, std::optional<long> ref) {
  Json j = {{"type", "error"}, {"version", version}, {"reason", reason}};
  if (ref) j["ref"] = *ref;
  return j;
}

std::optional<int> negotiate_version(const std::vector<int>& offered, const std::vector<int>& supported) {
  std::optional<int> best;
  for (int v : offered)
    if (std::find(supported.begin(), supported.end(), v) != supported.end() && (!best || v > *best)) best = v;
  return best;
}

std::vector<int> offered_versions(const Json& hello) {
  std::vector<int> out;
  if (hello.contains("supported")) {
    const auto& s = hello["supported"];
    if (!s.is_array()) throw ProtocolError("hello.supported must be a list of versions");
    for (const auto& v : s) out.push_back(integer(v, "hello.supported[]"));
  }
  if (hello.contains("version")) out.push_back(integer(hello["version"], "hello.version"));
  if (out.empty()) throw ProtocolError("hello must state a protocol version");
  return out;
}

Session::Session(ScenarioScript script, RunConfig config, std::uint64_t seed, std::size_t record_particles)
    : sim_(std::move(script), std::move(config), seed), record_particles_(record_particles), speed_(sim_.config().bridge.speed) {
  trace_.header = {kTraceVersion, seed, sim_.script(), sim_.config()};
}

Session::Session(ScenarioScript script, RunConfig config, std::uint64_t seed)
    : Session(std::move(script), config, seed, config.trace.particles) {}

void Session::submit(AdversaryCommand c, Reject on_reject) {
  std::lock_guard lock(mutex_);
  queue_.push_back({std::move(c), std::move(on_reject)});
}

std::size_t Session::queued() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

BoundaryResult Session::advance() {
  std::deque<Pending> batch;
  {
    std::lock_guard lock(mutex_);
    batch.swap(queue_);
  }
  BoundaryResult r;
  for (auto& p : batch) {
    auto reject = [&](const std::string& reason) {
      ++r.rejected;
      if (p.on_reject) p.on_reject(reason);
    };
    const auto& c = p.command;
    switch (c.kind) {
      case CommandKind::Pause: paused_ = true; ++r.applied; continue;
      case CommandKind::Resume: paused_ = false; ++r.applied; continue;
      case CommandKind::SetSpeed:
        if (!c.speed || !(*c.speed > 0.0)) {
          reject("set_speed needs a positive speed");
          continue;
        }
        speed_ = *c.speed;
        ++r.applied;
        continue;
      default: break;
    }
    if (sim_.finished()) {
      reject("the session has finished");
      continue;
    }
    try {
      sim_.apply([&c](WorldState& w) { return apply_command(w, c); });
      ++r.applied;
    } catch (const std::invalid_argument& e) {
      reject(e.what());
    }
  }
  if (!paused_ && !sim_.finished()) {
    trace_.ticks.push_back(sim_.step(record_particles_));
    r.stepped = true;
  }
  const int every = sim_.config().bridge.snapshot_every;
  r.snapshot_due = (r.stepped && (sim_.tick() % every == 0 || sim_.finished())) || (!r.stepped && r.applied > 0);
  return r;
}

Snapshot Session::snapshot() const {
  Snapshot s;
  const auto& agent = sim_.agent();
  s.tick = sim_.tick();
  s.world = sim_.world();
  s.belief = agent.belief;
  s.particles = decimate(agent.particles, std::min(sim_.config().bridge.snapshot_particles, kMaxSnapshotParticles));
  s.action = agent.execution.action;
  s.phase = agent.execution.phase;
  const auto m = compute_metrics(trace_.ticks, sim_.config().metrics.loss_min_ticks);
  s.metrics.ticks = m.ticks;
  s.metrics.tracking_ratio = m.tracking_ratio;
  s.metrics.episodes = static_cast<int>(m.episodes.size());
  s.metrics.restored =
      static_cast<int>(std::count_if(m.episodes.begin(), m.episodes.end(), [](const auto& e) { return e.success(); }));
  s.metrics.failure_time = m.failure_time;
  s.paused = paused_;
  s.finished = sim_.finished();
  s.speed = speed_;
  return s;
}

}  // namespace ctxtrack
