#pragma once
/**
 * @file   bridge.hpp
 * @brief  Live session core: adversary commands, snapshots, the wire protocol
 *         messages, and a transport-free session that applies queued commands
 *         at tick boundaries.
 *
 * The WebSocket transport lives in bridge_server.hpp; everything here is
 * usable (and tested) without a socket.
 */

#include "ctxtrack/harness.hpp"

#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctxtrack {

/// Protocol versions this build can speak, oldest first.
const std::vector<int>& supported_protocol_versions();

/// Malformed or semantically invalid message; `what()` is the reason sent back to the client.
class ProtocolError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class CommandKind {
  DragTarget,
  PlaceOccluder,
  RemoveOccluder,
  MoveHuman,
  SpawnHuman,
  TakeTarget,
  DropTarget,
  Pause,
  Resume,
  SetSpeed,
};

std::string_view to_string(CommandKind k);
CommandKind command_kind_from_string(std::string_view s);

struct AdversaryCommand {
  CommandKind kind = CommandKind::Pause;
  std::optional<Vec2> position;    ///< drag / spawn / move goal / explicit drop point
  std::optional<Segment> segment;  ///< place_occluder
  std::optional<int> id;           ///< occluder or human
  std::optional<double> speed;     ///< human walking speed, or the session speed for set_speed
  std::optional<double> duration;  ///< take_target carry time before the drop

  bool operator==(const AdversaryCommand& o) const;
};

/// Strict parse: unknown kinds or keys, missing fields, non-finite numbers and
/// positions outside `bounds` are rejected with ProtocolError.
AdversaryCommand command_from_json(const Json& j, const Bounds& bounds);
Json command_json(const AdversaryCommand& c);

/// Applies a world-editing command and returns its trace label. Throws
/// std::invalid_argument (unknown ids, nothing to drop, ...). Session controls
/// (pause, resume, set_speed) are not world edits and throw.
std::string apply_command(WorldState& world, const AdversaryCommand& c);

struct SnapshotMetrics {
  long ticks = 0;
  double tracking_ratio = 0.0;
  int episodes = 0;
  int restored = 0;
  std::optional<double> failure_time;

  bool operator==(const SnapshotMetrics& o) const = default;
};

struct Snapshot {
  long tick = 0;  ///< ticks run so far
  WorldState world;
  ContextBelief belief;
  std::vector<Particle> particles;  ///< decimated, at most 1000
  HlAction action = HlAction::Track;
  Phase phase = Phase::Active;
  SnapshotMetrics metrics;
  bool paused = false;
  bool finished = false;
  double speed = 1.0;
};

Json snapshot_json(const Snapshot& s);
Snapshot snapshot_from_json(const Json& j);

/// Wire messages. Every message is an object with "type" and "version".
Json hello_message(int version, const Json& session_info = Json::object());
Json snapshot_message(int version, const Snapshot& s);
Json command_message(int version, const AdversaryCommand& c, std::optional<long> ref = std::nullopt);
Json error_message(int version, const std::string& reason, std::optional<long> ref = std::nullopt);

/// Highest version both sides support; empty when there is none. `offered`
/// lists the client's versions (a single "version" counts as a one-element list).
std::optional<int> negotiate_version(const std::vector<int>& offered, const std::vector<int>& supported);
/// Versions offered in a client hello; throws ProtocolError when absent or malformed.
std::vector<int> offered_versions(const Json& hello);

struct BoundaryResult {
  bool stepped = false;
  std::size_t applied = 0;
  std::size_t rejected = 0;
  bool snapshot_due = false;
};

/// One simulation owned by one thread; `submit` may be called from any thread.
class Session {
 public:
  using Reject = std::function<void(const std::string& reason)>;

  /// `record_particles` caps the particles kept in each trace record (0 keeps none).
  Session(ScenarioScript script, RunConfig config, std::uint64_t seed, std::size_t record_particles);
  Session(ScenarioScript script, RunConfig config, std::uint64_t seed);

  /// Queues a command for the next tick boundary. `on_reject` is called from the
  /// simulation thread if the command cannot be applied there.
  void submit(AdversaryCommand c, Reject on_reject = nullptr);

  /// Tick boundary: applies every queued command in arrival order, then runs one
  /// tick unless paused or finished.
  BoundaryResult advance();

  Snapshot snapshot() const;
  const Trace& trace() const { return trace_; }
  const Simulation& simulation() const { return sim_; }
  bool paused() const { return paused_; }
  double speed() const { return speed_; }
  bool finished() const { return sim_.finished(); }
  std::size_t queued() const;

 private:
  struct Pending {
    AdversaryCommand command;
    Reject on_reject;
  };

  Simulation sim_;
  Trace trace_;
  std::size_t record_particles_;
  bool paused_ = false;
  double speed_;
  mutable std::mutex mutex_;
  std::deque<Pending> queue_;
};

}  // namespace ctxtrack
