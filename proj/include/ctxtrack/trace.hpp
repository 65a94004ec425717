#pragma once
/**
 * @file   trace.hpp
 * @brief  Line-delimited JSON trace: one header record, then one record per tick.
 */

#include "ctxtrack/agent.hpp"
#include "ctxtrack/config.hpp"
#include "ctxtrack/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ctxtrack {

inline constexpr int kTraceVersion = 1;

struct TraceHeader {
  int version = kTraceVersion;
  std::uint64_t seed = 0;
  ScenarioScript script;
  RunConfig config;
};

struct TickRecord {
  long tick = 0;
  double time = 0.0;
  WorldState world;  ///< state observed at this tick, before the command is applied
  ContextBelief belief;
  std::vector<Particle> particles;
  HlAction action = HlAction::Track;
  Phase phase = Phase::Active;
  int ticks_elapsed = 0;
  std::optional<HlAction> finished_action;
  Phase finished_phase = Phase::Active;
  std::optional<PlanResult> decision;
  std::optional<Vec2> detection;
  DetectionSource source = DetectionSource::None;
  bool accepted = false;
  FeatureVector features;
  double overlap = 0.0;
  std::optional<double> depth_drop;
  std::vector<int> humans_seen;
  std::optional<ScoredCandidate> view;
  RobotConfig command;
  std::vector<std::string> events;
  bool irrecoverable = false;
  double loss_elapsed = 0.0;

  bool true_detection() const { return source == DetectionSource::Target; }
};

Json header_json(const TraceHeader& h);
TraceHeader header_from_json(const Json& j);
Json tick_json(const TickRecord& r);
TickRecord tick_from_json(const Json& j);

struct Trace {
  TraceHeader header;
  std::vector<TickRecord> ticks;
};

/// One compact JSON document per line.
void write_trace(std::ostream& out, const Trace& trace);
std::string trace_string(const Trace& trace);
void save_trace(const std::string& path, const Trace& trace);
Trace read_trace(std::istream& in);
Trace load_trace(const std::string& path);

}  // namespace ctxtrack
