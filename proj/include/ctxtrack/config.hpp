#pragma once
/**
 * @file   config.hpp
 * @brief  Run configuration: every tunable default, loadable from a JSON file.
 *
 * Keys missing from a file keep their built-in defaults; unknown keys are
 * rejected so typos do not silently fall back.
 */

#include "ctxtrack/agent.hpp"
#include "ctxtrack/serialize.hpp"

#include <string>

namespace ctxtrack {

struct TraceOptions {
  std::size_t particles = 200;  ///< particles kept per tick record
};

struct MetricOptions {
  int loss_min_ticks = 5;  ///< consecutive misses that open a loss episode
};

struct BridgeOptions {
  int protocol_version = 1;
  int snapshot_every = 2;        ///< ticks between snapshots
  double speed = 1.0;            ///< simulated seconds per wall-clock second
  std::size_t client_queue = 64; ///< pending outbound messages before a client is dropped
  std::size_t snapshot_particles = 500;
};

struct RunConfig {
  AgentParams agent;
  TraceOptions trace;
  MetricOptions metrics;
  BridgeOptions bridge;

  /// Throws std::invalid_argument on any out-of-range value.
  void validate() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json config_json(const RunConfig& c);
/// Overlays `j` on the defaults and validates. Throws ConfigError.
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::string& path);

}  // namespace ctxtrack
