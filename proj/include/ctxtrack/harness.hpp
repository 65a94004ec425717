#pragma once
/**
 * @file   harness.hpp
 * @brief  Simulation driver shared by headless trials and the live session,
 *         plus trial batching and report output.
 */

#include "ctxtrack/metrics.hpp"

#include <functional>
#include <iosfwd>

namespace ctxtrack {

/// Owns one world and one agent. Edits queued through `apply` take effect at
/// the next tick boundary, after that tick's scripted events.
class Simulation {
 public:
  Simulation(ScenarioScript script, RunConfig config, std::uint64_t seed);

  const WorldState& world() const { return world_; }
  const AgentState& agent() const { return agent_; }
  const RunConfig& config() const { return config_; }
  const ScenarioScript& script() const { return script_; }
  long tick() const { return tick_; }
  /// Scripted duration reached or the agent declared the target irrecoverable.
  bool finished() const;
  long total_ticks() const { return total_ticks_; }

  /// Applies a world edit immediately (call only between steps). Throws std::invalid_argument
  /// from the edit, leaving the world unchanged; on success the label the edit returns is
  /// logged in the next record.
  void apply(const std::function<std::string(WorldState&)>& edit);

  /// Runs one tick and advances the world. `particles` caps the particles kept in the record.
  TickRecord step(std::size_t particles);

 private:
  ScenarioScript script_;
  RunConfig config_;
  WorldState world_;
  AgentState agent_;
  Rng rng_;
  long tick_ = 0;
  long total_ticks_ = 0;
  std::size_t next_event_ = 0;
  std::vector<std::string> pending_labels_;
};

struct TrialResult {
  TrialMetrics metrics;
  Trace trace;
};

/// Plays the script to completion. With `keep_particles` false, tick records carry no particles.
TrialResult run_trial(const ScenarioScript& script, const RunConfig& config, std::uint64_t seed,
                      bool keep_particles = true);

struct BatchOptions {
  int trials = 20;
  std::uint64_t seed = 0;
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

/// Trials run concurrently; trial i uses derive_seed(seed, i). Results are ordered by trial index.
std::vector<TrialMetrics> run_trials(const ScenarioScript& script, const RunConfig& config,
                                     const BatchOptions& options);

std::vector<ScenarioReport> run_batch(const std::vector<ScenarioScript>& scripts, const RunConfig& config,
                                      const BatchOptions& options);

/// Fixed-width table with reference columns.
void print_report(std::ostream& out, const std::vector<ScenarioReport>& reports);
Json report_json(const std::vector<ScenarioReport>& reports);
Json metrics_json(const TrialMetrics& m);

}  // namespace ctxtrack
