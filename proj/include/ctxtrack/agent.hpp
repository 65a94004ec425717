#pragma once
/**
 * @file   agent.hpp
 * @brief  Perceive / estimate / plan / act loop.
 *
 * Each tick: sense, extract features, run the particle filter, advance the
 * active high-level action, update the context belief (transition push-forward
 * only when the action finished this tick), re-plan on completion or failure,
 * and emit the executor's navigation command.
 */

#include "ctxtrack/context.hpp"
#include "ctxtrack/context_filter.hpp"
#include "ctxtrack/motion_utility.hpp"
#include "ctxtrack/pomdp.hpp"
#include "ctxtrack/random.hpp"
#include "ctxtrack/sensing.hpp"
#include "ctxtrack/world.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ctxtrack {

struct ActionBudgets {
  int track = 50;
  int active_move = 150;
  int search = 300;

  int of(HlAction a) const;
};

struct AgentParams {
  double dt = 0.1;
  FovParams fov;
  SensorParams sensor;
  ContextModelParams context;
  PomdpTables tables = PomdpTables::defaults();
  UtilityParams utility;
  std::size_t n_particles = 2000;
  double resample_threshold = 0.5;
  ActionBudgets budgets;
  int confirm_ticks = 3;                ///< consecutive detections (or misses) that flip tracking status
  double irrecoverable_timeout = 60.0;  ///< seconds of declared loss before giving up
  double max_speed = 0.5;
  double max_turn_rate = 1.0;
  double sweep_rate = 0.5;
  double scan_amplitude = 0.8;          ///< pan half-range of the local scan near a human
  double arrival_tolerance = 0.2;
  double arrival_angle_tolerance = 0.1;
  int stall_ticks = 20;
  double human_standoff = 1.0;
  double human_cue_ttl = 10.0;
  double human_scan_time = 8.0;         ///< seconds of local scan before giving up on a human
  double coverage_cell = 0.5;           ///< cell size of the Search coverage grid, m
  double velocity_smoothing = 0.3;
  double velocity_decay = 0.9;
  double gate_radius = 1.0;
  double belief_floor = 1e-3;

  void validate() const;
};

enum class Phase { Active, Complete, Failed };
std::string_view to_string(Phase p);

struct ActionExecution {
  HlAction action = HlAction::Track;
  Phase phase = Phase::Active;
  int ticks_elapsed = 0;
  int budget = 0;
  std::optional<RobotConfig> goal;
  double best_goal_distance = 0.0;
  int stall_count = 0;
  int detections = 0;  ///< consecutive accepted detections within this action
  double scan_direction = 1.0;
  double swept = 0.0;  ///< heading swept since the last relocation, rad
  int scan_ticks = 0;  ///< ticks spent scanning around the current human
  std::vector<int> searched_humans;  ///< humans already scanned without a find since the last re-acquisition
  std::vector<std::uint8_t> seen;    ///< coverage grid of cells looked at while searching
};

/// Debounced detection status behind the irrecoverable clock.
struct DetectionTracker {
  int hits = 0;
  int misses = 0;
  bool confirmed = false;
  int ticks_since_loss = 0;  ///< ticks since tracking status was last lost (or since start)
};

struct HumanCue {
  int id = 0;
  Vec2 position = Vec2::Zero();
  double time = 0.0;
};

struct AgentState {
  ContextBelief belief = ContextBelief::uniform_recoverable();
  ParticleSet particles;
  ActionExecution execution;
  bool started = false;
  bool terminal = false;
  ContextCues cues;
  std::optional<Vec2> last_seen;   ///< last confirmed detection, as observed
  double last_seen_time = 0.0;
  std::optional<Vec2> previous_raw;  ///< previous tick's raw detection
  bool previous_accepted = false;  ///< previous tick updated the target cue
  std::optional<HumanCue> human;
  RangeHistory history;
  DetectionTracker tracker;
  long tick = 0;
};

struct TickReport {
  Detection detection;
  bool detection_accepted = false;
  std::vector<HumanSighting> humans;
  FeatureAnalysis features;
  bool diverged = false;
  bool predicted = true;
  std::size_t regenerated = 0;
  std::size_t fallback_placements = 0;
  std::optional<HlAction> finished_action;
  Phase finished_phase = Phase::Active;
  std::optional<PlanResult> decision;
  std::optional<ScoredCandidate> chosen_view;
  bool irrecoverable = false;
  double loss_elapsed = 0.0;
};

struct TickOutput {
  AgentState agent;
  NavCommand command;
  TickReport report;
};

AgentState initial_agent(const WorldState& world, const AgentParams& params, Rng& rng);

TickOutput tick(const AgentState& agent, const WorldState& world, const AgentParams& params, Rng& rng);

/// One-minute rule: true once continuous non-detection exceeds `timeout`.
bool irrecoverable_check(double elapsed_without_detection, double timeout);

/// Seconds of declared loss (0 while tracking is confirmed).
double loss_elapsed(const AgentState& agent, const AgentParams& params);

/// Executors. Each updates `exec` (phase, goal) and returns the command for this tick.
/// `detected` is the debounced re-acquisition signal for this tick.
NavCommand executor_track(ActionExecution& exec, const AgentState& agent, const WorldState& world,
                          const AgentParams& params, bool detected);
NavCommand executor_active_move(ActionExecution& exec, const AgentState& agent, const WorldState& world,
                                const AgentParams& params, bool detected, Rng& rng,
                                std::optional<ScoredCandidate>* chosen);
/// Search sweeps in place; after a full turn without a find it relocates toward unseen belief mass.
NavCommand executor_search(ActionExecution& exec, const AgentState& agent, const WorldState& world,
                           const AgentParams& params, bool detected, Rng& rng);

/// Sensor configuration aiming at `p`: pan first, base rotation only for the excess beyond the pan limit.
RobotConfig aim_at(const RobotConfig& q, const Vec2& p, double pan_max);

/// Best view from the motion-utility sampler.
ScoredCandidate choose_view(const AgentState& agent, const WorldState& world, const AgentParams& params, Rng& rng);

}  // namespace ctxtrack
