#include "ctxtrack/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctxtrack {

namespace {

constexpr double kStallProgress = 0.01;
constexpr double kBlockedClearance = 0.05;

ContextBelief apply_floor(const ContextBelief& b, double eps) {
  if (eps <= 0.0) return b;
  auto p = b.probabilities();
  for (auto s : kAllContexts) {
    const double base = s == ContextState::Irrecoverable ? 0.0 : 1.0 / 3.0;
    p[index(s)] = (1.0 - eps) * p[index(s)] + eps * base;
  }
  return ContextBelief::normalized(p);
}

bool arrived(const RobotConfig& q, const RobotConfig& goal, const AgentParams& params) {
  return (q.position - goal.position).norm() <= params.arrival_tolerance &&
         std::abs(wrap_angle(q.heading - goal.heading)) <= params.arrival_angle_tolerance &&
         std::abs(q.pan - goal.pan) <= params.arrival_angle_tolerance;
}

bool path_blocked(const WorldState& world, const Vec2& from, const Vec2& to) {
  if ((to - from).norm() < 1e-9) return false;
  const Segment path{from, to};
  for (const auto& o : world.occluders)
    if (segment_segment_distance(path, o.segment) < kBlockedClearance) return true;
  return false;
}

Vec2 estimate(const AgentState& agent) {
  if (agent.particles.empty()) return agent.cues.last_target.value_or(Vec2::Zero());
  return agent.particles.weighted_mean();
}

bool confirmed_in(const ActionExecution& exec, const AgentParams& params) {
  return exec.detections >= params.confirm_ticks;
}

NavCommand command_to(const RobotConfig& goal, const AgentParams& params) {
  return {goal, params.max_speed, params.max_turn_rate};
}

ActionExecution start_action(HlAction a, const AgentParams& params) {
  ActionExecution ex;
  ex.action = a;
  ex.budget = params.budgets.of(a);
  return ex;
}

}  // namespace

int ActionBudgets::of(HlAction a) const {
  switch (a) {
    case HlAction::Track: return track;
    case HlAction::ActiveMove: return active_move;
    case HlAction::Search: return search;
  }
  return track;
}

void AgentParams::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (std::abs(context.dt - dt) > 1e-12) throw std::invalid_argument("context model dt must equal the tick dt");
  fov.validate();
  sensor.validate();
  context.validate();
  tables.validate();
  utility.validate();
  if (n_particles < 1) throw std::invalid_argument("n_particles must be at least 1");
  if (!(resample_threshold >= 0.0 && resample_threshold <= 1.0))
    throw std::invalid_argument("resample_threshold must lie in [0, 1]");
  if (budgets.track < 1 || budgets.active_move < 1 || budgets.search < 1)
    throw std::invalid_argument("action budgets must be at least 1 tick");
  if (confirm_ticks < 1) throw std::invalid_argument("confirm_ticks must be at least 1");
  if (!(irrecoverable_timeout > 0.0)) throw std::invalid_argument("irrecoverable_timeout must be positive");
  if (!(max_speed > 0.0) || !(max_turn_rate > 0.0) || !(sweep_rate > 0.0))
    throw std::invalid_argument("speeds must be positive");
  if (!(arrival_tolerance > 0.0) || !(arrival_angle_tolerance > 0.0))
    throw std::invalid_argument("arrival tolerances must be positive");
  if (stall_ticks < 1) throw std::invalid_argument("stall_ticks must be at least 1");
  if (!(human_standoff >= 0.0) || !(human_cue_ttl >= 0.0) || !(scan_amplitude >= 0.0) || !(human_scan_time > 0.0) ||
      !(coverage_cell > 0.0))
    throw std::invalid_argument("search parameters must be nonnegative");
  if (!(velocity_smoothing >= 0.0 && velocity_smoothing <= 1.0) || !(velocity_decay >= 0.0 && velocity_decay <= 1.0))
    throw std::invalid_argument("velocity smoothing and decay must lie in [0, 1]");
  if (!(gate_radius > 0.0)) throw std::invalid_argument("gate_radius must be positive");
  if (!(belief_floor >= 0.0 && belief_floor < 1.0)) throw std::invalid_argument("belief_floor must lie in [0, 1)");
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Active: return "Active";
    case Phase::Complete: return "Complete";
    case Phase::Failed: return "Failed";
  }
  return "?";
}

bool irrecoverable_check(double elapsed_without_detection, double timeout) {
  return elapsed_without_detection > timeout + 1e-9 * std::max(1.0, timeout);
}

double loss_elapsed(const AgentState& agent, const AgentParams& params) {
  if (agent.tracker.confirmed) return 0.0;
  return agent.tracker.ticks_since_loss * params.dt;
}

RobotConfig aim_at(const RobotConfig& q, const Vec2& p, double pan_max) {
  RobotConfig out = q;
  if ((p - q.position).norm() < 1e-9) return out;
  const double desired = wrap_angle(bearing_to(q.position, p) - q.heading);
  if (std::abs(desired) <= pan_max) {
    out.pan = desired;
  } else {
    const double limit = desired > 0.0 ? pan_max : -pan_max;
    out.pan = limit;
    out.heading = wrap_angle(q.heading + desired - limit);
  }
  return out;
}

ScoredCandidate choose_view(const AgentState& agent, const WorldState& world, const AgentParams& params, Rng& rng) {
  const auto candidates = sample_candidates(world.robot, world, params.utility, rng);
  const auto scored = score_candidates(candidates, estimate(agent), world.robot, agent.particles, params.utility,
                                       world, params.fov);
  return scored[select_best(scored)];
}

NavCommand executor_track(ActionExecution& exec, const AgentState& agent, const WorldState& world,
                          const AgentParams& params, bool detected) {
  const RobotConfig aim = aim_at(world.robot, estimate(agent), world.pan_max);
  if (detected) {
    exec.phase = Phase::Complete;
  } else if (exec.ticks_elapsed >= exec.budget) {
    exec.phase = Phase::Failed;
  }
  // Base stays put; only heading/pan follow the estimate.
  RobotConfig goal = aim;
  goal.position = world.robot.position;
  return command_to(goal, params);
}

NavCommand executor_active_move(ActionExecution& exec, const AgentState& agent, const WorldState& world,
                                const AgentParams& params, bool detected, Rng& rng,
                                std::optional<ScoredCandidate>* chosen) {
  const RobotConfig& q = world.robot;
  auto select = [&] {
    const ScoredCandidate best = choose_view(agent, world, params, rng);
    exec.goal = best.config;
    exec.best_goal_distance = (best.config.position - q.position).norm();
    exec.stall_count = 0;
    if (chosen) *chosen = best;
  };
  if (!exec.goal) select();
  if (detected) {
    // Re-acquired on the way: stop here, facing the target.
    exec.goal = aim_at(q, estimate(agent), world.pan_max);
    exec.best_goal_distance = 0.0;
  }

  const bool at_goal = arrived(q, *exec.goal, params);
  if (at_goal && detected) {
    exec.phase = Phase::Complete;
    return command_to(*exec.goal, params);
  }
  if (exec.ticks_elapsed >= exec.budget) {
    exec.phase = Phase::Failed;
    return hold_command(q, params.max_speed, params.max_turn_rate);
  }
  if (at_goal && exec.detections == 0) select();

  const double dist = (exec.goal->position - q.position).norm();
  if (dist < exec.best_goal_distance - kStallProgress) {
    exec.best_goal_distance = dist;
    exec.stall_count = 0;
  } else if (dist > params.arrival_tolerance) {
    ++exec.stall_count;
  }
  if (exec.stall_count >= params.stall_ticks) {
    exec.phase = Phase::Failed;
    return hold_command(q, params.max_speed, params.max_turn_rate);
  }
  if (path_blocked(world, q.position, exec.goal->position)) {
    RobotConfig turn = *exec.goal;
    turn.position = q.position;
    return command_to(turn, params);
  }
  return command_to(*exec.goal, params);
}

namespace {

struct CoverageGrid {
  Vec2 origin;
  double cell;
  int nx, ny;

  CoverageGrid(const Bounds& b, double cell_size)
      : origin(b.min),
        cell(cell_size),
        nx(std::max(1, static_cast<int>(std::ceil((b.max.x() - b.min.x()) / cell_size)))),
        ny(std::max(1, static_cast<int>(std::ceil((b.max.y() - b.min.y()) / cell_size)))) {}

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  Vec2 centre(std::size_t i) const {
    const int ix = static_cast<int>(i % static_cast<std::size_t>(nx));
    const int iy = static_cast<int>(i / static_cast<std::size_t>(nx));
    return origin + Vec2((ix + 0.5) * cell, (iy + 0.5) * cell);
  }
  std::size_t index(const Vec2& p) const {
    const int ix = std::clamp(static_cast<int>(std::floor((p.x() - origin.x()) / cell)), 0, nx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor((p.y() - origin.y()) / cell)), 0, ny - 1);
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
  }
};

void mark_seen(ActionExecution& exec, const WorldState& world, const AgentParams& params) {
  const CoverageGrid grid(world.bounds, params.coverage_cell);
  if (exec.seen.size() != grid.size()) exec.seen.assign(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!exec.seen[i] && effective_fov_contains(world, world.robot, params.fov, grid.centre(i))) exec.seen[i] = 1;
}

// Candidate whose full turn would look at the most particle mass in unseen cells; the
// unseen cell count breaks near-ties. Empty if the winner is the current spot.
std::optional<ScoredCandidate> relocation_view(const ActionExecution& exec, const AgentState& agent,
                                               const WorldState& world, const AgentParams& params, Rng& rng) {
  const RobotConfig& q = world.robot;
  const CoverageGrid grid(world.bounds, params.coverage_cell);
  const auto candidates = sample_candidates(q, world, params.utility, rng);
  const auto scored =
      score_candidates(candidates, estimate(agent), q, agent.particles, params.utility, world, params.fov);
  auto is_seen = [&](std::size_t i) { return i < exec.seen.size() && exec.seen[i]; };
  auto reachable = [&](const Vec2& from, const Vec2& p) {
    return (p - from).norm() <= params.fov.radius && !line_of_sight_blocked(world, from, p);
  };
  std::vector<std::size_t> unseen_particles;
  for (std::size_t k = 0; k < agent.particles.size(); ++k)
    if (!is_seen(grid.index(agent.particles[k].x))) unseen_particles.push_back(k);

  std::optional<ScoredCandidate> pick;
  double best = -1.0;
  for (const auto& c : scored) {
    const Vec2& p = c.config.position;
    double mass = 0.0;
    for (auto k : unseen_particles)
      if (reachable(p, agent.particles[k].x)) mass += agent.particles[k].w;
    int cells = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (!is_seen(i) && reachable(p, grid.centre(i))) ++cells;
    const double score = mass + 0.01 * cells / static_cast<double>(grid.size());
    if (score > best) {
      best = score;
      pick = c;
    }
  }
  if (!pick || (pick->config.position - q.position).norm() <= params.arrival_tolerance) return std::nullopt;
  return pick;
}

}  // namespace

NavCommand executor_search(ActionExecution& exec, const AgentState& agent, const WorldState& world,
                           const AgentParams& params, bool detected, Rng& rng) {
  const RobotConfig& q = world.robot;
  if (detected) {
    exec.phase = Phase::Complete;
    RobotConfig goal = aim_at(q, estimate(agent), world.pan_max);
    goal.position = q.position;
    return command_to(goal, params);
  }
  if (exec.ticks_elapsed >= exec.budget) {
    exec.phase = Phase::Failed;
    return hold_command(q, params.max_speed, params.max_turn_rate);
  }
  mark_seen(exec, world, params);

  const bool fresh_human = agent.human && world.time - agent.human->time <= params.human_cue_ttl &&
                            std::find(exec.searched_humans.begin(), exec.searched_humans.end(), agent.human->id) ==
                                exec.searched_humans.end();
  if (fresh_human) {
    const Vec2 h = agent.human->position;
    const Vec2 d = h - q.position;
    const double dist = d.norm();
    RobotConfig goal = q;
    if (dist > params.human_standoff && dist > 1e-9) goal.position = h - params.human_standoff * d / dist;
    if (path_blocked(world, q.position, goal.position)) goal.position = q.position;
    goal.heading = dist > 1e-9 ? bearing_to(q.position, h) : q.heading;
    goal.pan = 0.0;
    if (dist <= params.human_standoff + params.arrival_tolerance) {
      if (++exec.scan_ticks * params.dt > params.human_scan_time) {
        exec.searched_humans.push_back(agent.human->id);
        exec.scan_ticks = 0;
      }
      // Local scan around the person.
      const double amplitude = std::min(params.scan_amplitude, world.pan_max);
      if (exec.scan_direction * q.pan >= amplitude - params.arrival_angle_tolerance) exec.scan_direction = -exec.scan_direction;
      goal.pan = exec.scan_direction * amplitude;
    }
    exec.goal.reset();
    return command_to(goal, params);
  }

  if (exec.goal) {
    // Relocating after an unproductive full turn.
    if (!arrived(q, *exec.goal, params) && !path_blocked(world, q.position, exec.goal->position))
      return command_to(*exec.goal, params);
    exec.goal.reset();
    exec.swept = 0.0;
  }
  if (exec.swept >= 2.0 * kPi) {
    exec.swept = 0.0;
    if (auto view = relocation_view(exec, agent, world, params, rng)) {
      exec.goal = view->config;
      return command_to(*exec.goal, params);
    }
  }
  const double rate = std::min(params.sweep_rate, params.max_turn_rate);
  exec.swept += rate * params.dt;
  RobotConfig goal = q;
  goal.heading = wrap_angle(q.heading + 1.0);
  goal.pan = 0.0;
  return {goal, params.max_speed, rate};
}

AgentState initial_agent(const WorldState& world, const AgentParams& params, Rng& rng) {
  AgentState st;
  st.particles = ParticleSet::uniform(world.bounds, params.n_particles, rng);
  st.belief = ContextBelief::uniform_recoverable();
  return st;
}

TickOutput tick(const AgentState& agent, const WorldState& world, const AgentParams& params, Rng& rng) {
  TickOutput out{agent, hold_command(world.robot, params.max_speed, params.max_turn_rate), {}};
  AgentState& st = out.agent;
  TickReport& rep = out.report;
  const RobotConfig& q = world.robot;
  if (st.terminal) {
    rep.irrecoverable = true;
    rep.loss_elapsed = loss_elapsed(st, params);
    return out;
  }
  const double now = world.time;
  const double dt = params.dt;

  // Sense.
  rep.detection = detect_target(world, q, params.fov, params.sensor, rng);
  rep.humans = detect_humans(world, q, params.fov, params.sensor, rng);
  rep.features = analyze_features(world, q, params.fov, rep.detection, rep.humans, st.history, st.last_seen,
                                  params.sensor);
  if (rep.features.current_range) st.history.record(now, *rep.features.current_range);
  const FeatureVector& theta = rep.features.features;

  // Gate detections against the track prediction.
  const Detection& z = rep.detection;
  bool accepted = false;
  if (z.value) {
    const auto predicted = st.cues.last_target ? std::optional<Vec2>(*st.cues.last_target + st.cues.velocity * dt)
                                               : std::nullopt;
    accepted = !predicted || (*z.value - *predicted).norm() <= params.gate_radius ||
               (st.previous_raw && (*z.value - *st.previous_raw).norm() <= params.gate_radius);
  }
  rep.detection_accepted = accepted;
  st.previous_raw = z.value;

  auto& tr = st.tracker;
  if (accepted) {
    ++tr.hits;
    tr.misses = 0;
    if (tr.hits >= params.confirm_ticks) tr.confirmed = true;
  } else {
    ++tr.misses;
    tr.hits = 0;
    if (tr.confirmed && tr.misses >= params.confirm_ticks) {
      tr.confirmed = false;
      tr.ticks_since_loss = 0;
    } else if (!tr.confirmed) {
      ++tr.ticks_since_loss;
    }
  }
  if (tr.confirmed) tr.ticks_since_loss = 0;

  // Particle filter, driven by the previous context belief.
  const ComponentTable components = build_components(st.cues, params.context);
  try {
    st.particles = predict(st.particles, st.belief, components, rng);
  } catch (const NoPredictionComponent&) {
    rep.predicted = false;
  }
  try {
    st.particles = update(st.particles, z, world, q, params.fov, params.sensor);
    ResampleOptions opt;
    opt.threshold = params.resample_threshold;
    opt.regenerate = z.empty();
    auto rs = resample(st.particles, world, q, params.fov, st.belief, components, opt, rng);
    st.particles = std::move(rs.particles);
    rep.regenerated = rs.regenerated;
    rep.fallback_placements = rs.fallback_placements;
  } catch (const FilterDivergence&) {
    st.particles = ParticleSet::uniform(world.bounds, params.n_particles, rng);
    st.belief = ContextBelief::uniform_recoverable();
    rep.diverged = true;
  }

  // Cues for the next prediction. Only debounced detections move the target cue,
  // so an isolated clutter hit cannot relocate the track.
  const bool cue_hit = accepted && tr.confirmed;
  if (cue_hit) {
    if (st.previous_accepted && st.last_seen) {
      const Vec2 v_inst = (*z.value - *st.last_seen) / dt;
      st.cues.velocity = (1.0 - params.velocity_smoothing) * st.cues.velocity + params.velocity_smoothing * v_inst;
    }
    st.cues.last_target = *z.value;
    st.last_seen = *z.value;
    st.last_seen_time = now;
  } else if (st.cues.last_target) {
    const Vec2 moved = *st.cues.last_target + st.cues.velocity * dt;
    st.cues.last_target = world.bounds.clamp(moved);
    if (*st.cues.last_target != moved) st.cues.velocity = Vec2::Zero();
    st.cues.velocity *= params.velocity_decay;
  }
  st.previous_accepted = cue_hit;
  if (cue_hit) {
    st.cues.occluder.reset();
  } else if ((theta.overlap || theta.depth) && !st.cues.occluder && st.last_seen) {
    Vec2 point;
    if (rep.features.occluder_point) {
      point = *rep.features.occluder_point;
    } else {
      const double range = rep.features.current_range.value_or((*st.last_seen - q.position).norm());
      point = q.position + range * unit_from_angle(bearing_to(q.position, *st.last_seen));
    }
    const Vec2 d = point - q.position;
    if (d.norm() > 1e-9) st.cues.occluder = OccluderCue{point, d.normalized()};
  }
  if (!rep.humans.empty()) {
    const Vec2 anchor = st.last_seen.value_or(q.position);
    const HumanSighting* best = &rep.humans.front();
    for (const auto& h : rep.humans)
      if ((h.position - anchor).norm() < (best->position - anchor).norm()) best = &h;
    st.human = HumanCue{best->id, best->position, now};
    st.cues.human = best->position;
  }

  // Advance the active action.
  bool finished = !st.started;
  if (st.started) {
    ActionExecution ex = st.execution;
    ++ex.ticks_elapsed;
    ex.detections = accepted ? ex.detections + 1 : 0;
    const bool detected = confirmed_in(ex, params);
    std::optional<ScoredCandidate> chosen;
    switch (ex.action) {
      case HlAction::Track: out.command = executor_track(ex, st, world, params, detected); break;
      case HlAction::ActiveMove:
        out.command = executor_active_move(ex, st, world, params, detected, rng, &chosen);
        break;
      case HlAction::Search: out.command = executor_search(ex, st, world, params, detected, rng); break;
    }
    rep.chosen_view = chosen;
    st.execution = ex;
    if (ex.phase != Phase::Active) {
      finished = true;
      rep.finished_action = ex.action;
      rep.finished_phase = ex.phase;
    }
  }

  // Context belief: transition push-forward only at an action boundary.
  ContextBelief pred = st.belief;
  if (rep.finished_action) pred = belief_predict(st.belief, *rep.finished_action, params.tables);
  try {
    st.belief = belief_update(pred, theta, params.tables);
  } catch (const std::domain_error&) {
    st.belief = ContextBelief::uniform_recoverable();
  }
  st.belief = apply_floor(st.belief, params.belief_floor);

  rep.loss_elapsed = loss_elapsed(st, params);
  if (irrecoverable_check(rep.loss_elapsed, params.irrecoverable_timeout)) {
    st.terminal = true;
    rep.irrecoverable = true;
    out.command = hold_command(q, params.max_speed, params.max_turn_rate);
    ++st.tick;
    return out;
  }

  if (finished) {
    const PlanResult decision = plan(st.belief, params.tables);
    rep.decision = decision;
    st.started = true;
    ActionExecution ex = start_action(decision.action, params);
    if (!tr.confirmed) {
      ex.searched_humans = st.execution.searched_humans;
      ex.seen = st.execution.seen;
    }
    std::optional<ScoredCandidate> chosen;
    switch (ex.action) {
      case HlAction::Track: out.command = executor_track(ex, st, world, params, false); break;
      case HlAction::ActiveMove:
        out.command = executor_active_move(ex, st, world, params, false, rng, &chosen);
        break;
      case HlAction::Search: out.command = executor_search(ex, st, world, params, false, rng); break;
    }
    if (chosen) rep.chosen_view = chosen;
    st.execution = ex;
  }
  ++st.tick;
  return out;
}

}  // namespace ctxtrack
