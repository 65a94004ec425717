#include "ctxtrack/harness.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace ctxtrack {

namespace {

// Reference values from the physical-robot experiments, printed alongside.
constexpr double kRefSr = 0.82;
constexpr double kRefTr = 0.71;
constexpr double kRefArt = 10.22;
constexpr double kRefFt = 232.0;
constexpr double kRefTrack = 0.88;
constexpr double kRefSearch = 0.74;

constexpr std::uint64_t kAgentStream = 1;

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json summary_json(const Summary& s) { return {{"mean", s.mean}, {"sd", s.sd}, {"n", s.n}}; }

}  // namespace

Simulation::Simulation(ScenarioScript script, RunConfig config, std::uint64_t seed)
    : script_(std::move(script)), config_(std::move(config)), world_(script_.initial), rng_(make_stream(seed, kAgentStream)) {
  validate(script_);
  config_.validate();
  world_.time = 0.0;
  total_ticks_ = std::lround(script_.duration / config_.agent.dt);
  agent_ = initial_agent(world_, config_.agent, rng_);
}

bool Simulation::finished() const { return tick_ >= total_ticks_ || agent_.terminal; }

void Simulation::apply(const std::function<std::string(WorldState&)>& edit) {
  WorldState copy = world_;
  std::string label = edit(copy);
  world_ = std::move(copy);
  pending_labels_.push_back(std::move(label));
}

TickRecord Simulation::step(std::size_t particles) {
  const double dt = config_.agent.dt;
  const double now = static_cast<double>(tick_) * dt;
  world_.time = now;

  TickRecord rec;
  rec.events = std::move(pending_labels_);
  pending_labels_.clear();
  while (next_event_ < script_.events.size() && script_.events[next_event_].time <= now + 1e-9) {
    const auto& e = script_.events[next_event_++];
    apply_event(world_, e);
    rec.events.push_back(describe(e));
  }

  TickOutput out = ctxtrack::tick(agent_, world_, config_.agent, rng_);
  const auto& rep = out.report;
  const auto& ex = out.agent.execution;

  rec.tick = tick_;
  rec.time = now;
  rec.world = world_;
  rec.belief = out.agent.belief;
  if (particles > 0) rec.particles = decimate(out.agent.particles, particles);
  rec.action = ex.action;
  rec.phase = ex.phase;
  rec.ticks_elapsed = ex.ticks_elapsed;
  rec.finished_action = rep.finished_action;
  rec.finished_phase = rep.finished_phase;
  rec.decision = rep.decision;
  rec.detection = rep.detection.value;
  rec.source = rep.detection.source;
  rec.accepted = rep.detection_accepted;
  rec.features = rep.features.features;
  rec.overlap = rep.features.overlap;
  rec.depth_drop = rep.features.depth_drop;
  for (const auto& h : rep.humans) rec.humans_seen.push_back(h.id);
  rec.view = rep.chosen_view;
  rec.command = out.command.target_config;
  rec.irrecoverable = rep.irrecoverable;
  rec.loss_elapsed = rep.loss_elapsed;

  agent_ = std::move(out.agent);
  world_ = step_world(world_, out.command, dt);
  ++tick_;
  world_.time = static_cast<double>(tick_) * dt;
  return rec;
}

TrialResult run_trial(const ScenarioScript& script, const RunConfig& config, std::uint64_t seed,
                      bool keep_particles) {
  Simulation sim(script, config, seed);
  TrialResult result;
  result.trace.header = {kTraceVersion, seed, script, config};
  result.trace.ticks.reserve(static_cast<std::size_t>(sim.total_ticks()));
  const std::size_t particles = keep_particles ? config.trace.particles : 0;
  while (!sim.finished()) result.trace.ticks.push_back(sim.step(particles));
  result.metrics = compute_metrics(result.trace);
  return result;
}

std::vector<TrialMetrics> run_trials(const ScenarioScript& script, const RunConfig& config,
                                     const BatchOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("at least one trial is required");
  const auto n = static_cast<std::size_t>(options.trials);
  std::vector<TrialMetrics> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = run_trial(script, config, derive_seed(options.seed, i), false).metrics;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

std::vector<ScenarioReport> run_batch(const std::vector<ScenarioScript>& scripts, const RunConfig& config,
                                      const BatchOptions& options) {
  std::vector<ScenarioReport> reports;
  for (const auto& s : scripts) reports.push_back(aggregate(s.name, run_trials(s, config, options)));
  return reports;
}

Json metrics_json(const TrialMetrics& m) {
  Json episodes = Json::array();
  for (const auto& e : m.episodes) episodes.push_back({{"loss_time", e.loss_time}, {"restore_time", opt(e.restore_time)}});
  Json actions = Json::object();
  for (auto a : kAllActions)
    actions[std::string(to_string(a))] = {{"complete", m.completed[index(a)]}, {"failed", m.failed[index(a)]}};
  return {{"success_ratio", opt(m.success_ratio())},
          {"tracking_ratio", m.tracking_ratio},
          {"failure_time", opt(m.failure_time)},
          {"episodes", episodes},
          {"actions", actions},
          {"ticks", m.ticks}};
}

Json report_json(const std::vector<ScenarioReport>& reports) {
  Json out = Json::array();
  for (const auto& r : reports) {
    Json actions = Json::object();
    for (auto a : kAllActions)
      actions[std::string(to_string(a))] = {{"complete", r.completed[index(a)]},
                                            {"failed", r.failed[index(a)]},
                                            {"success", opt(r.action_success(a))}};
    Json trials = Json::array();
    for (const auto& t : r.trials) trials.push_back(metrics_json(t));
    out.push_back({{"scenario", r.scenario},
                   {"trials", r.trials.size()},
                   {"episodes", r.episodes},
                   {"success_ratio", opt(r.success_ratio)},
                   {"tracking_ratio", summary_json(r.tracking_ratio)},
                   {"restore_time", summary_json(r.restore_time)},
                   {"median_restore_time", opt(r.median_restore_time)},
                   {"failure_time", summary_json(r.failure_time)},
                   {"actions", actions},
                   {"reference",
                    {{"success_ratio", kRefSr},
                     {"tracking_ratio", kRefTr},
                     {"restore_time", kRefArt},
                     {"failure_time", kRefFt},
                     {"track_success", kRefTrack},
                     {"search_success", kRefSearch}}},
                   {"per_trial", trials}});
  }
  return out;
}

void print_report(std::ostream& out, const std::vector<ScenarioReport>& reports) {
  auto cell = [&](const std::optional<double>& v, int width, int prec = 2) {
    if (v)
      out << std::setw(width) << std::fixed << std::setprecision(prec) << *v;
    else
      out << std::setw(width) << "n/a";
  };
  auto pm = [&](const Summary& s, int prec) {
    std::ostringstream os;
    if (s.n == 0)
      os << "n/a";
    else
      os << std::fixed << std::setprecision(prec) << s.mean << "±" << s.sd;
    out << std::setw(16) << os.str();
  };
  out << std::left << std::setw(14) << "scenario" << std::right << std::setw(7) << "trials" << std::setw(9) << "episodes"
      << std::setw(7) << "SR" << std::setw(16) << "TR" << std::setw(16) << "ART[s]" << std::setw(9) << "med[s]"
      << std::setw(16) << "FT[s]" << std::setw(8) << "Track" << std::setw(8) << "Move" << std::setw(8) << "Search"
      << '\n';
  for (const auto& r : reports) {
    out << std::left << std::setw(14) << r.scenario << std::right << std::setw(7) << r.trials.size() << std::setw(9)
        << r.episodes;
    cell(r.success_ratio, 7);
    pm(r.tracking_ratio, 2);
    pm(r.restore_time, 2);
    cell(r.median_restore_time, 9);
    pm(r.failure_time, 1);
    cell(r.action_success(HlAction::Track), 8);
    cell(r.action_success(HlAction::ActiveMove), 8);
    cell(r.action_success(HlAction::Search), 8);
    out << '\n';
  }
  out << std::left << std::setw(14) << "reference" << std::right << std::setw(7) << "" << std::setw(9) << "";
  cell(kRefSr, 7);
  out << std::setw(16) << "0.71±0.10" << std::setw(16) << "10.22±7.90" << std::setw(9) << "" << std::setw(16)
      << "232.0±44.2";
  cell(kRefTrack, 8);
  out << std::setw(8) << "";
  cell(kRefSearch, 8);
  out << '\n';
}

}  // namespace ctxtrack
