#include "ctxtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctxtrack {

std::optional<double> TrialMetrics::success_ratio() const {
  if (episodes.empty()) return std::nullopt;
  const auto ok = std::count_if(episodes.begin(), episodes.end(), [](const LossEpisode& e) { return e.success(); });
  return static_cast<double>(ok) / static_cast<double>(episodes.size());
}

std::vector<double> TrialMetrics::restoring_times() const {
  std::vector<double> out;
  for (const auto& e : episodes)
    if (e.restore_time) out.push_back(*e.restore_time);
  return out;
}

bool operator==(const LossEpisode& a, const LossEpisode& b) {
  return a.loss_time == b.loss_time && a.restore_time == b.restore_time;
}

bool TrialMetrics::operator==(const TrialMetrics& o) const {
  return episodes == o.episodes && tracking_ratio == o.tracking_ratio && failure_time == o.failure_time &&
         completed == o.completed && failed == o.failed && ticks == o.ticks;
}

TrialMetrics compute_metrics(const std::vector<TickRecord>& ticks, int loss_min_ticks) {
  TrialMetrics m;
  m.ticks = static_cast<long>(ticks.size());
  bool seen = false;
  long run = 0;
  double run_start = 0.0;
  long tracked = 0;
  for (const auto& r : ticks) {
    const bool hit = r.true_detection();
    if (hit) {
      if (seen && run >= loss_min_ticks) m.episodes.push_back({run_start, r.time - run_start});
      seen = true;
      run = 0;
      if (r.belief.argmax() == ContextState::Visible) ++tracked;
    } else {
      if (run == 0) run_start = r.time;
      ++run;
    }
    if (r.finished_action) {
      auto& counter = r.finished_phase == Phase::Complete ? m.completed : m.failed;
      ++counter[index(*r.finished_action)];
    }
    if (r.irrecoverable && !m.failure_time) m.failure_time = r.time;
  }
  if (seen && run >= loss_min_ticks) m.episodes.push_back({run_start, std::nullopt});
  m.tracking_ratio = ticks.empty() ? 0.0 : static_cast<double>(tracked) / static_cast<double>(ticks.size());
  return m;
}

TrialMetrics compute_metrics(const Trace& trace) {
  return compute_metrics(trace.ticks, trace.header.config.metrics.loss_min_ticks);
}

std::optional<int> decision_epoch_of(const std::vector<TickRecord>& ticks, HlAction action, double t0) {
  int epoch = 0;
  for (const auto& r : ticks) {
    if (r.time < t0 - 1e-9 || !r.decision) continue;
    ++epoch;
    if (r.decision->action == action) return epoch;
  }
  return std::nullopt;
}

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::optional<double> ScenarioReport::action_success(HlAction a) const {
  const int total = completed[index(a)] + failed[index(a)];
  if (total == 0) return std::nullopt;
  return static_cast<double>(completed[index(a)]) / total;
}

ScenarioReport aggregate(const std::string& scenario, const std::vector<TrialMetrics>& trials) {
  ScenarioReport rep;
  rep.scenario = scenario;
  rep.trials = trials;
  std::vector<double> tr, restore, ft;
  for (const auto& t : trials) {
    for (const auto& e : t.episodes) {
      ++rep.episodes;
      if (e.success()) {
        ++rep.successes;
        restore.push_back(*e.restore_time);
      }
    }
    tr.push_back(t.tracking_ratio);
    if (t.failure_time) ft.push_back(*t.failure_time);
    for (std::size_t a = 0; a < kNumActions; ++a) {
      rep.completed[a] += t.completed[a];
      rep.failed[a] += t.failed[a];
    }
  }
  if (rep.episodes > 0) rep.success_ratio = static_cast<double>(rep.successes) / rep.episodes;
  rep.tracking_ratio = summarize(tr);
  rep.restore_time = summarize(restore);
  if (!restore.empty()) rep.median_restore_time = median(restore);
  rep.failure_time = summarize(ft);
  return rep;
}

}  // namespace ctxtrack
