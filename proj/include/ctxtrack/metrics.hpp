#pragma once
/**
 * @file   metrics.hpp
 * @brief  Trial metrics computed from tick records, and batch aggregation.
 *
 * A loss episode opens at the first tick of a run of at least
 * `loss_min_ticks` ticks without a true target detection, provided the target
 * had been detected before. It succeeds at the next true detection; episodes
 * still open when the trial ends count as failures.
 */

#include "ctxtrack/trace.hpp"

#include <array>
#include <optional>
#include <vector>

namespace ctxtrack {

struct LossEpisode {
  double loss_time = 0.0;
  std::optional<double> restore_time;  ///< seconds from loss to re-detection

  bool success() const { return restore_time.has_value(); }
};

struct TrialMetrics {
  std::vector<LossEpisode> episodes;
  double tracking_ratio = 0.0;
  std::optional<double> failure_time;
  std::array<int, kNumActions> completed{};
  std::array<int, kNumActions> failed{};
  long ticks = 0;

  /// Successful episodes / episodes; empty when there were no episodes.
  std::optional<double> success_ratio() const;
  std::vector<double> restoring_times() const;
  bool operator==(const TrialMetrics& o) const;
};

bool operator==(const LossEpisode& a, const LossEpisode& b);

TrialMetrics compute_metrics(const std::vector<TickRecord>& ticks, int loss_min_ticks);
TrialMetrics compute_metrics(const Trace& trace);

/// 1-based index of the first decision at or after `t0` that selects `action`,
/// counting decisions from `t0` on; empty if none.
std::optional<int> decision_epoch_of(const std::vector<TickRecord>& ticks, HlAction action, double t0);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};
Summary summarize(const std::vector<double>& xs);
double median(std::vector<double> xs);

struct ScenarioReport {
  std::string scenario;
  std::vector<TrialMetrics> trials;
  int episodes = 0;
  int successes = 0;
  std::optional<double> success_ratio;  ///< pooled over episodes
  Summary tracking_ratio;
  Summary restore_time;
  std::optional<double> median_restore_time;
  Summary failure_time;
  std::array<int, kNumActions> completed{};
  std::array<int, kNumActions> failed{};

  std::optional<double> action_success(HlAction a) const;
};

ScenarioReport aggregate(const std::string& scenario, const std::vector<TrialMetrics>& trials);

}  // namespace ctxtrack
