#pragma once
/**
 * @file   pomdp.hpp
 * @brief  Belief MDP over the four context states and exact finite-horizon
 *         belief-tree action selection.
 *
 * Observations are the 16 joint values of the binary feature vector, with
 * p(Theta | s) = prod_i p(theta_i | s). Rewards depend on the state only.
 *
 * Value recursion (leaf value is the immediate expected reward):
 *   V_0(b)   = rho(b)
 *   Q_h(b,a) = rho(b) + discount * sum_o p(o | b, a) V_{h-1}(b^{a,o})
 *   V_h(b)   = max_a Q_h(b, a)
 */

#include "ctxtrack/context.hpp"
#include "ctxtrack/sensing.hpp"

#include <array>

namespace ctxtrack {

inline constexpr std::size_t kNumFeatures = 4;
inline constexpr std::size_t kNumObservations = 16;

struct PomdpTables {
  /// transition[a][s][s'] = P(s' | s, a)
  std::array<std::array<std::array<double, kNumContexts>, kNumContexts>, kNumActions> transition{};
  /// likelihood[f][s] = p(theta_f = 1 | s), features ordered target, overlap, depth, human.
  std::array<std::array<double, kNumContexts>, kNumFeatures> likelihood{};
  std::array<double, kNumContexts> reward{};
  double discount = 0.95;
  int horizon = 3;

  /// Default tables; the target-detection row uses `p_d`.
  static PomdpTables defaults(double p_d = 0.9);

  /// Throws std::invalid_argument on bad rows, out-of-range entries, a non-absorbing
  /// Irrecoverable row, discount outside (0,1) or horizon < 1.
  void validate() const;
};

/// Paper reward: 10 for Visible, 0 otherwise.
double reward(ContextState s);

ContextBelief belief_predict(const ContextBelief& b, HlAction a, const PomdpTables& tables);

double observation_likelihood(const FeatureVector& theta, ContextState s, const PomdpTables& tables);

/// Posterior over states given the features. Throws std::domain_error on zero total mass.
ContextBelief belief_update(const ContextBelief& b_pred, const FeatureVector& theta, const PomdpTables& tables);

double expected_reward(const ContextBelief& b, const PomdpTables& tables);

struct PlanResult {
  HlAction action = HlAction::Track;
  double value = 0.0;
  std::array<double, kNumActions> q_values{};
};

/// Exhaustive expansion over all actions and observations to depth `tables.horizon`.
/// Ties resolve to the earliest action in Track, ActiveMove, Search order.
PlanResult plan(const ContextBelief& b, const PomdpTables& tables);

}  // namespace ctxtrack
