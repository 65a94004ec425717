#include "ctxtrack/pomdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ctxtrack {

namespace {

using Vec4 = std::array<double, kNumContexts>;
using ObsTable = std::array<Vec4, kNumObservations>;

constexpr double kTieTolerance = 1e-12;

ObsTable observation_table(const PomdpTables& tables) {
  ObsTable t{};
  for (int o = 0; o < static_cast<int>(kNumObservations); ++o) {
    const auto theta = FeatureVector::from_symbol(o);
    for (auto s : kAllContexts) t[o][index(s)] = observation_likelihood(theta, s, tables);
  }
  return t;
}

Vec4 push_forward(const Vec4& b, HlAction a, const PomdpTables& tables) {
  Vec4 out{};
  const auto& T = tables.transition[index(a)];
  for (std::size_t s = 0; s < kNumContexts; ++s) {
    if (b[s] == 0.0) continue;
    for (std::size_t s2 = 0; s2 < kNumContexts; ++s2) out[s2] += T[s][s2] * b[s];
  }
  return out;
}

double rho(const Vec4& b, const PomdpTables& tables) {
  double r = 0.0;
  for (std::size_t s = 0; s < kNumContexts; ++s) r += b[s] * tables.reward[s];
  return r;
}

double value(const Vec4& b, int depth, const PomdpTables& tables, const ObsTable& obs, PlanResult* root);

double q_value(const Vec4& b, HlAction a, int depth, const PomdpTables& tables, const ObsTable& obs) {
  const Vec4 pred = push_forward(b, a, tables);
  double future = 0.0;
  for (std::size_t o = 0; o < kNumObservations; ++o) {
    Vec4 post{};
    double p_o = 0.0;
    for (std::size_t s = 0; s < kNumContexts; ++s) {
      post[s] = obs[o][s] * pred[s];
      p_o += post[s];
    }
    if (!(p_o > 0.0)) continue;
    for (auto& v : post) v /= p_o;
    future += p_o * value(post, depth - 1, tables, obs, nullptr);
  }
  return rho(b, tables) + tables.discount * future;
}

double value(const Vec4& b, int depth, const PomdpTables& tables, const ObsTable& obs, PlanResult* root) {
  if (depth == 0) return rho(b, tables);
  double best = 0.0;
  HlAction best_action = HlAction::Track;
  bool first = true;
  for (auto a : kAllActions) {
    const double q = q_value(b, a, depth, tables, obs);
    if (root) root->q_values[index(a)] = q;
    if (first || q > best + kTieTolerance * std::max(1.0, std::abs(best))) {
      best = q;
      best_action = a;
      first = false;
    }
  }
  if (root) {
    root->action = best_action;
    root->value = best;
  }
  return best;
}

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(what + " must lie in [0, 1]");
}

}  // namespace

PomdpTables PomdpTables::defaults(double p_d) {
  PomdpTables t;
  using S = ContextState;
  auto& track = t.transition[index(HlAction::Track)];
  auto& move = t.transition[index(HlAction::ActiveMove)];
  auto& search = t.transition[index(HlAction::Search)];
  // Rows: from Visible, Occluded, Disappearance, Irrecoverable. No direct
  // Occluded <-> Disappearance transitions; Irrecoverable is absorbing.
  track[index(S::Visible)] = {0.85, 0.10, 0.05, 0.0};
  track[index(S::Occluded)] = {0.10, 0.88, 0.0, 0.02};
  track[index(S::Disappearance)] = {0.05, 0.0, 0.90, 0.05};
  move[index(S::Visible)] = {0.80, 0.15, 0.05, 0.0};
  move[index(S::Occluded)] = {0.70, 0.20, 0.0, 0.10};
  move[index(S::Disappearance)] = {0.10, 0.0, 0.85, 0.05};
  search[index(S::Visible)] = {0.70, 0.10, 0.20, 0.0};
  search[index(S::Occluded)] = {0.10, 0.88, 0.0, 0.02};
  search[index(S::Disappearance)] = {0.60, 0.0, 0.30, 0.10};
  for (auto a : kAllActions) t.transition[index(a)][index(S::Irrecoverable)] = {0.0, 0.0, 0.0, 1.0};

  t.likelihood[0] = {p_d, 0.05, 0.05, 0.05};
  t.likelihood[1] = {0.1, 0.8, 0.1, 0.1};
  t.likelihood[2] = {0.1, 0.7, 0.1, 0.1};
  t.likelihood[3] = {0.3, 0.3, 0.8, 0.3};
  for (auto s : kAllContexts) t.reward[index(s)] = ctxtrack::reward(s);
  t.discount = 0.95;
  t.horizon = 3;
  return t;
}

void PomdpTables::validate() const {
  for (auto a : kAllActions) {
    for (auto s : kAllContexts) {
      double sum = 0.0;
      for (double p : transition[index(a)][index(s)]) {
        check_probability(p, "transition entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("transition row (" + std::string(to_string(a)) + ", " +
                                    std::string(to_string(s)) + ") does not sum to 1");
    }
    if (transition[index(a)][index(ContextState::Irrecoverable)][index(ContextState::Irrecoverable)] != 1.0)
      throw std::invalid_argument("Irrecoverable must be absorbing under " + std::string(to_string(a)));
  }
  for (const auto& row : likelihood)
    for (double p : row) check_probability(p, "feature likelihood");
  for (double r : reward)
    if (!std::isfinite(r)) throw std::invalid_argument("rewards must be finite");
  if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in (0, 1)");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
}

double reward(ContextState s) { return s == ContextState::Visible ? 10.0 : 0.0; }

ContextBelief belief_predict(const ContextBelief& b, HlAction a, const PomdpTables& tables) {
  return ContextBelief::normalized(push_forward(b.probabilities(), a, tables));
}

double observation_likelihood(const FeatureVector& theta, ContextState s, const PomdpTables& tables) {
  const std::array<bool, kNumFeatures> bits{theta.target, theta.overlap, theta.depth, theta.human};
  double p = 1.0;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const double on = tables.likelihood[f][index(s)];
    p *= bits[f] ? on : 1.0 - on;
  }
  return p;
}

ContextBelief belief_update(const ContextBelief& b_pred, const FeatureVector& theta, const PomdpTables& tables) {
  Vec4 mass{};
  for (auto s : kAllContexts) mass[index(s)] = observation_likelihood(theta, s, tables) * b_pred[s];
  return ContextBelief::normalized(mass);
}

double expected_reward(const ContextBelief& b, const PomdpTables& tables) { return rho(b.probabilities(), tables); }

PlanResult plan(const ContextBelief& b, const PomdpTables& tables) {
  if (tables.horizon < 1) throw std::invalid_argument("plan: horizon must be at least 1");
  const ObsTable obs = observation_table(tables);
  PlanResult result;
  value(b.probabilities(), tables.horizon, tables, obs, &result);
  return result;
}

}  // namespace ctxtrack
