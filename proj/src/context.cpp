#include "ctxtrack/context.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ctxtrack {

std::string_view to_string(ContextState s) {
  switch (s) {
    case ContextState::Visible: return "Visible";
    case ContextState::Occluded: return "Occluded";
    case ContextState::Disappearance: return "Disappearance";
    case ContextState::Irrecoverable: return "Irrecoverable";
  }
  return "?";
}

std::string_view to_string(HlAction a) {
  switch (a) {
    case HlAction::Track: return "Track";
    case HlAction::ActiveMove: return "ActiveMove";
    case HlAction::Search: return "Search";
  }
  return "?";
}

ContextState context_from_string(std::string_view s) {
  for (auto c : kAllContexts)
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown context state: " + std::string(s));
}

HlAction action_from_string(std::string_view s) {
  for (auto a : kAllActions)
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown action: " + std::string(s));
}

ContextBelief::ContextBelief(const std::array<double, kNumContexts>& p) : p_(p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("belief entries must be finite and nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("belief must sum to 1");
}

ContextBelief ContextBelief::uniform() { return ContextBelief({0.25, 0.25, 0.25, 0.25}); }

ContextBelief ContextBelief::uniform_recoverable() {
  return ContextBelief({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0});
}

ContextBelief ContextBelief::point(ContextState s) {
  std::array<double, kNumContexts> p{};
  p[index(s)] = 1.0;
  return ContextBelief(p);
}

ContextBelief ContextBelief::normalized(const std::array<double, kNumContexts>& mass) {
  double sum = 0.0;
  for (double v : mass) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("belief mass must be finite and nonnegative");
    sum += v;
  }
  if (!(sum > 0.0)) throw std::domain_error("belief mass sums to zero");
  ContextBelief b;
  for (std::size_t i = 0; i < kNumContexts; ++i) b.p_[i] = mass[i] / sum;
  return b;
}

ContextState ContextBelief::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumContexts; ++i)
    if (p_[i] > p_[best]) best = i;
  return static_cast<ContextState>(best);
}

}  // namespace ctxtrack
