#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace ctxtrack {

enum class ContextState : int { Visible = 0, Occluded = 1, Disappearance = 2, Irrecoverable = 3 };
inline constexpr std::size_t kNumContexts = 4;

/// Declaration order is the planner's tie-break order.
enum class HlAction : int { Track = 0, ActiveMove = 1, Search = 2 };
inline constexpr std::size_t kNumActions = 3;

inline constexpr std::array<ContextState, kNumContexts> kAllContexts{
    ContextState::Visible, ContextState::Occluded, ContextState::Disappearance, ContextState::Irrecoverable};
inline constexpr std::array<HlAction, kNumActions> kAllActions{HlAction::Track, HlAction::ActiveMove,
                                                                HlAction::Search};

std::string_view to_string(ContextState s);
std::string_view to_string(HlAction a);
ContextState context_from_string(std::string_view s);
HlAction action_from_string(std::string_view s);

inline constexpr std::size_t index(ContextState s) { return static_cast<std::size_t>(s); }
inline constexpr std::size_t index(HlAction a) { return static_cast<std::size_t>(a); }

/// Probability simplex over the four context states.
class ContextBelief {
 public:
  ContextBelief() = default;
  /// Throws std::invalid_argument unless `p` is nonnegative and sums to 1 within 1e-9.
  explicit ContextBelief(const std::array<double, kNumContexts>& p);

  static ContextBelief uniform();
  /// Uniform over Visible, Occluded and Disappearance.
  static ContextBelief uniform_recoverable();
  static ContextBelief point(ContextState s);
  /// Normalizes nonnegative masses; throws std::domain_error on zero total.
  static ContextBelief normalized(const std::array<double, kNumContexts>& mass);

  double operator[](ContextState s) const { return p_[index(s)]; }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::array<double, kNumContexts>& probabilities() const { return p_; }
  ContextState argmax() const;

 private:
  std::array<double, kNumContexts> p_{0.25, 0.25, 0.25, 0.25};
};

}  // namespace ctxtrack
