#pragma once
/**
 * @file   context_filter.hpp
 * @brief  Particle filter whose motion model is the belief-weighted mixture of
 *         per-context Gaussian predictions, plus entropy and information gain.
 *
 * Prediction redraws every particle from the mixture
 *   sum_i p(c_i) N(mu_i, Sigma_i)
 * where each component is anchored on a context cue (last target state,
 * occluder, nearby human). Irrecoverable has no component; mass on contexts
 * whose cue is unavailable is dropped and the rest renormalized.
 */

#include "ctxtrack/context.hpp"
#include "ctxtrack/random.hpp"
#include "ctxtrack/sensing.hpp"
#include "ctxtrack/world.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctxtrack {

struct Particle {
  Vec2 x = Vec2::Zero();
  double w = 0.0;
};

class ParticleSet {
 public:
  ParticleSet() = default;
  explicit ParticleSet(std::vector<Particle> particles) : particles_(std::move(particles)) {}

  /// N particles uniform over `bounds`, equal weights.
  static ParticleSet uniform(const Bounds& bounds, std::size_t n, Rng& rng);
  /// N copies of `p`, equal weights.
  static ParticleSet at(const Vec2& p, std::size_t n);

  std::size_t size() const { return particles_.size(); }
  bool empty() const { return particles_.empty(); }
  const Particle& operator[](std::size_t i) const { return particles_[i]; }
  Particle& operator[](std::size_t i) { return particles_[i]; }
  const std::vector<Particle>& particles() const { return particles_; }
  std::vector<Particle>& particles() { return particles_; }
  auto begin() const { return particles_.begin(); }
  auto end() const { return particles_.end(); }

  double total_weight() const;
  /// Rescales weights to sum to one; throws FilterDivergence if the total is not positive.
  void normalize();
  Vec2 weighted_mean() const;
  Mat2 weighted_covariance() const;
  /// 1 / sum w^2.
  double effective_sample_size() const;

 private:
  std::vector<Particle> particles_;
};

/// Total weight underflow: every hypothesis is inconsistent with the measurement.
class FilterDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required context cue (occluder, human, ...) is absent.
class MissingCue : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No context with positive belief has an available prediction component.
class NoPredictionComponent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContextModelParams {
  double sigma_visible = 0.1;
  double sigma_occluded = 0.5;
  double sigma_human = 0.5;
  double occluded_offset = 0.5;  ///< distance behind the occluder along the sight line
  double dt = 0.1;

  void validate() const;
};

struct OccluderCue {
  Vec2 point = Vec2::Zero();    ///< occluder position on the sensor->target sight line
  Vec2 bearing = Vec2::UnitX(); ///< unit vector from the sensor towards `point`
};

struct ContextCues {
  std::optional<Vec2> last_target;
  Vec2 velocity = Vec2::Zero();
  std::optional<OccluderCue> occluder;
  std::optional<Vec2> human;
};

struct GaussianComponent {
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Identity();
};

using ComponentTable = std::array<std::optional<GaussianComponent>, kNumContexts>;

/// Prediction component for one context; nullopt for Irrecoverable.
/// Throws MissingCue naming the absent cue.
std::optional<GaussianComponent> context_component(ContextState c, const ContextCues& cues,
                                                   const ContextModelParams& params);

/// All components whose cues are present.
ComponentTable build_components(const ContextCues& cues, const ContextModelParams& params);

/// Mixture weights p(c_i) restricted to available components and renormalized.
/// Throws NoPredictionComponent if nothing remains.
std::array<double, kNumContexts> mixture_weights(const ContextBelief& belief, const ComponentTable& components);

/// Redraws each particle from the belief-weighted mixture; weights are carried over.
ParticleSet predict(const ParticleSet& ps, const ContextBelief& belief, const ComponentTable& components, Rng& rng);

/// Sensor-model factor for a single hypothesis.
double measurement_likelihood(const Detection& z, const Vec2& x, bool in_view, const SensorParams& params,
                              double clutter_density);

/// Importance update with the four-branch sensor model, then renormalization.
/// Clutter density is uniform over the sector area. Throws FilterDivergence on underflow.
ParticleSet update(const ParticleSet& ps, const Detection& z, const WorldState& world, const RobotConfig& q,
                   const FovParams& f, const SensorParams& params);

struct ResampleOptions {
  double threshold = 0.5;    ///< resample when N_eff < threshold * N
  int max_attempts = 200;    ///< rejection-sampling budget per regenerated particle
  /// Regenerate particles lost from inside the effective FOV (set after an empty measurement).
  bool regenerate = true;
};

struct ResampleResult {
  ParticleSet particles;
  bool resampled = false;
  std::size_t regenerated = 0;
  /// Regenerated particles placed uniformly because rejection sampling ran out of attempts.
  std::size_t fallback_placements = 0;
};

/// Systematic resampling indices for normalized weights with offset u0 in [0, 1/N).
std::vector<std::size_t> systematic_indices(const std::vector<double>& weights, double u0);

/// Systematic resampling when degenerate. When `regenerate` is set, the slots lost
/// from inside the effective FOV are refilled outside it, drawn from the mixture
/// restricted to the exterior (rejection sampling, uniform fallback).
ResampleResult resample(const ParticleSet& ps, const WorldState& world, const RobotConfig& q, const FovParams& f,
                        const ContextBelief& belief, const ComponentTable& components,
                        const ResampleOptions& options, Rng& rng);

/// -sum w log w, with 0 log 0 = 0.
double entropy(const ParticleSet& ps);

/// Entropy mass of the particles inside the candidate's effective FOV (nonnegative).
double information_gain(const ParticleSet& ps, const RobotConfig& q_cand, const FovParams& f,
                        const WorldState& world);

/// Evenly strided subset of at most `max_points` particles (weights kept as-is).
std::vector<Particle> decimate(const ParticleSet& ps, std::size_t max_points);

}  // namespace ctxtrack
