#pragma once
/**
 * @file   motion_utility.hpp
 * @brief  Sampling-based greedy selection of the next sensor configuration.
 *
 *   J = IG(q_cand) - beta * dq^T Q dq - gamma * |x_hat - pos(q_cand)|^2
 *
 * dq is (dx, dy, dheading, dpan) with wrapped angle differences.
 */

#include "ctxtrack/context_filter.hpp"
#include "ctxtrack/random.hpp"
#include "ctxtrack/world.hpp"

#include <Eigen/Core>

#include <vector>

namespace ctxtrack {

using Mat4 = Eigen::Matrix4d;
using Vec4d = Eigen::Vector4d;

struct UtilityParams {
  double beta = 0.1;
  double gamma_perc = 0.05;
  Mat4 weights = Vec4d(1.0, 1.0, 0.2, 0.1).asDiagonal();
  int n_samples = 64;
  double sample_radius = 2.5;
  double inflation = 0.3;  ///< clearance kept from occluder segments

  /// Throws std::invalid_argument on negative weights, asymmetric or indefinite Q, n_samples < 1.
  void validate() const;
};

/// Configuration difference with wrapped angles.
Vec4d config_delta(const RobotConfig& from, const RobotConfig& to);

double travel_cost(const RobotConfig& q_now, const RobotConfig& q_cand, const UtilityParams& params);

/// True if `p` keeps clearance from every occluder and the straight path from `from` does too.
bool collision_free(const WorldState& world, const Vec2& from, const Vec2& p, double inflation);

/// q_now followed by up to n_samples - 1 collision-free draws from the disc around it.
std::vector<RobotConfig> sample_candidates(const RobotConfig& q_now, const WorldState& world,
                                           const UtilityParams& params, Rng& rng);

double utility(const Vec2& x_hat, const RobotConfig& q_now, const RobotConfig& q_cand, const ParticleSet& ps,
               const UtilityParams& params, const WorldState& world, const FovParams& f);

struct ScoredCandidate {
  RobotConfig config;
  double utility = 0.0;
  double info_gain = 0.0;
  double travel = 0.0;
  double perception = 0.0;
};

std::vector<ScoredCandidate> score_candidates(const std::vector<RobotConfig>& candidates, const Vec2& x_hat,
                                              const RobotConfig& q_now, const ParticleSet& ps,
                                              const UtilityParams& params, const WorldState& world,
                                              const FovParams& f);

/// Index of the argmax-J candidate; ties go to the smaller travel cost, then list order.
/// Throws std::invalid_argument on an empty list.
std::size_t select_best(const std::vector<ScoredCandidate>& scored);

}  // namespace ctxtrack
