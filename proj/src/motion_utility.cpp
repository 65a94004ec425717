#include "ctxtrack/motion_utility.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace ctxtrack {

void UtilityParams::validate() const {
  if (!(beta >= 0.0) || !(gamma_perc >= 0.0)) throw std::invalid_argument("utility weights must be nonnegative");
  if (!weights.isApprox(weights.transpose(), 1e-12)) throw std::invalid_argument("Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat4> es(weights);
  if (es.eigenvalues().minCoeff() < -1e-12) throw std::invalid_argument("Q must be positive semidefinite");
  if (n_samples < 1) throw std::invalid_argument("n_samples must be at least 1");
  if (!(sample_radius >= 0.0) || !(inflation >= 0.0)) throw std::invalid_argument("radii must be nonnegative");
}

Vec4d config_delta(const RobotConfig& from, const RobotConfig& to) {
  return {to.position.x() - from.position.x(), to.position.y() - from.position.y(),
          wrap_angle(to.heading - from.heading), wrap_angle(to.pan - from.pan)};
}

double travel_cost(const RobotConfig& q_now, const RobotConfig& q_cand, const UtilityParams& params) {
  const Vec4d d = config_delta(q_now, q_cand);
  return params.beta * d.dot(params.weights * d);
}

bool collision_free(const WorldState& world, const Vec2& from, const Vec2& p, double inflation) {
  if (!world.bounds.contains(p)) return false;
  const Segment path{from, p};
  for (const auto& o : world.occluders) {
    if (point_segment_distance(p, o.segment) < inflation) return false;
    if (segment_segment_distance(path, o.segment) < inflation) return false;
  }
  return true;
}

std::vector<RobotConfig> sample_candidates(const RobotConfig& q_now, const WorldState& world,
                                           const UtilityParams& params, Rng& rng) {
  std::vector<RobotConfig> out{q_now};
  out.reserve(static_cast<std::size_t>(params.n_samples));
  for (int i = 1; i < params.n_samples; ++i) {
    const double r = params.sample_radius * std::sqrt(uniform01(rng));
    const double a = uniform(rng, -kPi, kPi);
    RobotConfig q;
    q.position = q_now.position + r * unit_from_angle(a);
    q.heading = wrap_angle(uniform(rng, -kPi, kPi));
    q.pan = uniform(rng, -world.pan_max, world.pan_max);
    if (r > 0.0 && !collision_free(world, q_now.position, q.position, params.inflation)) continue;
    out.push_back(q);
  }
  return out;
}

double utility(const Vec2& x_hat, const RobotConfig& q_now, const RobotConfig& q_cand, const ParticleSet& ps,
               const UtilityParams& params, const WorldState& world, const FovParams& f) {
  const double ig = information_gain(ps, q_cand, f, world);
  const double perception = params.gamma_perc * (x_hat - q_cand.position).squaredNorm();
  return ig - travel_cost(q_now, q_cand, params) - perception;
}

std::vector<ScoredCandidate> score_candidates(const std::vector<RobotConfig>& candidates, const Vec2& x_hat,
                                              const RobotConfig& q_now, const ParticleSet& ps,
                                              const UtilityParams& params, const WorldState& world,
                                              const FovParams& f) {
  std::vector<ScoredCandidate> out;
  out.reserve(candidates.size());
  for (const auto& q : candidates) {
    ScoredCandidate sc;
    sc.config = q;
    sc.info_gain = information_gain(ps, q, f, world);
    sc.travel = travel_cost(q_now, q, params);
    sc.perception = params.gamma_perc * (x_hat - q.position).squaredNorm();
    sc.utility = sc.info_gain - sc.travel - sc.perception;
    out.push_back(sc);
  }
  return out;
}

std::size_t select_best(const std::vector<ScoredCandidate>& scored) {
  if (scored.empty()) throw std::invalid_argument("select_best: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scored.size(); ++i) {
    const auto& c = scored[i];
    const auto& b = scored[best];
    if (c.utility > b.utility || (c.utility == b.utility && c.travel < b.travel)) best = i;
  }
  return best;
}

}  // namespace ctxtrack
