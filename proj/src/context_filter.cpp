#include "ctxtrack/context_filter.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctxtrack {

ParticleSet ParticleSet::uniform(const Bounds& bounds, std::size_t n, Rng& rng) {
  std::vector<Particle> ps(n);
  const double w = n ? 1.0 / static_cast<double>(n) : 0.0;
  for (auto& p : ps) {
    p.x = Vec2(ctxtrack::uniform(rng, bounds.min.x(), bounds.max.x()), ctxtrack::uniform(rng, bounds.min.y(), bounds.max.y()));
    p.w = w;
  }
  return ParticleSet(std::move(ps));
}

ParticleSet ParticleSet::at(const Vec2& x, std::size_t n) {
  return ParticleSet(std::vector<Particle>(n, Particle{x, n ? 1.0 / static_cast<double>(n) : 0.0}));
}

double ParticleSet::total_weight() const {
  double s = 0.0;
  for (const auto& p : particles_) s += p.w;
  return s;
}

void ParticleSet::normalize() {
  const double s = total_weight();
  if (!(s > 0.0) || !std::isfinite(s)) throw FilterDivergence("particle weights underflowed");
  for (auto& p : particles_) p.w /= s;
}

Vec2 ParticleSet::weighted_mean() const {
  Vec2 m = Vec2::Zero();
  for (const auto& p : particles_) m += p.w * p.x;
  return m;
}

Mat2 ParticleSet::weighted_covariance() const {
  const Vec2 m = weighted_mean();
  Mat2 c = Mat2::Zero();
  for (const auto& p : particles_) {
    const Vec2 d = p.x - m;
    c += p.w * d * d.transpose();
  }
  return c;
}

double ParticleSet::effective_sample_size() const {
  double s = 0.0;
  for (const auto& p : particles_) s += p.w * p.w;
  return s > 0.0 ? 1.0 / s : 0.0;
}

void ContextModelParams::validate() const {
  if (!(sigma_visible > 0.0 && sigma_occluded > 0.0 && sigma_human > 0.0 && occluded_offset > 0.0 && dt > 0.0))
    throw std::invalid_argument("context model parameters must be positive");
}

std::optional<GaussianComponent> context_component(ContextState c, const ContextCues& cues,
                                                   const ContextModelParams& params) {
  switch (c) {
    case ContextState::Visible: {
      if (!cues.last_target) throw MissingCue("Visible context needs the last target state");
      const double s2 = params.sigma_visible * params.sigma_visible;
      return GaussianComponent{*cues.last_target + cues.velocity * params.dt, Mat2::Identity() * s2};
    }
    case ContextState::Occluded: {
      if (!cues.occluder) throw MissingCue("Occluded context needs an occluder position");
      const double s2 = params.sigma_occluded * params.sigma_occluded;
      const Vec2 dir = cues.occluder->bearing.normalized();
      return GaussianComponent{cues.occluder->point + params.occluded_offset * dir, Mat2::Identity() * s2};
    }
    case ContextState::Disappearance: {
      if (!cues.human) throw MissingCue("Disappearance context needs a human position");
      const double s2 = params.sigma_human * params.sigma_human;
      return GaussianComponent{*cues.human, Mat2::Identity() * s2};
    }
    case ContextState::Irrecoverable:
      return std::nullopt;
  }
  return std::nullopt;
}

ComponentTable build_components(const ContextCues& cues, const ContextModelParams& params) {
  ComponentTable table;
  for (auto c : kAllContexts) {
    try {
      table[index(c)] = context_component(c, cues, params);
    } catch (const MissingCue&) {
      table[index(c)].reset();
    }
  }
  return table;
}

std::array<double, kNumContexts> mixture_weights(const ContextBelief& belief, const ComponentTable& components) {
  std::array<double, kNumContexts> w{};
  double total = 0.0;
  for (std::size_t i = 0; i < kNumContexts; ++i) {
    if (components[i]) {
      w[i] = belief[i];
      total += w[i];
    }
  }
  if (!(total > 0.0)) throw NoPredictionComponent("no context with positive belief has a prediction component");
  for (auto& v : w) v /= total;
  return w;
}

namespace {

struct Sampler {
  std::array<double, kNumContexts> cdf{};
  std::array<Mat2, kNumContexts> roots{};
  std::array<Vec2, kNumContexts> means{};

  Sampler(const ContextBelief& belief, const ComponentTable& components) {
    const auto w = mixture_weights(belief, components);
    double acc = 0.0;
    for (std::size_t i = 0; i < kNumContexts; ++i) {
      acc += w[i];
      cdf[i] = acc;
      if (components[i]) {
        roots[i] = psd_sqrt(components[i]->cov);
        means[i] = components[i]->mean;
      }
    }
  }

  Vec2 draw(Rng& rng) const {
    const double u = uniform01(rng) * cdf.back();
    std::size_t k = 0;
    while (k + 1 < kNumContexts && u >= cdf[k]) ++k;
    return sample_gaussian(rng, means[k], roots[k]);
  }
};

}  // namespace

ParticleSet predict(const ParticleSet& ps, const ContextBelief& belief, const ComponentTable& components, Rng& rng) {
  const Sampler sampler(belief, components);
  ParticleSet out = ps;
  for (auto& p : out.particles()) p.x = sampler.draw(rng);
  return out;
}

namespace {

struct GaussianDensity {
  Mat2 inv;
  double norm;
  explicit GaussianDensity(const Mat2& cov)
      : inv(cov.inverse()), norm(1.0 / (2.0 * kPi * std::sqrt(cov.determinant()))) {}
  double operator()(const Vec2& d) const { return norm * std::exp(-0.5 * d.dot(inv * d)); }
};

double branch_factor(const Detection& z, const Vec2& x, bool in_view, const SensorParams& params,
                     double clutter_density, const GaussianDensity& density) {
  if (z.empty()) return in_view ? 1.0 - params.p_d : 1.0 - params.p_e;
  if (!in_view) return params.p_e * clutter_density;
  return params.p_d * density(*z.value - x);
}

}  // namespace

double measurement_likelihood(const Detection& z, const Vec2& x, bool in_view, const SensorParams& params,
                              double clutter_density) {
  return branch_factor(z, x, in_view, params, clutter_density, GaussianDensity(params.cov));
}

ParticleSet update(const ParticleSet& ps, const Detection& z, const WorldState& world, const RobotConfig& q,
                   const FovParams& f, const SensorParams& params) {
  const double clutter_density = 1.0 / f.area();
  const GaussianDensity density(params.cov);
  ParticleSet out = ps;
  for (auto& p : out.particles()) {
    const bool in_view = effective_fov_contains(world, q, f, p.x);
    p.w *= branch_factor(z, p.x, in_view, params, clutter_density, density);
  }
  out.normalize();
  return out;
}

std::vector<std::size_t> systematic_indices(const std::vector<double>& weights, double u0) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> idx(n);
  double cumulative = weights.empty() ? 0.0 : weights[0];
  std::size_t j = 0;
  const double step = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u0 + static_cast<double>(i) * step;
    while (u >= cumulative && j + 1 < n) cumulative += weights[++j];
    idx[i] = j;
  }
  return idx;
}

namespace {

Vec2 uniform_outside(const WorldState& world, const RobotConfig& q, const FovParams& f, Rng& rng) {
  Vec2 p = world.bounds.min;
  for (int i = 0; i < 1000; ++i) {
    p = {uniform(rng, world.bounds.min.x(), world.bounds.max.x()),
         uniform(rng, world.bounds.min.y(), world.bounds.max.y())};
    if (!effective_fov_contains(world, q, f, p)) break;
  }
  return p;
}

}  // namespace

ResampleResult resample(const ParticleSet& ps, const WorldState& world, const RobotConfig& q, const FovParams& f,
                        const ContextBelief& belief, const ComponentTable& components,
                        const ResampleOptions& options, Rng& rng) {
  ResampleResult result{ps, false, 0, 0};
  const std::size_t n = ps.size();
  if (n == 0 || ps.effective_sample_size() >= options.threshold * static_cast<double>(n)) return result;

  std::vector<double> weights(n);
  std::vector<bool> inside(n);
  std::size_t inside_before = 0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = ps[i].w;
    inside[i] = effective_fov_contains(world, q, f, ps[i].x);
    inside_before += inside[i];
  }

  const double step = 1.0 / static_cast<double>(n);
  const auto idx = systematic_indices(weights, uniform(rng, 0.0, step));

  std::vector<Particle> out(n);
  std::vector<bool> duplicate(n, false);
  std::vector<bool> used(n, false);
  std::size_t inside_after = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = Particle{ps[idx[i]].x, step};
    inside_after += inside[idx[i]];
    duplicate[i] = used[idx[i]];
    used[idx[i]] = true;
  }
  result.resampled = true;

  if (options.regenerate && inside_before > inside_after) {
    std::size_t lost = inside_before - inside_after;
    std::optional<Sampler> sampler;
    try {
      sampler.emplace(belief, components);
    } catch (const NoPredictionComponent&) {
    }
    for (std::size_t i = 0; i < n && lost > 0; ++i) {
      if (!duplicate[i] || inside[idx[i]]) continue;
      bool placed = false;
      if (sampler) {
        for (int a = 0; a < options.max_attempts; ++a) {
          const Vec2 x = sampler->draw(rng);
          if (world.bounds.contains(x) && !effective_fov_contains(world, q, f, x)) {
            out[i].x = x;
            placed = true;
            break;
          }
        }
      }
      if (!placed) {
        out[i].x = uniform_outside(world, q, f, rng);
        ++result.fallback_placements;
      }
      ++result.regenerated;
      --lost;
    }
  }
  result.particles = ParticleSet(std::move(out));
  return result;
}

double entropy(const ParticleSet& ps) {
  double h = 0.0;
  for (const auto& p : ps)
    if (p.w > 0.0) h -= p.w * std::log(p.w);
  return h;
}

double information_gain(const ParticleSet& ps, const RobotConfig& q_cand, const FovParams& f,
                        const WorldState& world) {
  double ig = 0.0;
  for (const auto& p : ps)
    if (p.w > 0.0 && effective_fov_contains(world, q_cand, f, p.x)) ig -= p.w * std::log(p.w);
  return ig;
}

std::vector<Particle> decimate(const ParticleSet& ps, std::size_t max_points) {
  if (ps.size() <= max_points) return ps.particles();
  std::vector<Particle> out;
  out.reserve(max_points);
  const double stride = static_cast<double>(ps.size()) / static_cast<double>(max_points);
  for (std::size_t i = 0; i < max_points; ++i) out.push_back(ps[static_cast<std::size_t>(i * stride)]);
  return out;
}

}  // namespace ctxtrack
