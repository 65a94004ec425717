#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctxtrack/context_filter.hpp"

#include <cmath>
#include <numeric>

using namespace ctxtrack;

namespace {

WorldState open_world() {
  WorldState w;
  w.bounds = Bounds{Vec2(-10, -10), Vec2(10, 10)};
  return w;
}

ParticleSet weighted(const std::vector<std::pair<Vec2, double>>& xs) {
  std::vector<Particle> ps;
  for (const auto& [x, w] : xs) ps.push_back({x, w});
  return ParticleSet(ps);
}

// Smallest j with cumulative weight above u, by linear scan.
std::vector<std::size_t> reference_systematic(const std::vector<double>& w, double u0) {
  const std::size_t n = w.size();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u0 + double(i) / double(n);
    double c = 0.0;
    std::size_t j = 0;
    for (; j < n; ++j) {
      c += w[j];
      if (u < c) break;
    }
    out.push_back(std::min(j, n - 1));
  }
  return out;
}

}  // namespace

TEST_CASE("context components are anchored on their cues") {
  ContextModelParams p;
  ContextCues cues;
  cues.last_target = Vec2(1, 1);
  cues.occluder = OccluderCue{Vec2(3, 0), Vec2(1, 0)};
  cues.human = Vec2(5, 2);

  auto vis = context_component(ContextState::Visible, cues, p);
  REQUIRE(vis);
  CHECK(vis->mean.isApprox(Vec2(1, 1)));
  CHECK(vis->cov(0, 0) == doctest::Approx(0.01));

  auto occ = context_component(ContextState::Occluded, cues, p);
  REQUIRE(occ);
  CHECK(occ->mean.isApprox(Vec2(3.5, 0)));

  auto dis = context_component(ContextState::Disappearance, cues, p);
  REQUIRE(dis);
  CHECK(dis->mean.isApprox(Vec2(5, 2)));

  CHECK_FALSE(context_component(ContextState::Irrecoverable, cues, p));

  cues.velocity = Vec2(2, 0);
  CHECK(context_component(ContextState::Visible, cues, p)->mean.isApprox(Vec2(1.2, 1)));

  ContextCues none;
  CHECK_THROWS_AS(context_component(ContextState::Occluded, none, p), MissingCue);
  CHECK_THROWS_AS(context_component(ContextState::Disappearance, none, p), MissingCue);
}

TEST_CASE("mixture weights drop unavailable components") {
  ContextCues cues;
  cues.last_target = Vec2::Zero();
  const auto table = build_components(cues, ContextModelParams{});
  const auto w = mixture_weights(ContextBelief({0.4, 0.4, 0.1, 0.1}), table);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == 0.0);
  CHECK_THROWS_AS(mixture_weights(ContextBelief::point(ContextState::Occluded), table), NoPredictionComponent);
}

TEST_CASE("predict sample statistics") {
  ContextModelParams p;
  Rng rng = make_stream(21, 0);
  const std::size_t n = 10000;
  const ParticleSet ps = ParticleSet::at(Vec2::Zero(), n);

  SUBCASE("Visible only") {
    ContextCues cues;
    cues.last_target = Vec2(1, -1);
    const auto out = predict(ps, ContextBelief::point(ContextState::Visible), build_components(cues, p), rng);
    const Vec2 m = out.weighted_mean();
    const double tol = 3.0 * p.sigma_visible / std::sqrt(double(n));
    CHECK(std::abs(m.x() - 1.0) < tol);
    CHECK(std::abs(m.y() + 1.0) < tol);
    for (const auto& q : out) CHECK(q.w == doctest::Approx(1.0 / n));
  }

  SUBCASE("two-component mixture mean") {
    ContextCues cues;
    cues.last_target = Vec2(0, 0);
    cues.human = Vec2(4, 0);
    const auto out = predict(ps, ContextBelief({0.5, 0, 0.5, 0}), build_components(cues, p), rng);
    const Vec2 m = out.weighted_mean();
    // var of the x mixture = 0.5(0.01 + 0.25) + 0.25 * 16
    const double sd = std::sqrt(0.5 * (0.01 + 0.25) + 4.0);
    CHECK(std::abs(m.x() - 2.0) < 3.0 * sd / std::sqrt(double(n)));
    CHECK(std::abs(m.y()) < 3.0 * std::sqrt(0.13) / std::sqrt(double(n)));
  }

  SUBCASE("Irrecoverable alone cannot predict") {
    ContextCues cues;
    cues.last_target = Vec2(0, 0);
    CHECK_THROWS_AS(predict(ps, ContextBelief::point(ContextState::Irrecoverable), build_components(cues, p), rng),
                    NoPredictionComponent);
  }

  SUBCASE("weights are carried through") {
    ContextCues cues;
    cues.last_target = Vec2(0, 0);
    ParticleSet skewed = weighted({{Vec2(0, 0), 0.7}, {Vec2(1, 1), 0.3}});
    const auto out = predict(skewed, ContextBelief::point(ContextState::Visible), build_components(cues, p), rng);
    CHECK(out[0].w == 0.7);
    CHECK(out[1].w == 0.3);
  }
}

TEST_CASE("update applies the four-branch factors") {
  const WorldState w = open_world();
  const FovParams f;
  SensorParams s;

  SUBCASE("empty measurement, one particle inside") {
    const auto out = update(weighted({{Vec2(2, 0), 0.5}, {Vec2(-2, 0), 0.5}}), Detection::none(), w, w.robot, f, s);
    CHECK(out[0].w == doctest::Approx(0.05 / 0.525));
    CHECK(out[1].w == doctest::Approx(0.475 / 0.525));
    CHECK(out[0].w == doctest::Approx(0.0952).epsilon(1e-3));
  }

  SUBCASE("all particles outside leave weights unchanged") {
    const auto out = update(weighted({{Vec2(-2, 0), 0.2}, {Vec2(-3, 1), 0.8}}), Detection::none(), w, w.robot, f, s);
    CHECK(out[0].w == doctest::Approx(0.2));
    CHECK(out[1].w == doctest::Approx(0.8));
  }

  SUBCASE("a detection on top of one particle takes the mass") {
    s.cov = Mat2::Identity() * 1e-4;
    const auto out =
        update(weighted({{Vec2(2, 0), 0.5}, {Vec2(2, 1), 0.5}}), Detection::at(Vec2(2, 0)), w, w.robot, f, s);
    CHECK(out[0].w > 1.0 - 1e-9);
  }

  SUBCASE("a detection outside every particle's view weighs by clutter") {
    const double lik = measurement_likelihood(Detection::at(Vec2(2, 0)), Vec2(-2, 0), false, s, 1.0 / f.area());
    CHECK(lik == doctest::Approx(s.p_e / f.area()));
  }

  SUBCASE("total underflow reports divergence") {
    s.cov = Mat2::Identity() * 1e-6;
    s.p_e = 0.0;
    CHECK_THROWS_AS(update(weighted({{Vec2(2, 0), 1.0}}), Detection::at(Vec2(3.5, 0.5)), w, w.robot, f, s),
                    FilterDivergence);
  }
}

TEST_CASE("systematic indices match a linear-scan resampler") {
  Rng rng = make_stream(8, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 37;
    std::vector<double> w(n);
    for (auto& v : w) v = uniform01(rng) < 0.3 ? 0.0 : uniform01(rng);
    w[0] += 1e-3;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= total;
    const double u0 = uniform(rng, 0.0, 1.0 / double(n));
    REQUIRE(systematic_indices(w, u0) == reference_systematic(w, u0));
  }
}

TEST_CASE("resample") {
  WorldState w = open_world();
  const FovParams f;
  ContextCues cues;
  cues.last_target = Vec2(-5, 0);
  const auto table = build_components(cues, ContextModelParams{});
  const auto belief = ContextBelief::point(ContextState::Visible);
  Rng rng = make_stream(9, 0);

  SUBCASE("healthy weights are left alone") {
    const auto ps = ParticleSet::at(Vec2(1, 0), 10);
    const auto r = resample(ps, w, w.robot, f, belief, table, ResampleOptions{}, rng);
    CHECK_FALSE(r.resampled);
    CHECK(r.particles.particles().size() == 10);
  }

  SUBCASE("degenerate weights collapse onto the heavy particle") {
    std::vector<Particle> v(8, Particle{Vec2(-3, 0), 0.0});
    v[0] = {Vec2(-4, 0), 1.0};
    ResampleOptions opt;
    const auto r = resample(ParticleSet(v), w, w.robot, f, belief, table, opt, rng);
    CHECK(r.resampled);
    CHECK(r.regenerated == 0);
    for (const auto& p : r.particles) {
      CHECK(p.x.isApprox(Vec2(-4, 0)));
      CHECK(p.w == doctest::Approx(1.0 / 8));
    }
  }

  SUBCASE("slots lost from inside the view are regenerated outside it") {
    std::vector<Particle> v(8, Particle{Vec2(2, 0), 0.0});
    v[0] = {Vec2(-4, 0), 1.0};
    const auto r = resample(ParticleSet(v), w, w.robot, f, belief, table, ResampleOptions{}, rng);
    CHECK(r.resampled);
    CHECK(r.regenerated == 7);
    for (const auto& p : r.particles) {
      CHECK_FALSE(effective_fov_contains(w, w.robot, f, p.x));
      CHECK(w.bounds.contains(p.x));
      CHECK(p.w == doctest::Approx(1.0 / 8));
    }
  }
}

TEST_CASE("entropy values") {
  CHECK(entropy(ParticleSet::at(Vec2::Zero(), 4)) == doctest::Approx(std::log(4.0)));
  CHECK(entropy(weighted({{Vec2::Zero(), 1}, {Vec2::Zero(), 0}, {Vec2::Zero(), 0}, {Vec2::Zero(), 0}})) == 0.0);
  CHECK(entropy(weighted({{Vec2::Zero(), .5}, {Vec2::Zero(), .5}, {Vec2::Zero(), 0}, {Vec2::Zero(), 0}})) ==
        doctest::Approx(std::log(2.0)));
}

TEST_CASE("information gain counts entropy mass inside the candidate view") {
  const WorldState w = open_world();
  const FovParams f;
  const RobotConfig q;
  CHECK(information_gain(ParticleSet::at(Vec2(-3, 0), 5), q, f, w) == 0.0);
  CHECK(information_gain(ParticleSet::at(Vec2(2, 0), 10), q, f, w) == doctest::Approx(std::log(10.0)));
  const auto half = weighted({{Vec2(2, 0), .25}, {Vec2(3, 0), .25}, {Vec2(-2, 0), .25}, {Vec2(-3, 0), .25}});
  CHECK(information_gain(half, q, f, w) == doctest::Approx(0.5 * std::log(4.0)));

  WorldState blocked = w;
  blocked.occluders.push_back({1, {Vec2(1, -1), Vec2(1, 1)}});
  CHECK(information_gain(half, q, f, blocked) == 0.0);
}

TEST_CASE("decimate strides evenly") {
  std::vector<Particle> v;
  for (int i = 0; i < 10; ++i) v.push_back({Vec2(i, 0), 0.1});
  const auto d = decimate(ParticleSet(v), 5);
  REQUIRE(d.size() == 5);
  CHECK(d[1].x.x() == 2.0);
  CHECK(decimate(ParticleSet(v), 20).size() == 10);
}
