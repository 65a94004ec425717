// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "ctxtrack/context_filter.hpp"
#include "ctxtrack/harness.hpp"
#include "ctxtrack/pomdp.hpp"
#include "ctxtrack/scenario.hpp"
#include "ctxtrack/trace.hpp"

#include "oracles/grid_bayes.hpp"
#include "oracles/tree_enumerator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace ctxtrack;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ScenarioScript scenario(const std::string& name) { return load_scenario("scenarios/" + name + ".json"); }

// ---------------------------------------------------------------------------
// A1: particle filter against a 1D grid Bayes filter.
//
// The scene is a line: robot at the origin facing +x, a wall at x = 2 that
// shadows the rest of the sector. Components are nearly degenerate in y so
// every particle stays on the x axis, and the grid uses the matching slice of
// the 2D sensor density. The reference runs on 8 sub-cells per cell and is
// summed back to the 401 compared cells, so its cell masses are not biased by
// midpoint evaluation of peaks one or two cells wide.

struct A1Step {
  std::vector<std::pair<ContextState, std::pair<double, double>>> components;  // context -> (mean x, sigma)
  std::vector<double> weights;                                                 // belief per listed component
  std::optional<double> z;
};

void a1_filter_vs_grid() {
  const auto t0 = Clock::now();
  WorldState world;
  world.bounds = {Vec2(-11, -11), Vec2(11, 11)};
  world.occluders.push_back({1, {Vec2(2, -0.5), Vec2(2, 0.5)}});
  const RobotConfig q;
  const FovParams fov;
  SensorParams sp;
  sp.cov = Mat2::Identity() * 0.1 * 0.1;
  const double s = 0.1;

  const std::vector<A1Step> script{
      {{{ContextState::Visible, {1.0, 0.15}}, {ContextState::Occluded, {2.6, 0.3}}}, {0.6, 0.4}, 1.05},
      {{}, {}, std::nullopt},
      {{{ContextState::Visible, {1.2, 0.2}}, {ContextState::Occluded, {2.6, 0.25}}, {ContextState::Disappearance, {-1.5, 0.25}}},
       {0.3, 0.3, 0.4},
       std::nullopt},
      {{}, {}, std::nullopt},
      {{}, {}, 2.8},
      {{{ContextState::Visible, {0.5, 0.1}}, {ContextState::Disappearance, {-2.0, 0.4}}}, {0.5, 0.5}, 0.52},
      {{}, {}, 0.5},
      {{{ContextState::Occluded, {3.0, 0.25}}, {ContextState::Disappearance, {-1.0, 0.3}}}, {0.7, 0.3}, std::nullopt},
      {{}, {}, std::nullopt},
      {{}, {}, std::nullopt},
  };

  const std::size_t cells = 401, sub = 8;
  const double lo = -10.0, width = 0.05, hi = lo + width * cells;
  oracle::GridBayes1D grid(lo, width / sub, cells * sub);
  const oracle::GridBayes1D bins(lo, width, cells);
  Rng rng = make_stream(11, 0);
  const std::size_t n = 10000;
  std::vector<Particle> init(n);
  for (auto& p : init) p = {Vec2(uniform(rng, lo, hi), 0.0), 1.0 / n};
  ParticleSet ps(std::move(init));

  auto in_view = [&](double x) { return x >= 0.0 && x < 2.0; };
  const double clutter = sp.p_e / fov.area();
  double worst = 0.0;

  for (const auto& st : script) {
    if (!st.components.empty()) {
      ComponentTable table{};
      std::array<double, kNumContexts> mass{};
      for (std::size_t i = 0; i < st.components.size(); ++i) {
        const auto& [c, ms] = st.components[i];
        Mat2 cov = Mat2::Zero();
        cov(0, 0) = ms.second * ms.second;
        cov(1, 1) = 1e-12;
        table[index(c)] = GaussianComponent{Vec2(ms.first, 0.0), cov};
        mass[index(c)] = st.weights[i];
      }
      ps = predict(ps, ContextBelief::normalized(mass), table, rng);
      grid.predict([&](double to, double) {
        double k = 0.0;
        for (std::size_t i = 0; i < st.components.size(); ++i)
          k += st.weights[i] * oracle::normal_pdf(to, st.components[i].second.first, st.components[i].second.second);
        return k;
      });
    }
    const Detection z = st.z ? Detection::at(Vec2(*st.z, 0.0)) : Detection::none();
    ps = update(ps, z, world, q, fov, sp);
    grid.update([&](double x) {
      if (!st.z) return in_view(x) ? 1.0 - sp.p_d : 1.0 - sp.p_e;
      if (!in_view(x)) return clutter;
      // 2D Gaussian density on the y = 0 slice
      return sp.p_d * oracle::normal_pdf(*st.z, x, s) / (std::sqrt(2.0 * kPi) * s);
    });
    ResampleOptions ro;
    ro.regenerate = false;
    ps = resample(ps, world, q, fov, ContextBelief::uniform(), ComponentTable{}, ro, rng).particles;

    std::vector<double> xs, ws;
    for (const auto& p : ps) {
      xs.push_back(p.x.x());
      ws.push_back(p.w);
    }
    std::vector<double> exact(cells, 0.0);
    for (std::size_t i = 0; i < grid.cells(); ++i) exact[i / sub] += grid.mass()[i];
    worst = std::max(worst, oracle::total_variation(oracle::histogram(bins, xs, ws), exact));
  }
  const double secs = seconds_since(t0);
  report("A1", worst <= 0.05 && secs < 10.0,
         fmt("filter vs grid Bayes, N=%zu, %zu cells, %zu steps: max TV %.4f (<= 0.05), %.2f s (< 10 s)", n, cells,
             script.size(), worst, secs));
}

// ---------------------------------------------------------------------------
// A2: weight normalization, entropy bounds, IG monotone under FOV containment.

void a2_entropy_and_ig() {
  Rng rng = make_stream(12, 0);
  int norm_bad = 0, entropy_bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto n = static_cast<std::size_t>(1 + rng() % 500);
    std::vector<Particle> v(n);
    const int kind = trial % 4;
    for (auto& p : v) {
      const double u = uniform01(rng);
      switch (kind) {
        case 0: p.w = u; break;
        case 1: p.w = -std::log(u + 1e-300); break;
        case 2: p.w = u < 0.7 ? 0.0 : u; break;
        default: p.w = std::exp(-700.0 * u); break;
      }
    }
    v[rng() % n].w += 1e-3;  // keep the total positive
    ParticleSet ps(std::move(v));
    ps.normalize();
    if (std::abs(ps.total_weight() - 1.0) > 1e-9) ++norm_bad;
    const double h = entropy(ps);
    if (!(h >= 0.0 && h <= std::log(static_cast<double>(n)) + 1e-9)) ++entropy_bad;
  }

  int ig_bad = 0, ig_range_bad = 0;
  const FovParams base;
  for (int trial = 0; trial < 1000; ++trial) {
    WorldState world;
    world.bounds = {Vec2(-6, -6), Vec2(6, 6)};
    const int walls = static_cast<int>(rng() % 3);
    for (int k = 0; k < walls; ++k) {
      const Vec2 c(uniform(rng, -4, 4), uniform(rng, -4, 4));
      const Vec2 d = unit_from_angle(uniform(rng, -kPi, kPi)) * uniform(rng, 0.3, 1.5);
      world.occluders.push_back({k + 1, {c - d, c + d}});
    }
    std::vector<Particle> v(300);
    for (auto& p : v) p = {Vec2(uniform(rng, -6, 6), uniform(rng, -6, 6)), uniform01(rng) + 1e-6};
    ParticleSet ps(std::move(v));
    ps.normalize();
    RobotConfig q;
    q.position = Vec2(uniform(rng, -3, 3), uniform(rng, -3, 3));
    q.heading = uniform(rng, -kPi, kPi);
    q.pan = uniform(rng, -1, 1);

    FovParams fa = base, fb = base;
    fa.opening_angle = uniform(rng, 0.3, 2.5);
    fa.radius = uniform(rng, 1.0, 6.0);
    fb = fa;
    WorldState wb = world;
    switch (trial % 3) {
      case 0: fb.radius = fa.radius * uniform(rng, 0.1, 1.0); break;
      case 1: fb.opening_angle = fa.opening_angle * uniform(rng, 0.1, 1.0); break;
      default: {
        const Vec2 c = q.position + unit_from_angle(q.sensor_bearing()) * uniform(rng, 0.5, fa.radius);
        const Vec2 d = unit_from_angle(uniform(rng, -kPi, kPi)) * uniform(rng, 0.2, 1.0);
        wb.occluders.push_back({99, {c - d, c + d}});
      }
    }
    const double ia = information_gain(ps, q, fa, world);
    const double ib = information_gain(ps, q, fb, wb);
    if (ib > ia + 1e-12) ++ig_bad;
    if (ia < 0.0 || ia > entropy(ps) + 1e-12) ++ig_range_bad;
  }
  report("A2", norm_bad == 0 && entropy_bad == 0 && ig_bad == 0 && ig_range_bad == 0,
         fmt("1e4 weight vectors: %d off-simplex, %d entropy out of [0, log N]; 1e3 nested FOV pairs: %d with "
             "IG(inner) > IG(outer), %d IG outside [0, H]",
             norm_bad, entropy_bad, ig_bad, ig_range_bad));
}

// ---------------------------------------------------------------------------
// A3: planner against exhaustive enumeration.

oracle::DiscretePomdp to_oracle(const PomdpTables& t) {
  oracle::DiscretePomdp m;
  m.states = kNumContexts;
  m.actions = kNumActions;
  m.features = kNumFeatures;
  m.T.assign(kNumActions, std::vector<std::vector<double>>(kNumContexts, std::vector<double>(kNumContexts)));
  for (std::size_t a = 0; a < kNumActions; ++a)
    for (std::size_t s = 0; s < kNumContexts; ++s)
      for (std::size_t sp = 0; sp < kNumContexts; ++sp) m.T[a][s][sp] = t.transition[a][s][sp];
  m.L.assign(kNumFeatures, std::vector<double>(kNumContexts));
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    for (std::size_t s = 0; s < kNumContexts; ++s) m.L[f][s] = t.likelihood[f][s];
  m.r.assign(t.reward.begin(), t.reward.end());
  m.discount = t.discount;
  return m;
}

void a3_planner_vs_enumeration() {
  Rng rng = make_stream(13, 0);
  int action_bad = 0, value_bad = 0, cases = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    PomdpTables t;
    const std::size_t irr = index(ContextState::Irrecoverable);
    for (std::size_t a = 0; a < kNumActions; ++a)
      for (std::size_t s = 0; s < kNumContexts; ++s) {
        auto& row = t.transition[a][s];
        if (s == irr) {
          row = {0, 0, 0, 1};
          continue;
        }
        double sum = 0.0;
        for (auto& x : row) sum += (x = uniform01(rng) + 1e-3);
        for (auto& x : row) x /= sum;
      }
    for (auto& row : t.likelihood)
      for (auto& x : row) x = uniform(rng, 0.01, 0.99);
    for (auto& r : t.reward) r = uniform(rng, 0.0, 10.0);
    t.discount = uniform(rng, 0.5, 0.99);
    std::array<double, kNumContexts> m{};
    for (auto& x : m) x = uniform01(rng);
    const ContextBelief b = ContextBelief::normalized(m);
    const auto om = to_oracle(t);
    oracle::TreeEnumerator e(om);
    for (int h = 1; h <= 3; ++h) {
      t.horizon = h;
      const PlanResult got = plan(b, t);
      const auto want = e.solve({b.probabilities().begin(), b.probabilities().end()}, h);
      ++cases;
      if (index(got.action) != want.action) ++action_bad;
      const double err = std::abs(got.value - want.value);
      worst = std::max(worst, err);
      if (err > 1e-9 * std::max(1.0, std::abs(want.value))) ++value_bad;
    }
  }
  report("A3", action_bad == 0 && value_bad == 0,
         fmt("%d instances x horizons 1-3: %d action mismatches, %d value mismatches, max |dV| %.2e", cases / 3,
             action_bad, value_bad, worst));
}

// ---------------------------------------------------------------------------
// A4-A6: scenario outcomes.

void a4_occlusion(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  const auto trials = run_trials(scenario("occlusion"), cfg, {20, 0, 0});
  const double secs = seconds_since(t0);
  const auto r = aggregate("occlusion", trials);
  const double sr = r.success_ratio.value_or(0.0);
  const double med = r.median_restore_time.value_or(1e9);
  report("A4", sr >= 0.70 && med <= 30.0 && secs < 120.0,
         fmt("occlusion, 20 trials: SR %.3f over %d episodes (>= 0.70), median restore %.2f s (<= 30), %.1f s "
             "(< 120 s)",
             sr, r.episodes, med, secs));
}

void a5_disappearance(const RunConfig& cfg) {
  const auto script = scenario("disappearance");
  double take = 0.0;
  for (const auto& e : script.events)
    if (e.kind == EventKind::HumanTakesTarget) {
      take = e.time;
      break;
    }
  std::vector<TrialMetrics> ms;
  int quick = 0;
  for (int i = 0; i < 20; ++i) {
    const auto res = run_trial(script, cfg, derive_seed(0, static_cast<std::uint64_t>(i)), false);
    ms.push_back(res.metrics);
    const auto k = decision_epoch_of(res.trace.ticks, HlAction::Search, take);
    if (k && *k <= 3) ++quick;
  }
  const auto r = aggregate("disappearance", ms);
  const double sr = r.success_ratio.value_or(0.0);
  const double frac = quick / 20.0;
  report("A5", frac >= 0.90 && sr >= 0.60,
         fmt("disappearance, 20 trials: Search within 3 decisions of the take in %.0f%% (>= 90%%), SR %.3f over %d "
             "episodes (>= 0.60)",
             100.0 * frac, sr, r.episodes));
}

void a6_mixed(const RunConfig& cfg) {
  const auto script = scenario("mixed");
  const double unrec = script.unrecoverable_time().value_or(0.0);
  const double bound = unrec + cfg.agent.irrecoverable_timeout - cfg.agent.dt;
  const auto trials = run_trials(script, cfg, {20, 0, 0});
  const auto r = aggregate("mixed", trials);
  int early = 0, fired = 0;
  double min_ft = 1e300;
  for (const auto& t : trials)
    if (t.failure_time) {
      ++fired;
      min_ft = std::min(min_ft, *t.failure_time);
      if (*t.failure_time < bound) ++early;
    }
  report("A6", r.tracking_ratio.mean >= 0.60 && early == 0,
         fmt("mixed, 20 trials: mean TR %.3f (>= 0.60); FT fired in %d, earliest %.1f s, %d before %.1f s",
             r.tracking_ratio.mean, fired, fired ? min_ft : 0.0, early, bound));
}

// ---------------------------------------------------------------------------
// A7: predict() sample moments against the analytic mixture moments.

struct MomentCheck {
  int checks = 0;
  int bad = 0;
  double worst_z = 0.0;
};

void check_moments(const ParticleSet& out, const Vec2& mu, const Mat2& cov, MomentCheck& mc) {
  const double n = static_cast<double>(out.size());
  Vec2 mean = Vec2::Zero();
  for (const auto& p : out) mean += p.x;
  mean /= n;
  for (int i = 0; i < 2; ++i) {
    const double z = std::abs(mean(i) - mu(i)) / std::sqrt(cov(i, i) / n);
    mc.worst_z = std::max(mc.worst_z, z);
    ++mc.checks;
    if (z > 3.0) ++mc.bad;
  }
  // covariance entries about the analytic mean; SE from the sample spread of the products
  const int pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (const auto& pr : pairs) {
    double m1 = 0.0, m2 = 0.0;
    for (const auto& p : out) {
      const double d = (p.x(pr[0]) - mu(pr[0])) * (p.x(pr[1]) - mu(pr[1]));
      m1 += d;
      m2 += d * d;
    }
    m1 /= n;
    m2 /= n;
    const double se = std::sqrt(std::max(m2 - m1 * m1, 1e-300) / n);
    const double z = std::abs(m1 - cov(pr[0], pr[1])) / se;
    mc.worst_z = std::max(mc.worst_z, z);
    ++mc.checks;
    if (z > 3.0) ++mc.bad;
  }
}

void a7_predict_moments() {
  ContextCues cues;
  cues.last_target = Vec2(1.0, 1.0);
  cues.velocity = Vec2(0.5, -0.2);
  cues.occluder = OccluderCue{Vec2(3.0, 0.0), Vec2(1.0, 0.0)};
  cues.human = Vec2(5.0, 2.0);
  const ContextModelParams params;
  const ComponentTable table = build_components(cues, params);
  const std::size_t n = 10000;
  const ParticleSet start = ParticleSet::at(Vec2(0.0, 0.0), n);
  Rng rng = make_stream(17, 0);
  MomentCheck mc;

  for (auto c : {ContextState::Visible, ContextState::Occluded, ContextState::Disappearance}) {
    const auto& g = *table[index(c)];
    check_moments(predict(start, ContextBelief::point(c), table, rng), g.mean, g.cov, mc);
  }
  const ContextBelief mix({0.6, 0.0, 0.4, 0.0});
  const auto& a = *table[index(ContextState::Visible)];
  const auto& b = *table[index(ContextState::Disappearance)];
  const Vec2 mu = 0.6 * a.mean + 0.4 * b.mean;
  const Mat2 cov = 0.6 * (a.cov + a.mean * a.mean.transpose()) + 0.4 * (b.cov + b.mean * b.mean.transpose()) -
                   mu * mu.transpose();
  check_moments(predict(start, mix, table, rng), mu, cov, mc);

  report("A7", mc.bad == 0,
         fmt("predict, 1e4 samples, 3 contexts + 2-component mixture: %d of %d moments outside 3 SE (max %.2f SE)",
             mc.bad, mc.checks, mc.worst_z));
}

// ---------------------------------------------------------------------------
// A8: seeded determinism and replay.

void a8_determinism(const RunConfig& cfg) {
  int differ = 0, replay_bad = 0;
  long bytes = 0;
  for (const char* name : {"occlusion", "disappearance", "fast-move", "mixed"}) {
    const auto script = scenario(name);
    const auto a = run_trial(script, cfg, 7, true);
    const auto b = run_trial(script, cfg, 7, true);
    const std::string ta = trace_string(a.trace);
    const std::string tb = trace_string(b.trace);
    bytes += static_cast<long>(ta.size());
    if (ta != tb) ++differ;
    std::istringstream in(ta);
    const Trace back = read_trace(in);
    if (!(compute_metrics(back) == a.metrics) || trace_string(back) != ta) ++replay_bad;
  }
  report("A8", differ == 0 && replay_bad == 0,
         fmt("4 scripts run twice with seed 7: %d traces differ, %d replays disagree with live metrics (%.1f MB "
             "compared)",
             differ, replay_bad, bytes / 1e6));
}

}  // namespace

int main() {
  const RunConfig cfg = load_config("config/default.json");
  const std::vector<std::pair<const char*, std::function<void()>>> steps{
      {"A1", a1_filter_vs_grid},
      {"A2", a2_entropy_and_ig},
      {"A3", a3_planner_vs_enumeration},
      {"A4", [&] { a4_occlusion(cfg); }},
      {"A5", [&] { a5_disappearance(cfg); }},
      {"A6", [&] { a6_mixed(cfg); }},
      {"A7", a7_predict_moments},
      {"A8", [&] { a8_determinism(cfg); }},
  };
  for (const auto& [id, fn] : steps) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, steps.size());
  return failures == 0 ? 0 : 1;
}
