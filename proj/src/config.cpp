#include "ctxtrack/config.hpp"

#include <fstream>
#include <set>

namespace ctxtrack {

namespace {

Json mat2_json(const Mat2& m) { return Json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}); }

Mat2 mat2_from(const Json& j) {
  Mat2 m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

Json mat4_json(const Mat4& m) {
  Json j = Json::array();
  for (int r = 0; r < 4; ++r) j.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  return j;
}

Mat4 mat4_from(const Json& j) {
  Mat4 m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

const char* const kFeatureNames[kNumFeatures] = {"target", "overlap", "depth", "human"};

Json array4(const std::array<double, kNumContexts>& a) { return Json::array({a[0], a[1], a[2], a[3]}); }

std::array<double, kNumContexts> array4_from(const Json& j) {
  if (!j.is_array() || j.size() != kNumContexts) throw ConfigError("expected 4 per-state values");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Json tables_json(const PomdpTables& t) {
  Json trans = Json::object();
  for (auto a : kAllActions) {
    Json rows = Json::object();
    for (auto s : kAllContexts) rows[std::string(to_string(s))] = array4(t.transition[index(a)][index(s)]);
    trans[std::string(to_string(a))] = rows;
  }
  Json lik = Json::object();
  for (std::size_t f = 0; f < kNumFeatures; ++f) lik[kFeatureNames[f]] = array4(t.likelihood[f]);
  return {{"transitions", trans},
          {"likelihoods", lik},
          {"reward", array4(t.reward)},
          {"discount", t.discount},
          {"horizon", t.horizon}};
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& section) {
  if (!j.is_object()) throw ConfigError("section '" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in section '" + section + "'");
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j[key].get<T>();
}

}  // namespace

void RunConfig::validate() const {
  agent.validate();
  if (trace.particles < 1) throw std::invalid_argument("trace.particles must be at least 1");
  if (metrics.loss_min_ticks < 1) throw std::invalid_argument("metrics.loss_min_ticks must be at least 1");
  if (bridge.snapshot_every < 1) throw std::invalid_argument("bridge.snapshot_every must be at least 1");
  if (!(bridge.speed > 0.0)) throw std::invalid_argument("bridge.speed must be positive");
  if (bridge.client_queue < 1) throw std::invalid_argument("bridge.client_queue must be at least 1");
  if (bridge.snapshot_particles < 1 || bridge.snapshot_particles > 1000)
    throw std::invalid_argument("bridge.snapshot_particles must lie in [1, 1000]");
}

Json config_json(const RunConfig& c) {
  const auto& a = c.agent;
  return {
      {"dt", a.dt},
      {"fov", {{"opening_angle", a.fov.opening_angle}, {"radius", a.fov.radius}}},
      {"sensor",
       {{"p_d", a.sensor.p_d},
        {"p_e", a.sensor.p_e},
        {"cov", mat2_json(a.sensor.cov)},
        {"depth_window", a.sensor.depth_window},
        {"overlap_threshold", a.sensor.overlap_threshold},
        {"depth_threshold", a.sensor.depth_threshold},
        {"p_d_human", a.sensor.p_d_human},
        {"target_radius", a.sensor.target_radius}}},
      {"context_model",
       {{"sigma_visible", a.context.sigma_visible},
        {"sigma_occluded", a.context.sigma_occluded},
        {"sigma_human", a.context.sigma_human},
        {"occluded_offset", a.context.occluded_offset}}},
      {"filter", {{"n_particles", a.n_particles}, {"resample_threshold", a.resample_threshold}}},
      {"pomdp", tables_json(a.tables)},
      {"utility",
       {{"beta", a.utility.beta},
        {"gamma_perc", a.utility.gamma_perc},
        {"weights", mat4_json(a.utility.weights)},
        {"n_samples", a.utility.n_samples},
        {"sample_radius", a.utility.sample_radius},
        {"inflation", a.utility.inflation}}},
      {"agent",
       {{"budgets",
         {{"Track", a.budgets.track}, {"ActiveMove", a.budgets.active_move}, {"Search", a.budgets.search}}},
        {"confirm_ticks", a.confirm_ticks},
        {"irrecoverable_timeout", a.irrecoverable_timeout},
        {"max_speed", a.max_speed},
        {"max_turn_rate", a.max_turn_rate},
        {"sweep_rate", a.sweep_rate},
        {"scan_amplitude", a.scan_amplitude},
        {"arrival_tolerance", a.arrival_tolerance},
        {"arrival_angle_tolerance", a.arrival_angle_tolerance},
        {"stall_ticks", a.stall_ticks},
        {"human_standoff", a.human_standoff},
        {"human_cue_ttl", a.human_cue_ttl},
        {"human_scan_time", a.human_scan_time},
        {"coverage_cell", a.coverage_cell},
        {"velocity_smoothing", a.velocity_smoothing},
        {"velocity_decay", a.velocity_decay},
        {"gate_radius", a.gate_radius},
        {"belief_floor", a.belief_floor}}},
      {"trace", {{"particles", c.trace.particles}}},
      {"metrics", {{"loss_min_ticks", c.metrics.loss_min_ticks}}},
      {"bridge",
       {{"protocol_version", c.bridge.protocol_version},
        {"snapshot_every", c.bridge.snapshot_every},
        {"speed", c.bridge.speed},
        {"client_queue", c.bridge.client_queue},
        {"snapshot_particles", c.bridge.snapshot_particles}}},
  };
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  auto& a = c.agent;
  try {
    check_keys(j, {"dt", "fov", "sensor", "context_model", "filter", "pomdp", "utility", "agent", "trace", "metrics",
                   "bridge"},
               "root");
    read(j, "dt", a.dt);
    a.context.dt = a.dt;
    if (j.contains("fov")) {
      const auto& s = j["fov"];
      check_keys(s, {"opening_angle", "radius"}, "fov");
      read(s, "opening_angle", a.fov.opening_angle);
      read(s, "radius", a.fov.radius);
    }
    if (j.contains("sensor")) {
      const auto& s = j["sensor"];
      check_keys(s, {"p_d", "p_e", "cov", "depth_window", "overlap_threshold", "depth_threshold", "p_d_human",
                     "target_radius"},
                 "sensor");
      read(s, "p_d", a.sensor.p_d);
      read(s, "p_e", a.sensor.p_e);
      if (s.contains("cov")) a.sensor.cov = mat2_from(s["cov"]);
      read(s, "depth_window", a.sensor.depth_window);
      read(s, "overlap_threshold", a.sensor.overlap_threshold);
      read(s, "depth_threshold", a.sensor.depth_threshold);
      read(s, "p_d_human", a.sensor.p_d_human);
      read(s, "target_radius", a.sensor.target_radius);
    }
    if (j.contains("context_model")) {
      const auto& s = j["context_model"];
      check_keys(s, {"sigma_visible", "sigma_occluded", "sigma_human", "occluded_offset"}, "context_model");
      read(s, "sigma_visible", a.context.sigma_visible);
      read(s, "sigma_occluded", a.context.sigma_occluded);
      read(s, "sigma_human", a.context.sigma_human);
      read(s, "occluded_offset", a.context.occluded_offset);
    }
    if (j.contains("filter")) {
      const auto& s = j["filter"];
      check_keys(s, {"n_particles", "resample_threshold"}, "filter");
      read(s, "n_particles", a.n_particles);
      read(s, "resample_threshold", a.resample_threshold);
    }
    // The detection likelihood row follows p_d unless given explicitly.
    a.tables = PomdpTables::defaults(a.sensor.p_d);
    if (j.contains("pomdp")) {
      const auto& s = j["pomdp"];
      check_keys(s, {"transitions", "likelihoods", "reward", "discount", "horizon"}, "pomdp");
      if (s.contains("transitions")) {
        for (const auto& [an, rows] : s["transitions"].items()) {
          const HlAction act = action_from_string(an);
          for (const auto& [sn, row] : rows.items())
            a.tables.transition[index(act)][index(context_from_string(sn))] = array4_from(row);
        }
      }
      if (s.contains("likelihoods")) {
        for (const auto& [fname, row] : s["likelihoods"].items()) {
          std::size_t f = 0;
          while (f < kNumFeatures && fname != kFeatureNames[f]) ++f;
          if (f == kNumFeatures) throw ConfigError("unknown feature '" + fname + "'");
          a.tables.likelihood[f] = array4_from(row);
        }
      }
      if (s.contains("reward")) a.tables.reward = array4_from(s["reward"]);
      read(s, "discount", a.tables.discount);
      read(s, "horizon", a.tables.horizon);
    }
    if (j.contains("utility")) {
      const auto& s = j["utility"];
      check_keys(s, {"beta", "gamma_perc", "weights", "n_samples", "sample_radius", "inflation"}, "utility");
      read(s, "beta", a.utility.beta);
      read(s, "gamma_perc", a.utility.gamma_perc);
      if (s.contains("weights")) a.utility.weights = mat4_from(s["weights"]);
      read(s, "n_samples", a.utility.n_samples);
      read(s, "sample_radius", a.utility.sample_radius);
      read(s, "inflation", a.utility.inflation);
    }
    if (j.contains("agent")) {
      const auto& s = j["agent"];
      check_keys(s, {"budgets", "confirm_ticks", "irrecoverable_timeout", "max_speed", "max_turn_rate", "sweep_rate",
                     "scan_amplitude", "arrival_tolerance", "arrival_angle_tolerance", "stall_ticks", "human_standoff",
                     "human_cue_ttl", "human_scan_time", "coverage_cell", "velocity_smoothing", "velocity_decay", "gate_radius", "belief_floor"},
                 "agent");
      if (s.contains("budgets")) {
        const auto& b = s["budgets"];
        check_keys(b, {"Track", "ActiveMove", "Search"}, "agent.budgets");
        read(b, "Track", a.budgets.track);
        read(b, "ActiveMove", a.budgets.active_move);
        read(b, "Search", a.budgets.search);
      }
      read(s, "confirm_ticks", a.confirm_ticks);
      read(s, "irrecoverable_timeout", a.irrecoverable_timeout);
      read(s, "max_speed", a.max_speed);
      read(s, "max_turn_rate", a.max_turn_rate);
      read(s, "sweep_rate", a.sweep_rate);
      read(s, "scan_amplitude", a.scan_amplitude);
      read(s, "arrival_tolerance", a.arrival_tolerance);
      read(s, "arrival_angle_tolerance", a.arrival_angle_tolerance);
      read(s, "stall_ticks", a.stall_ticks);
      read(s, "human_standoff", a.human_standoff);
      read(s, "human_cue_ttl", a.human_cue_ttl);
      read(s, "human_scan_time", a.human_scan_time);
      read(s, "coverage_cell", a.coverage_cell);
      read(s, "velocity_smoothing", a.velocity_smoothing);
      read(s, "velocity_decay", a.velocity_decay);
      read(s, "gate_radius", a.gate_radius);
      read(s, "belief_floor", a.belief_floor);
    }
    if (j.contains("trace")) {
      check_keys(j["trace"], {"particles"}, "trace");
      read(j["trace"], "particles", c.trace.particles);
    }
    if (j.contains("metrics")) {
      check_keys(j["metrics"], {"loss_min_ticks"}, "metrics");
      read(j["metrics"], "loss_min_ticks", c.metrics.loss_min_ticks);
    }
    if (j.contains("bridge")) {
      const auto& s = j["bridge"];
      check_keys(s, {"protocol_version", "snapshot_every", "speed", "client_queue", "snapshot_particles"}, "bridge");
      read(s, "protocol_version", c.bridge.protocol_version);
      read(s, "snapshot_every", c.bridge.snapshot_every);
      read(s, "speed", c.bridge.speed);
      read(s, "client_queue", c.bridge.client_queue);
      read(s, "snapshot_particles", c.bridge.snapshot_particles);
    }
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace ctxtrack
