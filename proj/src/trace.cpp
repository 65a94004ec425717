#include "ctxtrack/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ctxtrack {

namespace {

std::string_view source_name(DetectionSource s) {
  switch (s) {
    case DetectionSource::None: return "none";
    case DetectionSource::Target: return "target";
    case DetectionSource::Clutter: return "clutter";
  }
  return "none";
}

DetectionSource source_from(const std::string& s) {
  if (s == "target") return DetectionSource::Target;
  if (s == "clutter") return DetectionSource::Clutter;
  if (s == "none") return DetectionSource::None;
  throw std::invalid_argument("unknown detection source '" + s + "'");
}

Phase phase_from(const std::string& s) {
  if (s == "Active") return Phase::Active;
  if (s == "Complete") return Phase::Complete;
  if (s == "Failed") return Phase::Failed;
  throw std::invalid_argument("unknown phase '" + s + "'");
}

}  // namespace

Json header_json(const TraceHeader& h) {
  return {{"type", "header"},
          {"version", h.version},
          {"seed", h.seed},
          {"scenario", scenario_json(h.script)},
          {"config", config_json(h.config)}};
}

TraceHeader header_from_json(const Json& j) {
  if (j.value("type", std::string()) != "header") throw std::invalid_argument("trace does not start with a header");
  TraceHeader h;
  h.version = j.at("version").get<int>();
  if (h.version != kTraceVersion) throw std::invalid_argument("unsupported trace version " + std::to_string(h.version));
  h.seed = j.at("seed").get<std::uint64_t>();
  h.script = scenario_from_json(j.at("scenario"));
  h.config = config_from_json(j.at("config"));
  return h;
}

Json tick_json(const TickRecord& r) {
  Json j = {{"type", "tick"},
            {"tick", r.tick},
            {"time", r.time},
            {"world", world_json(r.world)},
            {"belief", belief_json(r.belief)},
            {"particles", particles_json(r.particles)},
            {"action", std::string(to_string(r.action))},
            {"phase", std::string(to_string(r.phase))},
            {"ticks_elapsed", r.ticks_elapsed},
            {"detection", r.detection ? vec_json(*r.detection) : Json(nullptr)},
            {"source", std::string(source_name(r.source))},
            {"accepted", r.accepted},
            {"features", r.features.symbol()},
            {"overlap", r.overlap},
            {"depth_drop", r.depth_drop ? Json(*r.depth_drop) : Json(nullptr)},
            {"humans_seen", r.humans_seen},
            {"command", robot_json(r.command)},
            {"events", r.events},
            {"irrecoverable", r.irrecoverable},
            {"loss_elapsed", r.loss_elapsed}};
  j["finished"] = r.finished_action ? Json{{"action", std::string(to_string(*r.finished_action))},
                                           {"phase", std::string(to_string(r.finished_phase))}}
                                    : Json(nullptr);
  j["decision"] = r.decision ? Json{{"action", std::string(to_string(r.decision->action))},
                                    {"value", r.decision->value},
                                    {"q", r.decision->q_values}}
                             : Json(nullptr);
  j["view"] = r.view ? Json{{"config", robot_json(r.view->config)},
                            {"utility", r.view->utility},
                            {"info_gain", r.view->info_gain},
                            {"travel", r.view->travel},
                            {"perception", r.view->perception}}
                     : Json(nullptr);
  return j;
}

TickRecord tick_from_json(const Json& j) {
  if (j.value("type", std::string()) != "tick") throw std::invalid_argument("expected a tick record");
  TickRecord r;
  r.tick = j.at("tick").get<long>();
  r.time = j.at("time").get<double>();
  r.world = world_from_json(j.at("world"));
  r.belief = belief_from_json(j.at("belief"));
  r.particles = particles_from_json(j.at("particles"));
  r.action = action_from_string(j.at("action").get<std::string>());
  r.phase = phase_from(j.at("phase").get<std::string>());
  r.ticks_elapsed = j.at("ticks_elapsed").get<int>();
  if (!j.at("detection").is_null()) r.detection = vec_from_json(j["detection"]);
  r.source = source_from(j.at("source").get<std::string>());
  r.accepted = j.at("accepted").get<bool>();
  r.features = FeatureVector::from_symbol(j.at("features").get<int>());
  r.overlap = j.at("overlap").get<double>();
  if (!j.at("depth_drop").is_null()) r.depth_drop = j["depth_drop"].get<double>();
  r.humans_seen = j.at("humans_seen").get<std::vector<int>>();
  r.command = robot_from_json(j.at("command"));
  r.events = j.at("events").get<std::vector<std::string>>();
  r.irrecoverable = j.at("irrecoverable").get<bool>();
  r.loss_elapsed = j.at("loss_elapsed").get<double>();
  if (const auto& f = j.at("finished"); !f.is_null()) {
    r.finished_action = action_from_string(f.at("action").get<std::string>());
    r.finished_phase = phase_from(f.at("phase").get<std::string>());
  }
  if (const auto& d = j.at("decision"); !d.is_null()) {
    PlanResult p;
    p.action = action_from_string(d.at("action").get<std::string>());
    p.value = d.at("value").get<double>();
    p.q_values = d.at("q").get<std::array<double, kNumActions>>();
    r.decision = p;
  }
  if (const auto& v = j.at("view"); !v.is_null()) {
    ScoredCandidate c;
    c.config = robot_from_json(v.at("config"));
    c.utility = v.at("utility").get<double>();
    c.info_gain = v.at("info_gain").get<double>();
    c.travel = v.at("travel").get<double>();
    c.perception = v.at("perception").get<double>();
    r.view = c;
  }
  return r;
}

void write_trace(std::ostream& out, const Trace& trace) {
  out << header_json(trace.header).dump() << '\n';
  for (const auto& r : trace.ticks) out << tick_json(r).dump() << '\n';
}

std::string trace_string(const Trace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

void save_trace(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace " + path);
  write_trace(out, trace);
}

Trace read_trace(std::istream& in) {
  Trace t;
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      if (n == 1)
        t.header = header_from_json(j);
      else
        t.ticks.push_back(tick_from_json(j));
    } catch (const std::exception& e) {
      throw std::invalid_argument("trace line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (n == 0) throw std::invalid_argument("empty trace");
  return t;
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path);
  return read_trace(in);
}

}  // namespace ctxtrack
