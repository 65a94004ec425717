#include "ctxtrack/serialize.hpp"

#include <stdexcept>
#include <string>

namespace ctxtrack {

namespace {

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw std::invalid_argument(std::string(what) + " must be a number");
  return j.get<double>();
}

}  // namespace

Json vec_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Vec2 vec_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a point [x, y]");
  return {number(j[0], "x"), number(j[1], "y")};
}

Json robot_json(const RobotConfig& q) {
  return {{"position", vec_json(q.position)}, {"heading", q.heading}, {"pan", q.pan}};
}

RobotConfig robot_from_json(const Json& j) {
  RobotConfig q;
  q.position = vec_from_json(j.at("position"));
  q.heading = j.value("heading", 0.0);
  q.pan = j.value("pan", 0.0);
  return q;
}

Json segment_json(const Segment& s) { return Json::array({vec_json(s.a), vec_json(s.b)}); }

Segment segment_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a segment [[x, y], [x, y]]");
  return {vec_from_json(j[0]), vec_from_json(j[1])};
}

Json world_json(const WorldState& w) {
  Json target = {{"position", vec_json(w.target.position)},
                 {"velocity", vec_json(w.target.velocity)},
                 {"present", w.target.present},
                 {"carrier", w.target.carrier ? Json(*w.target.carrier) : Json(nullptr)},
                 {"drop_position", w.target.drop_position ? vec_json(*w.target.drop_position) : Json(nullptr)},
                 {"drop_time", w.target.drop_time}};
  Json occluders = Json::array();
  for (const auto& o : w.occluders) occluders.push_back({{"id", o.id}, {"segment", segment_json(o.segment)}});
  Json humans = Json::array();
  for (const auto& h : w.humans)
    humans.push_back({{"id", h.id},
                      {"position", vec_json(h.position)},
                      {"goal", h.goal ? vec_json(*h.goal) : Json(nullptr)},
                      {"speed", h.speed}});
  return {{"time", w.time},
          {"robot", robot_json(w.robot)},
          {"target", target},
          {"occluders", occluders},
          {"humans", humans},
          {"bounds", {{"min", vec_json(w.bounds.min)}, {"max", vec_json(w.bounds.max)}}},
          {"pan_max", w.pan_max}};
}

WorldState world_from_json(const Json& j) {
  WorldState w;
  w.time = j.value("time", 0.0);
  if (j.contains("bounds")) {
    w.bounds.min = vec_from_json(j["bounds"].at("min"));
    w.bounds.max = vec_from_json(j["bounds"].at("max"));
  }
  w.pan_max = j.value("pan_max", w.pan_max);
  if (j.contains("robot")) w.robot = robot_from_json(j["robot"]);
  if (j.contains("target")) {
    const auto& t = j["target"];
    w.target.position = vec_from_json(t.at("position"));
    if (t.contains("velocity")) w.target.velocity = vec_from_json(t["velocity"]);
    w.target.present = t.value("present", true);
    if (t.contains("carrier") && !t["carrier"].is_null()) w.target.carrier = t["carrier"].get<int>();
    if (t.contains("drop_position") && !t["drop_position"].is_null())
      w.target.drop_position = vec_from_json(t["drop_position"]);
    w.target.drop_time = t.value("drop_time", 0.0);
  }
  for (const auto& o : j.value("occluders", Json::array()))
    w.occluders.push_back({o.at("id").get<int>(), segment_from_json(o.at("segment"))});
  for (const auto& hj : j.value("humans", Json::array())) {
    Human h;
    h.id = hj.at("id").get<int>();
    h.position = vec_from_json(hj.at("position"));
    if (hj.contains("goal") && !hj["goal"].is_null()) h.goal = vec_from_json(hj["goal"]);
    h.speed = hj.value("speed", h.speed);
    w.humans.push_back(h);
  }
  return w;
}

Json belief_json(const ContextBelief& b) {
  Json j = Json::object();
  for (auto s : kAllContexts) j[std::string(to_string(s))] = b[s];
  return j;
}

ContextBelief belief_from_json(const Json& j) {
  std::array<double, kNumContexts> p{};
  for (auto s : kAllContexts) p[index(s)] = j.at(std::string(to_string(s))).get<double>();
  return ContextBelief(p);
}

Json particles_json(const std::vector<Particle>& ps) {
  Json j = Json::array();
  for (const auto& p : ps) j.push_back(Json::array({p.x.x(), p.x.y(), p.w}));
  return j;
}

std::vector<Particle> particles_from_json(const Json& j) {
  std::vector<Particle> ps;
  ps.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) throw std::invalid_argument("expected a particle [x, y, w]");
    ps.push_back({Vec2(e[0].get<double>(), e[1].get<double>()), e[2].get<double>()});
  }
  return ps;
}

}  // namespace ctxtrack
