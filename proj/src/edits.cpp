#include "ctxtrack/edits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctxtrack {

namespace {

void require_in_bounds(const WorldState& world, const Vec2& p, const char* what) {
  if (!p.allFinite() || !world.bounds.contains(p))
    throw std::invalid_argument(std::string(what) + " lies outside the world bounds");
}

void require_speed(std::optional<double> speed) {
  if (speed && !(*speed > 0.0 && std::isfinite(*speed))) throw std::invalid_argument("speed must be positive");
}

}  // namespace

void move_target(WorldState& world, const Vec2& p) {
  require_in_bounds(world, p, "target position");
  auto& t = world.target;
  t.position = p;
  t.velocity = Vec2::Zero();
  t.present = true;
  t.carrier.reset();
  t.drop_position.reset();
}

void set_target_velocity(WorldState& world, const Vec2& v) {
  if (!v.allFinite()) throw std::invalid_argument("target velocity must be finite");
  if (world.target.carrier) throw std::invalid_argument("target is being carried");
  world.target.velocity = v;
}

int place_occluder(WorldState& world, const Segment& s, std::optional<int> id) {
  require_in_bounds(world, s.a, "occluder endpoint");
  require_in_bounds(world, s.b, "occluder endpoint");
  if (s.length() < 1e-9) throw std::invalid_argument("occluder has zero length");
  if (id && world.find_occluder(*id)) throw std::invalid_argument("occluder id " + std::to_string(*id) + " exists");
  int used = 0;
  if (id) {
    used = *id;
  } else {
    for (const auto& o : world.occluders) used = std::max(used, o.id + 1);
  }
  world.occluders.push_back({used, s});
  return used;
}

void remove_occluder(WorldState& world, int id) {
  auto& occ = world.occluders;
  const auto it = std::find_if(occ.begin(), occ.end(), [id](const Occluder& o) { return o.id == id; });
  if (it == occ.end()) throw std::invalid_argument("no occluder with id " + std::to_string(id));
  occ.erase(it);
}

int spawn_human(WorldState& world, const Vec2& p, std::optional<int> id, std::optional<double> speed) {
  require_in_bounds(world, p, "human position");
  require_speed(speed);
  if (id && world.find_human(*id)) throw std::invalid_argument("human id " + std::to_string(*id) + " exists");
  int used = 0;
  if (id) {
    used = *id;
  } else {
    for (const auto& h : world.humans) used = std::max(used, h.id + 1);
  }
  Human h;
  h.id = used;
  h.position = p;
  if (speed) h.speed = *speed;
  world.humans.push_back(h);
  return used;
}

void move_human(WorldState& world, int id, const Vec2& goal, std::optional<double> speed) {
  require_in_bounds(world, goal, "human goal");
  require_speed(speed);
  Human* h = world.find_human(id);
  if (!h) throw std::invalid_argument("no human with id " + std::to_string(id));
  h->goal = goal;
  if (speed) h->speed = *speed;
}

void take_target(WorldState& world, int id, std::optional<Vec2> drop, double carry_duration) {
  Human* h = world.find_human(id);
  if (!h) throw std::invalid_argument("no human with id " + std::to_string(id));
  if (drop) require_in_bounds(world, *drop, "drop position");
  if (!(carry_duration >= 0.0) || !std::isfinite(carry_duration))
    throw std::invalid_argument("carry duration must be nonnegative");
  auto& t = world.target;
  if (t.carrier) throw std::invalid_argument("target is already carried");
  t.carrier = id;
  t.present = false;
  t.velocity = Vec2::Zero();
  t.position = h->position;
  t.drop_position = drop;
  t.drop_time = world.time + carry_duration;
  if (drop) h->goal = *drop;
}

void drop_target(WorldState& world, std::optional<Vec2> at) {
  auto& t = world.target;
  if (!t.carrier) throw std::invalid_argument("target is not being carried");
  Vec2 p = t.position;
  if (const Human* h = world.find_human(*t.carrier)) p = h->position;
  if (at) {
    require_in_bounds(world, *at, "drop position");
    p = *at;
  }
  t.position = p;
  t.present = true;
  t.carrier.reset();
  t.drop_position.reset();
}

}  // namespace ctxtrack
