#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctxtrack/bridge.hpp"
#include "ctxtrack/scenario.hpp"

#include <cmath>
#include <limits>

using namespace ctxtrack;

namespace {

const Bounds kBounds{Vec2(-6, -6), Vec2(8, 6)};

AdversaryCommand parse(const char* text) { return command_from_json(Json::parse(text), kBounds); }

ScenarioScript without_events(ScenarioScript s) {
  s.events.clear();
  return s;
}

RunConfig light_config() {
  RunConfig c;
  c.agent.n_particles = 500;
  return c;
}

AdversaryCommand command_for(const ScenarioEvent& e) {
  AdversaryCommand c;
  switch (e.kind) {
    case EventKind::MoveTarget: c.kind = CommandKind::DragTarget; c.position = e.position; break;
    case EventKind::PlaceOccluder: c.kind = CommandKind::PlaceOccluder; c.segment = e.segment; c.id = e.id; break;
    case EventKind::RemoveOccluder: c.kind = CommandKind::RemoveOccluder; c.id = e.id; break;
    case EventKind::HumanAppear: c.kind = CommandKind::SpawnHuman; c.position = e.position; c.id = e.id; c.speed = e.speed; break;
    case EventKind::HumanMove: c.kind = CommandKind::MoveHuman; c.position = e.position; c.id = e.id; c.speed = e.speed; break;
    case EventKind::HumanTakesTarget:
      c.kind = CommandKind::TakeTarget;
      c.id = e.id;
      c.position = e.position;
      c.duration = e.duration;
      break;
    case EventKind::SetTargetVelocity: FAIL("no command sets the target velocity"); break;
  }
  return c;
}

}  // namespace

TEST_CASE("command parsing accepts every kind and round-trips") {
  const char* docs[] = {
      R"({"kind": "drag_target", "position": [3, 3]})",
      R"({"kind": "place_occluder", "segment": [[2, -0.6], [2, 0.6]]})",
      R"({"kind": "place_occluder", "segment": [[2, -0.6], [2, 0.6]], "id": 4})",
      R"({"kind": "remove_occluder", "id": 4})",
      R"({"kind": "move_human", "id": 1, "position": [1, 1], "speed": 1.2})",
      R"({"kind": "spawn_human", "position": [1, 1]})",
      R"({"kind": "take_target", "id": 1, "position": [-3, 3], "duration": 2.5})",
      R"({"kind": "take_target", "id": 1})",
      R"({"kind": "drop_target"})",
      R"({"kind": "pause"})",
      R"({"kind": "resume"})",
      R"({"kind": "set_speed", "speed": 4})",
  };
  for (const char* d : docs) {
    CAPTURE(d);
    const AdversaryCommand c = parse(d);
    CHECK(command_from_json(command_json(c), kBounds) == c);
    CHECK(command_json(c) == command_json(command_from_json(Json::parse(d), kBounds)));
  }
  CHECK(parse(docs[0]).position->isApprox(Vec2(3, 3)));
}

TEST_CASE("command parsing rejects bad input") {
  const char* bad[] = {
      R"([1, 2])",
      R"({"position": [1, 1]})",
      R"({"kind": "teleport", "position": [1, 1]})",
      R"({"kind": "drag_target"})",
      R"({"kind": "drag_target", "position": [1]})",
      R"({"kind": "drag_target", "position": [100, 0]})",
      R"({"kind": "drag_target", "position": [1, 1], "speed": 2})",
      R"({"kind": "place_occluder", "segment": [[1, 1], [1, 1]]})",
      R"({"kind": "place_occluder", "segment": [[1, 1]]})",
      R"({"kind": "remove_occluder", "id": 1.5})",
      R"({"kind": "move_human", "id": 1, "position": [1, 1], "speed": 0})",
      R"({"kind": "take_target", "id": 1, "duration": -1})",
      R"({"kind": "set_speed", "speed": 101})",
      R"({"kind": "set_speed"})",
      R"({"kind": "pause", "now": true})",
  };
  for (const char* d : bad) {
    CAPTURE(d);
    CHECK_THROWS_AS(parse(d), ProtocolError);
  }
  Json nan = {{"kind", "drag_target"}, {"position", {std::numeric_limits<double>::quiet_NaN(), 0.0}}};
  CHECK_THROWS_AS(command_from_json(nan, kBounds), ProtocolError);
  Json inf = {{"kind", "set_speed"}, {"speed", std::numeric_limits<double>::infinity()}};
  CHECK_THROWS_AS(command_from_json(inf, kBounds), ProtocolError);
}

TEST_CASE("command labels match the scripted event labels") {
  WorldState w;
  w.bounds = kBounds;
  CHECK(apply_command(w, parse(R"({"kind": "drag_target", "position": [3, 3]})")) == "move_target");
  CHECK(apply_command(w, parse(R"({"kind": "spawn_human", "position": [1, 1], "id": 2})")) == "human_appear id=2");
  CHECK(apply_command(w, parse(R"({"kind": "take_target", "id": 2})")) == "human_takes_target id=2");
  CHECK(apply_command(w, parse(R"({"kind": "drop_target"})")) == "drop_target");
  CHECK_THROWS_AS(apply_command(w, parse(R"({"kind": "drop_target"})")), std::invalid_argument);
  CHECK_THROWS_AS(apply_command(w, parse(R"({"kind": "remove_occluder", "id": 9})")), std::invalid_argument);
  CHECK_THROWS_AS(apply_command(w, parse(R"({"kind": "pause"})")), std::invalid_argument);
}

TEST_CASE("version negotiation") {
  CHECK(negotiate_version({1}, {1}) == 1);
  CHECK(negotiate_version({1, 2, 3}, {1, 2}) == 2);
  CHECK_FALSE(negotiate_version({2}, {1}));
  CHECK_FALSE(negotiate_version({}, {1}));
  CHECK(offered_versions(Json::parse(R"({"type": "hello", "version": 1})")) == std::vector<int>{1});
  const auto both = offered_versions(Json::parse(R"({"type": "hello", "version": 2, "supported": [1, 2]})"));
  CHECK(negotiate_version(both, supported_protocol_versions()) == 1);
  CHECK_THROWS_AS(offered_versions(Json::parse(R"({"type": "hello"})")), ProtocolError);
  CHECK_THROWS_AS(offered_versions(Json::parse(R"({"type": "hello", "version": "one"})")), ProtocolError);
}

TEST_CASE("wire messages") {
  const Json h = hello_message(1, {{"scenario", "x"}});
  CHECK(h["type"] == "hello");
  CHECK(h["version"] == 1);
  CHECK(h["supported"] == Json::array({1}));
  const Json e = error_message(1, "nope", 7);
  CHECK(e["type"] == "error");
  CHECK(e["ref"] == 7);
  CHECK_FALSE(error_message(1, "nope").contains("ref"));
  const Json c = command_message(1, parse(R"({"kind": "pause"})"), 3);
  CHECK(c["command"]["kind"] == "pause");
  CHECK(c["ref"] == 3);
}

TEST_CASE("snapshots round-trip losslessly") {
  Session s(load_scenario("scenarios/disappearance.json"), light_config(), 4);
  for (int i = 0; i < 80; ++i) s.advance();
  const Json j = snapshot_json(s.snapshot());
  CHECK(snapshot_json(snapshot_from_json(j)) == j);
  CHECK(j["particles"].size() <= 1000);

  const Json msg = snapshot_message(1, s.snapshot());
  CHECK(msg["type"] == "snapshot");
  CHECK(snapshot_json(snapshot_from_json(Json::parse(msg.dump())["snapshot"])) == msg["snapshot"]);

  Json broken = j;
  broken.erase("belief");
  CHECK_THROWS_AS(snapshot_from_json(broken), ProtocolError);
  Json crowded = j;
  crowded["particles"] = Json::array();
  for (int i = 0; i < 1001; ++i) crowded["particles"].push_back({0.0, 0.0, 0.001});
  CHECK_THROWS_AS(snapshot_from_json(crowded), ProtocolError);
}

TEST_CASE("session semantics") {
  const ScenarioScript script = without_events(load_scenario("scenarios/occlusion.json"));

  SUBCASE("paused sessions do not tick") {
    Session s(script, light_config(), 1);
    s.advance();
    s.submit(parse(R"({"kind": "pause"})"));
    const auto r = s.advance();
    CHECK_FALSE(r.stepped);
    CHECK(r.snapshot_due);
    const long tick = s.simulation().tick();
    for (int i = 0; i < 100; ++i) {
      const auto q = s.advance();
      CHECK_FALSE(q.stepped);
      CHECK_FALSE(q.snapshot_due);
    }
    CHECK(s.simulation().tick() == tick);
    CHECK(s.snapshot().paused);
    s.submit(parse(R"({"kind": "resume"})"));
    CHECK(s.advance().stepped);
    CHECK(s.simulation().tick() == tick + 1);
  }

  SUBCASE("drag_target shows up in the next snapshot") {
    Session s(script, light_config(), 1);
    s.advance();
    s.submit(parse(R"({"kind": "drag_target", "position": [3, 3]})"));
    s.advance();
    CHECK(s.snapshot().world.target.position.isApprox(Vec2(3, 3)));
    CHECK(s.trace().ticks.back().world.target.position.isApprox(Vec2(3, 3)));
    CHECK(s.trace().ticks.back().events == std::vector<std::string>{"move_target"});
  }

  SUBCASE("impossible edits are rejected with a reason and change nothing") {
    Session s(script, light_config(), 1);
    std::string reason;
    s.submit(parse(R"({"kind": "remove_occluder", "id": 9})"), [&](const std::string& r) { reason = r; });
    const auto r = s.advance();
    CHECK(r.rejected == 1);
    CHECK(r.applied == 0);
    CHECK(reason.find("9") != std::string::npos);
    CHECK(s.trace().ticks.back().events.empty());
  }

  SUBCASE("set_speed changes the pace only") {
    Session s(script, light_config(), 1);
    s.submit(parse(R"({"kind": "set_speed", "speed": 8})"));
    s.advance();
    CHECK(s.speed() == 8.0);
    CHECK(s.snapshot().speed == 8.0);
  }

  SUBCASE("snapshots follow the configured cadence") {
    RunConfig c = light_config();
    c.bridge.snapshot_every = 3;
    Session s(script, c, 1);
    int due = 0;
    for (int i = 0; i < 30; ++i) due += s.advance().snapshot_due;
    CHECK(due == 10);
  }

  SUBCASE("an occluder between sensor and target shifts belief to Occluded") {
    Session s(script, light_config(), 2);
    for (int i = 0; i < 30; ++i) s.advance();
    CHECK(s.snapshot().belief.argmax() == ContextState::Visible);
    s.submit(parse(R"({"kind": "place_occluder", "segment": [[2, -0.6], [2, 0.6]]})"));
    double peak = 0.0;
    for (int i = 0; i < 30; ++i) {
      s.advance();
      peak = std::max(peak, s.snapshot().belief[ContextState::Occluded]);
    }
    CHECK(peak > 0.5);
  }
}

TEST_CASE("finished sessions reject edits") {
  ScenarioScript script = without_events(load_scenario("scenarios/occlusion.json"));
  script.duration = 0.5;
  Session s(script, light_config(), 1);
  while (!s.finished()) s.advance();
  CHECK(s.snapshot().finished);
  int rejected = 0;
  s.submit(parse(R"({"kind": "drag_target", "position": [1, 1]})"), [&](const std::string&) { ++rejected; });
  const auto r = s.advance();
  CHECK_FALSE(r.stepped);
  CHECK(rejected == 1);
}

TEST_CASE("a session without commands reproduces the headless trace") {
  const ScenarioScript script = load_scenario("scenarios/disappearance.json");
  const RunConfig config = light_config();
  Session s(script, config, 11);
  while (!s.finished()) s.advance();
  const TrialResult r = run_trial(script, config, 11);
  CHECK(trace_string(s.trace()) == trace_string(r.trace));
}

TEST_CASE("commands reproduce a scripted run tick for tick") {
  const RunConfig config = light_config();
  for (const char* name : {"disappearance", "occlusion"}) {
    CAPTURE(name);
    const ScenarioScript script = load_scenario(std::string("scenarios/") + name + ".json");
    const TrialResult scripted = run_trial(script, config, 6);

    Session s(without_events(script), config, 6);
    std::size_t next = 0;
    while (!s.finished()) {
      const double now = s.simulation().tick() * config.agent.dt;
      while (next < script.events.size() && script.events[next].time <= now + 1e-9)
        s.submit(command_for(script.events[next++]));
      s.advance();
    }
    REQUIRE(s.trace().ticks.size() == scripted.trace.ticks.size());
    for (std::size_t k = 0; k < scripted.trace.ticks.size(); ++k) {
      CAPTURE(k);
      REQUIRE(tick_json(s.trace().ticks[k]) == tick_json(scripted.trace.ticks[k]));
    }
  }
}
