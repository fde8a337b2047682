#include <gtest/gtest.h>

#include <memory>

#include "falsify/controller.hpp"
#include "falsify/error.hpp"
#include "falsify/rng.hpp"
#include "falsify/simulation.hpp"

using namespace falsify;

namespace {

auto straight_route() { return std::make_shared<const Polyline>(std::vector<Vec2>{{0, 0}, {200, 0}}); }

WorldState world_with(double ego_x, double ego_speed, std::vector<Vec2> others,
                      double visibility = kVisibilityClear) {
  WorldState w;
  w.ego.actor_id = "ego";
  w.ego.position = {ego_x, 0};
  w.ego.route_progress = ego_x;
  w.ego.speed = ego_speed;
  w.ego.radius = 1.0;
  int i = 0;
  for (auto p : others) {
    ActorState a;
    a.actor_id = "a" + std::to_string(i++);
    a.position = p;
    a.radius = 0.3;
    w.others.push_back(a);
  }
  w.visibility = visibility;
  return w;
}

double accel(const DecideFn& f, const ControllerSpec& spec, const WorldState& w) {
  return f(spec, {}, observe(w, straight_route())).command.acceleration;
}

}  // namespace

TEST(Observe, FiltersByVisibility) {
  const auto w = world_with(0, 10, {{10, 0}, {40, 0}}, 20.0);
  const auto obs = observe(w, straight_route());
  ASSERT_EQ(obs.visible_actors.size(), 1u);
  EXPECT_EQ(obs.visible_actors[0].state.actor_id, "a0");
  EXPECT_EQ(obs.visible_actors[0].radius, 0.3);
  EXPECT_EQ(obs.route_remaining, 200.0);
}

TEST(ConstantSpeed, ProportionalAndClamped) {
  const auto spec = controllers::constant_speed_defaults();
  EXPECT_EQ(spec.param("target_speed"), 10.0);
  EXPECT_DOUBLE_EQ(accel(controllers::constant_speed, spec, world_with(0, 9, {})), 1.0);
  EXPECT_DOUBLE_EQ(accel(controllers::constant_speed, spec, world_with(0, 10, {})), 0.0);
  EXPECT_DOUBLE_EQ(accel(controllers::constant_speed, spec, world_with(0, 0, {})), kMaxAcceleration);
  EXPECT_DOUBLE_EQ(accel(controllers::constant_speed, spec, world_with(0, 30, {})), kMinAcceleration);
  // Ignores actors directly ahead.
  EXPECT_DOUBLE_EQ(accel(controllers::constant_speed, spec, world_with(0, 10, {{3, 0}})), 0.0);
}

TEST(ReactiveBraking, BrakesForActorAheadWithinReach) {
  const auto spec = controllers::reactive_braking_defaults();
  const double reach = spec.param("reaction_distance");
  EXPECT_EQ(accel(controllers::reactive_braking, spec, world_with(0, 10, {{reach - 1, 1.0}})),
            kMinAcceleration);
  // Beyond reach, behind, or far off the lane: track speed instead.
  EXPECT_EQ(accel(controllers::reactive_braking, spec, world_with(0, 10, {{reach + 1, 0}})), 0.0);
  EXPECT_EQ(accel(controllers::reactive_braking, spec, world_with(20, 10, {{15, 0}})), 0.0);
  EXPECT_EQ(accel(controllers::reactive_braking, spec, world_with(0, 10, {{5, 2.5}})), 0.0);
}

TEST(ReactiveBraking, BlindBeyondVisibility) {
  auto spec = controllers::reactive_braking_defaults();
  spec.parameters["reaction_distance"] = 30.0;
  const auto clear = world_with(0, 10, {{25, 0}}, kVisibilityClear);
  const auto fog = world_with(0, 10, {{25, 0}}, kVisibilityOvercast);
  EXPECT_EQ(accel(controllers::reactive_braking, spec, clear), kMinAcceleration);
  EXPECT_EQ(accel(controllers::reactive_braking, spec, fog),
            accel(controllers::constant_speed, spec, fog));
}

TEST(ControllerRegistry, RegisterListResolve) {
  auto r = ControllerRegistry::with_builtins();
  EXPECT_EQ(r.list_controllers(), (std::vector<std::string>{"constant_speed", "reactive_braking"}));
  r.register_controller({"my_ads", {{"k", 1.0}}}, controllers::constant_speed);
  EXPECT_TRUE(r.contains("my_ads"));
  const auto spec = r.resolve("reactive_braking", {{"reaction_distance", 5.0}, {"extra", 1.0}});
  EXPECT_EQ(spec.param("reaction_distance"), 5.0);
  EXPECT_EQ(spec.param("target_speed"), 10.0);
  EXPECT_EQ(spec.param("extra"), 1.0);
  EXPECT_THROW((void)spec.param("missing"), Error);
}

TEST(ControllerRegistry, Errors) {
  auto r = ControllerRegistry::with_builtins();
  try {
    r.register_controller(controllers::reactive_braking_defaults(), controllers::reactive_braking);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateName);
  }
  try {
    (void)r.get("unregistered");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownController);
  }
  EXPECT_THROW(r.register_controller({"", {}}, controllers::constant_speed), Error);
  EXPECT_THROW(r.register_controller({"nan", {{"x", NAN}}}, controllers::constant_speed), Error);
}

// Property: the same observation sequence through fresh calls gives the same commands.
TEST(ControllerProperty, Purity) {
  Rng rng(5);
  const auto specs = {controllers::constant_speed_defaults(), controllers::reactive_braking_defaults()};
  for (const auto& spec : specs) {
    const auto& f = spec.name == "constant_speed" ? DecideFn(controllers::constant_speed)
                                                  : DecideFn(controllers::reactive_braking);
    std::vector<Observation> seq;
    for (int i = 0; i < 200; ++i) {
      std::vector<Vec2> others;
      for (int j = 0; j < 3; ++j) others.push_back({rng.uniform01() * 60, rng.uniform01() * 8 - 4});
      seq.push_back(observe(world_with(rng.uniform01() * 10, rng.uniform01() * 15, others,
                                       15 + 45 * rng.uniform01()),
                            straight_route()));
    }
    ControllerState s1, s2;
    for (const auto& o : seq) {
      const auto a = f(spec, s1, o);
      const auto b = f(spec, s2, o);
      ASSERT_EQ(a.command.acceleration, b.command.acceleration);
      ASSERT_EQ(a.state, b.state);
      s1 = a.state;
      s2 = b.state;
    }
  }
}

// Property: with cloudiness the only change, identical visible sets imply identical
// ego trajectories under reactive_braking.
TEST(ControllerProperty, VisibilityCausality) {
  const auto lib = ScenarioLibrary::with_builtins();
  const auto reg = ControllerRegistry::with_builtins();
  const auto& t = lib.get_template("ped_crossing");
  const auto spec = reg.resolve("reactive_braking");
  Rng rng(11);
  int compared = 0;
  for (int i = 0; i < 60; ++i) {
    Bindings b{{"v", 0.5 + 2.5 * rng.uniform01()},
               {"d_trigger", 5 + 25 * rng.uniform01()},
               {"start_distance", 20 + 40 * rng.uniform01()},
               {"cloudiness", 100 * rng.uniform01()}};
    const auto ta = run_simulation(t, instantiate(t, b, 0), reg, spec);
    b["cloudiness"] = 100 * rng.uniform01();
    const auto tb = run_simulation(t, instantiate(t, b, 0), reg, spec);

    const auto route = std::make_shared<const Polyline>(t.ego().route);
    auto visible_ids = [&](const WorldState& w) {
      std::vector<std::string> ids;
      for (const auto& v : observe(w, route).visible_actors) ids.push_back(v.state.actor_id);
      return ids;
    };
    // Compare while the trajectories agree; the first differing visible set ends the check.
    bool same_sets = ta.frames.size() == tb.frames.size();
    for (std::size_t k = 0; same_sets && k < ta.frames.size(); ++k) {
      auto wb = ta.frames[k];
      wb.visibility = tb.frames[0].visibility;
      same_sets = visible_ids(ta.frames[k]) == visible_ids(wb);
    }
    if (!same_sets) continue;
    ++compared;
    for (std::size_t k = 0; k < ta.frames.size(); ++k) {
      ASSERT_EQ(ta.frames[k].ego, tb.frames[k].ego) << "frame " << k;
    }
  }
  EXPECT_GT(compared, 0);
}
