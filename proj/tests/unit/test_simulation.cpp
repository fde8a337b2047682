#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "../common/closed_form.hpp"
#include "falsify/controller.hpp"
#include "falsify/error.hpp"
#include "falsify/evaluation.hpp"
#include "falsify/rng.hpp"
#include "falsify/simulation.hpp"
#include "test_support.hpp"

using namespace falsify;

namespace {

const ScenarioLibrary& builtin_library() {
  static const auto lib = ScenarioLibrary::with_builtins();
  return lib;
}

ActorState disc(std::string id, double x, double y, double r) {
  ActorState s;
  s.actor_id = std::move(id);
  s.position = {x, y};
  s.radius = r;
  return s;
}

// Ego parked at the origin facing +x, one pedestrian whose trigger distance is fixed.
ScenarioTemplate trigger_probe(double ped_x, double ego_speed = 0.0) {
  ScenarioTemplate t;
  t.template_id = "trigger_probe";
  t.category = ScenarioCategory::PedestrianNonMotorized;
  ActorSpec ego;
  ego.actor_id = "ego";
  ego.actor_class = ActorClass::Ego;
  ego.route = {{0, 0}, {100, 0}};
  ego.speed = ValueSource::constant(ego_speed);
  ActorSpec ped;
  ped.actor_id = "ped";
  ped.actor_class = ActorClass::Pedestrian;
  ped.footprint = 0.3;
  ped.route = {{ped_x, 0}, {ped_x, 10}};
  ped.speed = ValueSource::constant(1.2);
  ped.trigger = TriggerRule{"ego", ValueSource::constant(15.0), "euclidean"};
  t.actors = {ego, ped};
  return t;
}

ScenarioConfig config_for(const ScenarioTemplate& t, Bindings b = {}) {
  ScenarioConfig c;
  c.template_id = t.template_id;
  c.bindings = std::move(b);
  return c;
}

const ControllerRegistry& registry() {
  static const auto r = ControllerRegistry::with_builtins();
  return r;
}

Trace run(const ScenarioTemplate& t, const Bindings& b, const std::string& controller,
          double dt = kDefaultStepSize) {
  return run_simulation(t, instantiate(t, b, 0), registry(), registry().resolve(controller), dt);
}

Bindings ped(double v, double d, double s, double cloud = 0.0) {
  return {{"v", v}, {"d_trigger", d}, {"start_distance", s}, {"cloudiness", cloud}};
}

}  // namespace

TEST(Step, ConstantVelocityAdvancesExactly) {
  const auto t = trigger_probe(50.0, 10.0);
  const auto scene = build_scene(t, config_for(t));
  const auto w0 = initial_world(scene);
  const auto w1 = step(w0, {0.0}, scene, 0.05);
  EXPECT_EQ(w1.ego.route_progress - w0.ego.route_progress, 0.5);
  EXPECT_EQ(w1.ego.speed, 10.0);
  EXPECT_EQ(w1.step_index, 1);
}

TEST(Step, SpeedFloorsAtZero) {
  auto t = trigger_probe(50.0, 1.0);
  const auto scene = build_scene(t, config_for(t));
  const auto w1 = step(initial_world(scene), {-8.0}, scene, 0.5);
  EXPECT_EQ(w1.ego.speed, 0.0);
}

TEST(Step, CommandIsClamped) {
  const auto t = trigger_probe(50.0, 5.0);
  const auto scene = build_scene(t, config_for(t));
  const auto w1 = step(initial_world(scene), {100.0}, scene, 0.1);
  EXPECT_DOUBLE_EQ(w1.ego.speed, 5.0 + kMaxAcceleration * 0.1);
  const auto w2 = step(initial_world(scene), {-100.0}, scene, 0.1);
  EXPECT_DOUBLE_EQ(w2.ego.speed, 5.0 + kMinAcceleration * 0.1);
}

TEST(Step, NonFiniteCommandThrows) {
  const auto t = trigger_probe(50.0);
  const auto scene = build_scene(t, config_for(t));
  try {
    (void)step(initial_world(scene), {std::numeric_limits<double>::quiet_NaN()}, scene, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteCommand);
  }
  EXPECT_THROW((void)step(initial_world(scene), {INFINITY}, scene, 0.05), Error);
}

TEST(Step, TriggerFiresAtStartOfStepAndMovesNextStep) {
  const auto t = trigger_probe(14.9);
  const auto scene = build_scene(t, config_for(t));
  const auto w0 = initial_world(scene);
  ASSERT_FALSE(w0.others[0].triggered);
  EXPECT_EQ(w0.others[0].speed, 0.0);

  const auto w1 = step(w0, {0.0}, scene, 0.05);
  EXPECT_TRUE(w1.others[0].triggered);
  EXPECT_EQ(w1.others[0].route_progress, 0.0);

  const auto w2 = step(w1, {0.0}, scene, 0.05);
  EXPECT_EQ(w2.others[0].speed, 1.2);
  EXPECT_DOUBLE_EQ(w2.others[0].route_progress, 1.2 * 0.05);
}

TEST(Step, TriggerDoesNotFireOutsideDistance) {
  const auto t = trigger_probe(15.1);
  const auto scene = build_scene(t, config_for(t));
  auto w = initial_world(scene);
  for (int i = 0; i < 10; ++i) w = step(w, {0.0}, scene, 0.05);
  EXPECT_FALSE(w.others[0].triggered);
  EXPECT_EQ(w.others[0].route_progress, 0.0);
}

TEST(Step, HeadingFollowsTangentAndActorsStopAtRouteEnd) {
  auto t = trigger_probe(14.9);
  const auto scene = build_scene(t, config_for(t));
  auto w = initial_world(scene);
  for (int i = 0; i < 400; ++i) w = step(w, {0.0}, scene, 0.05);
  EXPECT_DOUBLE_EQ(w.others[0].heading, M_PI / 2);
  EXPECT_EQ(w.others[0].route_progress, 10.0);
  EXPECT_EQ(w.others[0].speed, 0.0);
  EXPECT_EQ(w.others[0].position, (Vec2{14.9, 10.0}));
}

TEST(DetectCollision, DiscArithmetic) {
  WorldState w;
  w.ego = disc("ego", 0, 0, 1.0);
  w.others = {disc("pedestrian", 1.2, 0, 0.3)};
  const auto hit = detect_collision(w);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->first, "ego");
  EXPECT_EQ(hit->second, "pedestrian");

  w.others[0].position = {1.3, 0};
  EXPECT_FALSE(detect_collision(w));

  w.others.clear();
  EXPECT_FALSE(detect_collision(w));
}

TEST(DetectCollision, EgoPairsFirstThenLexicographic) {
  WorldState w;
  w.ego = disc("ego", 0, 0, 1.0);
  w.others = {disc("zeta", 10, 0, 1.0), disc("alpha", 11, 0, 1.0), disc("mid", 0, 1.5, 1.0)};
  auto hit = detect_collision(w);
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, (ActorPair{"ego", "mid"}));

  w.others[2].position = {0, 50};
  hit = detect_collision(w);
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, (ActorPair{"alpha", "zeta"}));
}

TEST(PairwiseMinDistance, Examples) {
  WorldState w;
  w.ego = disc("ego", 0, 0, 1.0);
  w.others = {disc("p", 5, 0, 0.3)};
  EXPECT_DOUBLE_EQ(pairwise_min_distance(w), 3.7);
  w.others.push_back(disc("q", 0, 2.4, 0.3));
  EXPECT_DOUBLE_EQ(pairwise_min_distance(w), 1.1);
  w.others.push_back(disc("r", 0.5, 0, 0.3));
  EXPECT_EQ(pairwise_min_distance(w), 0.0);
  w.others.clear();
  try {
    (void)pairwise_min_distance(w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoOtherActors);
  }
}

TEST(MaxSteps, ToleratesRepresentationError) {
  EXPECT_EQ(max_steps(20.0, 0.05), 400);
  EXPECT_EQ(max_steps(0.05, 0.05), 1);
  EXPECT_EQ(max_steps(0.3, 0.1), 3);
  EXPECT_EQ(max_steps(1.0, 0.3), 4);
}

TEST(RunSimulation, MinimalHorizonGivesTwoFrames) {
  const auto t = falsify::testing::ped_crossing_variant(0.5, 0.05);
  const auto tr = run(t, ped(1.5, 15, 40), "constant_speed");
  ASSERT_EQ(tr.frames.size(), 2u);
  EXPECT_EQ(tr.frames[0].time, 0.0);
  EXPECT_EQ(tr.frames[1].time, 0.05);
  EXPECT_EQ(tr.outcome, Outcome::Timeout);
}

TEST(RunSimulation, StationaryPedestrianMeansRouteCompleted) {
  const auto t = falsify::testing::ped_crossing_variant(0.0);
  const auto tr = run(t, ped(0.0, 30, 40), "constant_speed");
  EXPECT_EQ(tr.outcome, Outcome::RouteCompleted);
  EXPECT_FALSE(evaluate(tr).collision);
  EXPECT_EQ(tr.frames.back().ego.route_progress, 160.0);
}

TEST(RunSimulation, TriggerBelowLateralOffsetNeverFires) {
  const auto& t = builtin_library().get_template("ped_crossing");
  const auto tr = run(t, ped(3.0, 6.5, 40), "constant_speed");
  for (const auto& f : tr.frames) EXPECT_FALSE(f.others[0].triggered);
  EXPECT_EQ(tr.outcome, Outcome::RouteCompleted);
}

// The pedestrian and a constant-speed ego reach the crossing point in the same frame.
TEST(RunSimulation, ClosedFormCollisionVelocity) {
  const auto& t = builtin_library().get_template("ped_crossing");
  const double dt = 0.05, S = 40.0, D = 28.0, u = 10.0, lat = 7.0;
  // First frame whose start-of-step distance is within D.
  int k = 0;
  while (std::hypot(S - u * k * dt, lat) > D) ++k;
  // Triggered in step k, walking from step k + 1.
  const double t_walk = (k + 1) * dt;
  const double t_arrive = S / u;
  const double v = lat / (t_arrive - t_walk);
  ASSERT_GE(v, 0.5);
  ASSERT_LE(v, 3.0);

  const auto tr = run(t, ped(v, D, S), "constant_speed", dt);
  EXPECT_EQ(tr.outcome, Outcome::Collision);
  const auto hit = detect_collision(tr.frames.back());
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, (ActorPair{"ego", "pedestrian"}));
  EXPECT_NEAR(tr.frames.back().time, t_arrive, 0.15);

  // Trigger frame predicted in closed form.
  std::size_t first_triggered = 0;
  while (!tr.frames[first_triggered].others[0].triggered) ++first_triggered;
  EXPECT_EQ(first_triggered, static_cast<std::size_t>(k + 1));

  // Well off the colliding velocity the ego passes in front.
  const auto miss = run(t, ped(0.5, D, S), "constant_speed", dt);
  EXPECT_NE(miss.outcome, Outcome::Collision);
}

TEST(RunSimulation, MinDistanceNearAnalytic) {
  const auto& t = builtin_library().get_template("ped_crossing");
  const falsify::testing::CrossingGeometry g;
  const double v = 2.0, D = 25.0, S = 34.125;
  const double exact = falsify::testing::analytic_min_distance(g, v, S, D);
  ASSERT_GT(exact, 0.0);
  for (double dt : {0.05, 0.025}) {
    const auto r = evaluate(run(t, ped(v, D, S), "constant_speed", dt));
    EXPECT_FALSE(r.collision);
    EXPECT_NEAR(r.min_distance, exact, 2 * (10 + v) * dt) << dt;
  }
}

TEST(RunSimulation, TimeIsIndexTimesStep) {
  const auto& t = builtin_library().get_template("ped_crossing");
  for (double dt : {0.05, 0.1, 0.03}) {
    const auto tr = run(t, ped(1.0, 10, 50), "reactive_braking", dt);
    ASSERT_LE(static_cast<std::int64_t>(tr.frames.size()), max_steps(t.horizon, dt) + 1);
    for (std::size_t k = 0; k < tr.frames.size(); ++k) {
      EXPECT_EQ(tr.frames[k].step_index, static_cast<std::int64_t>(k));
      EXPECT_EQ(tr.frames[k].time, static_cast<double>(k) * dt);
    }
  }
}

TEST(RunSimulation, ControllerSeesFirstObservationAtTimeZero) {
  const auto& t = builtin_library().get_template("ped_crossing");
  std::vector<double> times;
  DecideFn probe = [&](const ControllerSpec&, const ControllerState& s, const Observation& o) {
    times.push_back(o.time);
    return Decision{{0.0}, s};
  };
  const auto tr = run_simulation(t, instantiate(t, ped(1.0, 10, 50), 0), {"probe", {}}, probe);
  ASSERT_FALSE(times.empty());
  EXPECT_EQ(times.front(), 0.0);
  EXPECT_EQ(times.size(), tr.frames.size() - 1);
}

TEST(RunSimulation, NonFiniteControllerOutputPropagates) {
  const auto& t = builtin_library().get_template("ped_crossing");
  DecideFn bad = [](const ControllerSpec&, const ControllerState& s, const Observation&) {
    return Decision{{std::numeric_limits<double>::quiet_NaN()}, s};
  };
  try {
    (void)run_simulation(t, instantiate(t, ped(1.0, 10, 50), 0), {"bad", {}}, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteCommand);
  }
}

TEST(RunSimulation, RejectsBadStepSize) {
  const auto& t = builtin_library().get_template("ped_crossing");
  EXPECT_THROW((void)run(t, ped(1.0, 10, 50), "constant_speed", 0.0), Error);
  EXPECT_THROW((void)run(t, ped(1.0, 10, 50), "constant_speed", -0.1), Error);
}

TEST(RunSimulation, UnknownControllerThrows) {
  const auto& t = builtin_library().get_template("ped_crossing");
  try {
    (void)run_simulation(t, instantiate(t, ped(1.0, 10, 50), 0), registry(),
                         ControllerSpec{"nope", {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownController);
  }
}

// Properties over random configs of every built-in template.

TEST(SimulationProperty, DeterministicTriggerMonotoneScheduleBounded) {
  Rng rng(2024);
  const auto lib = ScenarioLibrary::with_builtins();
  for (const auto& entry : lib.list_templates()) {
    const auto& t = lib.get_template(entry.template_id);
    for (int i = 0; i < 8; ++i) {
      Bindings b;
      for (const auto& p : t.parameters) {
        double x = p.lower + rng.uniform01() * (p.upper - p.lower);
        if (p.kind == ParameterKind::Stepped) x = p.lower + std::round((x - p.lower) / p.step) * p.step;
        b[p.name] = x;
      }
      const auto cfg = instantiate(t, b, i);
      const auto spec = registry().resolve(i % 2 ? "reactive_braking" : "constant_speed");
      const auto a = run_simulation(t, cfg, registry(), spec);
      const auto c = run_simulation(t, cfg, registry(), spec);
      ASSERT_EQ(a, c) << entry.template_id;
      ASSERT_LE(static_cast<std::int64_t>(a.frames.size()), max_steps(t.horizon, 0.05) + 1);
      for (std::size_t k = 1; k < a.frames.size(); ++k) {
        for (std::size_t j = 0; j < a.frames[k].others.size(); ++j) {
          if (a.frames[k - 1].others[j].triggered) ASSERT_TRUE(a.frames[k].others[j].triggered);
        }
      }
    }
  }
}
