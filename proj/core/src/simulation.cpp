#include "falsify/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "falsify/error.hpp"

namespace falsify {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Collision: return "Collision";
    case Outcome::RouteCompleted: return "RouteCompleted";
    case Outcome::Timeout: return "Timeout";
  }
  return "";
}

Outcome outcome_from_string(std::string_view name) {
  for (auto o : {Outcome::Collision, Outcome::RouteCompleted, Outcome::Timeout}) {
    if (to_string(o) == name) return o;
  }
  throw Error(ErrorCode::ParseError, "unknown outcome '" + std::string(name) + "'");
}

Scene build_scene(const ScenarioTemplate& tmpl, const ScenarioConfig& config) {
  Scene scene;
  scene.horizon = tmpl.horizon;
  scene.terminators = tmpl.terminators;
  scene.visibility = visibility_for(tmpl, config.bindings);

  std::vector<const ActorSpec*> ordered;
  ordered.push_back(&tmpl.ego());
  for (const auto& a : tmpl.actors) {
    if (a.actor_class != ActorClass::Ego) ordered.push_back(&a);
  }

  for (const ActorSpec* spec : ordered) {
    SceneActor actor;
    actor.actor_id = spec->actor_id;
    actor.actor_class = spec->actor_class;
    actor.radius = spec->footprint;
    actor.route = std::make_shared<const Polyline>(spec->route);
    actor.initial_offset =
        std::clamp(spec->initial_offset.resolve(config.bindings), 0.0, actor.route->length());
    actor.speed = std::max(0.0, spec->speed.resolve(config.bindings));
    if (spec->trigger) {
      actor.trigger_distance = spec->trigger->trigger_distance.resolve(config.bindings);
    }
    scene.actors.push_back(std::move(actor));
  }
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (!ordered[i]->trigger) continue;
    const auto& ref = ordered[i]->trigger->reference_actor;
    for (std::size_t j = 0; j < ordered.size(); ++j) {
      if (ordered[j]->actor_id == ref) scene.actors[i].trigger_reference = j;
    }
  }
  return scene;
}

namespace {

void place(ActorState& s, const SceneActor& a) {
  s.position = a.route->point_at(s.route_progress);
  s.heading = a.route->heading_at(s.route_progress);
}

ActorState initial_state(const SceneActor& a, bool is_ego) {
  ActorState s;
  s.actor_id = a.actor_id;
  s.radius = a.radius;
  s.route_progress = a.initial_offset;
  const bool moving = is_ego || !a.trigger_distance.has_value();
  s.speed = moving ? a.speed : 0.0;
  if (!is_ego && s.route_progress >= a.route->length()) s.speed = 0.0;
  s.triggered = false;
  place(s, a);
  return s;
}

bool overlaps(const ActorState& a, const ActorState& b) {
  return distance(a.position, b.position) < a.radius + b.radius;
}

}  // namespace

WorldState initial_world(const Scene& scene) {
  WorldState w;
  w.step_index = 0;
  w.time = 0.0;
  w.visibility = scene.visibility;
  w.ego = initial_state(scene.actors.front(), true);
  for (std::size_t i = 1; i < scene.actors.size(); ++i) {
    w.others.push_back(initial_state(scene.actors[i], false));
  }
  return w;
}

// Update order within one step:
//   1. actors triggered in an earlier step adopt their cruise speed
//   2. dormant triggers are tested against start-of-step positions; a trigger that fires
//      marks the actor triggered but it does not move until the next step
//   3. every actor advances route_progress by speed * dt (forward Euler), clamped to the
//      route end, where non-ego actors stop
//   4. the ego speed integrates the clamped command, floored at zero
WorldState step(const WorldState& world, Command command, const Scene& scene, double dt) {
  if (!std::isfinite(command.acceleration)) {
    std::ostringstream ss;
    ss << "acceleration " << command.acceleration << " at t=" << world.time;
    throw Error(ErrorCode::NonFiniteCommand, ss.str());
  }
  const double accel = std::clamp(command.acceleration, kMinAcceleration, kMaxAcceleration);

  WorldState next = world;
  next.step_index = world.step_index + 1;
  next.time = static_cast<double>(next.step_index) * dt;

  auto state_of = [&](std::size_t scene_index) -> const ActorState& {
    return scene_index == 0 ? world.ego : world.others[scene_index - 1];
  };

  for (std::size_t i = 0; i < next.others.size(); ++i) {
    ActorState& s = next.others[i];
    const SceneActor& a = scene.actors[i + 1];
    if (!a.trigger_distance) continue;
    if (s.triggered) {
      s.speed = s.route_progress < a.route->length() ? a.speed : 0.0;
    } else {
      const ActorState& ref = state_of(a.trigger_reference);
      if (distance(ref.position, s.position) <= *a.trigger_distance) s.triggered = true;
    }
  }

  const SceneActor& ego_actor = scene.actors.front();
  next.ego.route_progress =
      std::min(world.ego.route_progress + world.ego.speed * dt, ego_actor.route->length());
  next.ego.speed = std::max(0.0, world.ego.speed + accel * dt);
  place(next.ego, ego_actor);

  for (std::size_t i = 0; i < next.others.size(); ++i) {
    ActorState& s = next.others[i];
    const SceneActor& a = scene.actors[i + 1];
    const double len = a.route->length();
    s.route_progress = std::min(s.route_progress + s.speed * dt, len);
    if (s.route_progress >= len) s.speed = 0.0;
    place(s, a);
  }
  return next;
}

std::optional<ActorPair> detect_collision(const WorldState& world) {
  for (const auto& o : world.others) {
    if (overlaps(world.ego, o)) return ActorPair{world.ego.actor_id, o.actor_id};
  }
  // Remaining pairs in lexicographic order of (smaller id, larger id).
  std::vector<const ActorState*> sorted;
  for (const auto& o : world.others) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(),
            [](const ActorState* a, const ActorState* b) { return a->actor_id < b->actor_id; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (overlaps(*sorted[i], *sorted[j])) {
        return ActorPair{sorted[i]->actor_id, sorted[j]->actor_id};
      }
    }
  }
  return std::nullopt;
}

double pairwise_min_distance(const WorldState& world) {
  if (world.others.empty()) throw Error(ErrorCode::NoOtherActors, "world has no non-ego actors");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : world.others) {
    const double d = distance(world.ego.position, o.position) - world.ego.radius - o.radius;
    best = std::min(best, d);
  }
  return std::max(0.0, best);
}

std::int64_t max_steps(double horizon, double step_size) {
  const double n = horizon / step_size;
  const auto nearest = std::llround(n);
  if (std::abs(n - static_cast<double>(nearest)) <= 1e-9 * std::max(1.0, n)) return nearest;
  return static_cast<std::int64_t>(std::ceil(n));
}

Trace run_simulation(const ScenarioTemplate& tmpl, const ScenarioConfig& config,
                     const ControllerSpec& controller, const DecideFn& decide,
                     double step_size) {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw Error(ErrorCode::InvalidCampaign, "step size must be positive");
  }
  const Scene scene = build_scene(tmpl, config);
  const auto ego_route = scene.actors.front().route;
  const double ego_length = ego_route->length();
  const std::int64_t last_step = max_steps(scene.horizon, step_size);

  Trace trace;
  trace.config = config;
  trace.step_size = step_size;
  trace.frames.reserve(static_cast<std::size_t>(last_step) + 1);
  trace.frames.push_back(initial_world(scene));

  auto terminal = [&](const WorldState& w) -> std::optional<Outcome> {
    if (scene.terminators.collision && detect_collision(w)) return Outcome::Collision;
    if (scene.terminators.route_completed && w.ego.route_progress >= ego_length) {
      return Outcome::RouteCompleted;
    }
    if (w.step_index >= last_step) return Outcome::Timeout;
    return std::nullopt;
  };

  ControllerState state;
  std::optional<Outcome> outcome = terminal(trace.frames.back());
  while (!outcome) {
    const WorldState& world = trace.frames.back();
    Decision d = decide(controller, state, observe(world, ego_route));
    state = std::move(d.state);
    WorldState next = step(world, d.command, scene, step_size);
    trace.frames.push_back(std::move(next));
    outcome = terminal(trace.frames.back());
  }
  trace.outcome = *outcome;
  return trace;
}

Trace run_simulation(const ScenarioTemplate& tmpl, const ScenarioConfig& config,
                     const ControllerRegistry& registry, const ControllerSpec& controller,
                     double step_size) {
  const auto& entry = registry.get(controller.name);
  return run_simulation(tmpl, config, controller, entry.decide, step_size);
}

}  // namespace falsify
