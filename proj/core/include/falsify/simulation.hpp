#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "falsify/controller.hpp"
#include "falsify/geometry.hpp"
#include "falsify/scenario.hpp"
#include "falsify/world.hpp"

namespace falsify {

inline constexpr double kDefaultStepSize = 0.05;  // s, 20 Hz

// An actor with every template value resolved against one config.
struct SceneActor {
  std::string actor_id;
  ActorClass actor_class = ActorClass::Vehicle;
  double radius = 1.0;
  std::shared_ptr<const Polyline> route;
  double initial_offset = 0.0;
  double speed = 0.0;
  std::optional<double> trigger_distance;
  // Index into Scene::actors of the trigger reference; unused without a trigger.
  std::size_t trigger_reference = 0;
};

struct Scene {
  // actors[0] is the ego; the rest keep template order.
  std::vector<SceneActor> actors;
  double visibility = kVisibilityClear;
  double horizon = 20.0;
  Terminators terminators;
};

// Resolves all parameter references. Only requires every referenced parameter to be
// bound; range checks belong to instantiate().
Scene build_scene(const ScenarioTemplate& tmpl, const ScenarioConfig& config);

WorldState initial_world(const Scene& scene);

// Advances the world by one step of dt. See simulation.cpp for the exact update order.
// Throws NonFiniteCommand.
WorldState step(const WorldState& world, Command command, const Scene& scene, double dt);

using ActorPair = std::pair<std::string, std::string>;

// First overlapping pair (strict: centre distance < r_i + r_j). Pairs involving the ego
// are checked first, then the remaining pairs in lexicographic actor-id order.
std::optional<ActorPair> detect_collision(const WorldState& world);

// min over non-ego actors of (centre distance - r_ego - r_other), floored at 0.
// Throws NoOtherActors.
double pairwise_min_distance(const WorldState& world);

Trace run_simulation(const ScenarioTemplate& tmpl, const ScenarioConfig& config,
                     const ControllerSpec& controller, const DecideFn& decide,
                     double step_size = kDefaultStepSize);

Trace run_simulation(const ScenarioTemplate& tmpl, const ScenarioConfig& config,
                     const ControllerRegistry& registry, const ControllerSpec& controller,
                     double step_size = kDefaultStepSize);

// Upper bound on the number of steps: ceil(horizon / step_size) with a 1e-9 tolerance.
std::int64_t max_steps(double horizon, double step_size);

}  // namespace falsify
