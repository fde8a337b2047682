#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "falsify/geometry.hpp"
#include "falsify/scenario.hpp"

namespace falsify {

struct ActorState {
  std::string actor_id;
  Vec2 position;
  double heading = 0.0;  // rad, (-pi, pi]
  double speed = 0.0;    // m/s, >= 0
  double route_progress = 0.0;
  bool triggered = false;
  // Footprint disc radius, carried so that per-frame metrics need only the world.
  double radius = 0.0;

  friend bool operator==(const ActorState&, const ActorState&) = default;
};

struct WorldState {
  // time == step_index * step_size, always computed from the index.
  std::int64_t step_index = 0;
  double time = 0.0;
  ActorState ego;
  std::vector<ActorState> others;
  double visibility = kVisibilityClear;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

inline constexpr double kMinAcceleration = -8.0;  // m/s^2
inline constexpr double kMaxAcceleration = 3.0;

struct Command {
  double acceleration = 0.0;
};

enum class Outcome { Collision, RouteCompleted, Timeout };

std::string_view to_string(Outcome outcome);
Outcome outcome_from_string(std::string_view name);

struct Trace {
  ScenarioConfig config;
  double step_size = 0.05;
  std::vector<WorldState> frames;
  Outcome outcome = Outcome::Timeout;

  friend bool operator==(const Trace&, const Trace&) = default;
};

}  // namespace falsify
