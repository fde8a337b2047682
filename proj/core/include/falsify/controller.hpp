#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "falsify/geometry.hpp"
#include "falsify/world.hpp"

namespace falsify {

struct VisibleActor {
  ActorState state;
  double radius = 0.0;
};

// What a controller sees at one instant. Actors farther than the world visibility
// are filtered out before the controller is called.
struct Observation {
  ActorState ego;
  std::vector<VisibleActor> visible_actors;
  double time = 0.0;
  double route_remaining = 0.0;
  // The ego route, shared for the duration of a run.
  std::shared_ptr<const Polyline> ego_route;
};

Observation observe(const WorldState& world, std::shared_ptr<const Polyline> ego_route);

struct ControllerSpec {
  std::string name;
  std::map<std::string, double> parameters;

  double param(std::string_view key) const;
  friend bool operator==(const ControllerSpec&, const ControllerSpec&) = default;
};

// Controller memory threaded explicitly through every call.
struct ControllerState {
  std::vector<double> memory;
  friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

struct Decision {
  Command command;
  ControllerState state;
};

// Must be a pure function of its arguments: no clocks, no hidden RNG.
using DecideFn =
    std::function<Decision(const ControllerSpec&, const ControllerState&, const Observation&)>;

struct ControllerEntry {
  ControllerSpec defaults;
  DecideFn decide;
};

// Read-only once a campaign starts; registration is single-threaded.
class ControllerRegistry {
 public:
  static ControllerRegistry with_builtins();

  // Throws DuplicateName or InvalidCampaign (non-finite default parameter).
  void register_controller(ControllerSpec spec, DecideFn decide);

  std::vector<std::string> list_controllers() const;
  bool contains(std::string_view name) const;
  // Throws UnknownController.
  const ControllerEntry& get(std::string_view name) const;

  // Registered defaults overlaid with the given parameters. Unknown keys are kept.
  ControllerSpec resolve(std::string_view name,
                         const std::map<std::string, double>& overrides = {}) const;

 private:
  std::map<std::string, ControllerEntry, std::less<>> entries_;
};

namespace controllers {

inline constexpr double kSpeedGain = 1.0;         // 1/s
inline constexpr double kAheadLateralLimit = 2.0;  // m

// Proportional speed tracking: a = gain * (target_speed - v), clamped.
Decision constant_speed(const ControllerSpec& spec, const ControllerState& state,
                        const Observation& obs);

// Full braking when a visible actor is ahead of the ego within reaction_distance of
// route arc length and closer than kAheadLateralLimit to the route; otherwise
// behaves as constant_speed.
Decision reactive_braking(const ControllerSpec& spec, const ControllerState& state,
                          const Observation& obs);

ControllerSpec constant_speed_defaults();
ControllerSpec reactive_braking_defaults();

}  // namespace controllers

}  // namespace falsify
