#include "falsify/controller.hpp"

#include <algorithm>
#include <cmath>

#include "falsify/error.hpp"

namespace falsify {

Observation observe(const WorldState& world, std::shared_ptr<const Polyline> ego_route) {
  Observation obs;
  obs.ego = world.ego;
  obs.time = world.time;
  obs.route_remaining = std::max(0.0, ego_route->length() - world.ego.route_progress);
  for (const auto& o : world.others) {
    if (distance(world.ego.position, o.position) <= world.visibility) {
      obs.visible_actors.push_back({o, o.radius});
    }
  }
  obs.ego_route = std::move(ego_route);
  return obs;
}

double ControllerSpec::param(std::string_view key) const {
  const auto it = parameters.find(std::string(key));
  if (it == parameters.end()) {
    throw Error(ErrorCode::InvalidCampaign,
                "controller '" + name + "' has no parameter '" + std::string(key) + "'");
  }
  return it->second;
}

ControllerRegistry ControllerRegistry::with_builtins() {
  ControllerRegistry r;
  r.register_controller(controllers::constant_speed_defaults(), controllers::constant_speed);
  r.register_controller(controllers::reactive_braking_defaults(), controllers::reactive_braking);
  return r;
}

void ControllerRegistry::register_controller(ControllerSpec spec, DecideFn decide) {
  if (spec.name.empty()) throw Error(ErrorCode::InvalidCampaign, "controller name is empty");
  if (entries_.contains(spec.name)) {
    throw Error(ErrorCode::DuplicateName, "controller '" + spec.name + "' already registered");
  }
  for (const auto& [k, v] : spec.parameters) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidCampaign, spec.name + "." + k + " is not finite");
    }
  }
  auto name = spec.name;
  entries_.emplace(std::move(name), ControllerEntry{std::move(spec), std::move(decide)});
}

std::vector<std::string> ControllerRegistry::list_controllers() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

bool ControllerRegistry::contains(std::string_view name) const {
  return entries_.find(name) != entries_.end();
}

const ControllerEntry& ControllerRegistry::get(std::string_view name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownController, std::string(name));
  return it->second;
}

ControllerSpec ControllerRegistry::resolve(std::string_view name,
                                           const std::map<std::string, double>& overrides) const {
  ControllerSpec spec = get(name).defaults;
  for (const auto& [k, v] : overrides) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidCampaign, spec.name + "." + k + " is not finite");
    }
    spec.parameters[k] = v;
  }
  return spec;
}

namespace controllers {

namespace {

double track_speed(const ControllerSpec& spec, const Observation& obs) {
  const double a = kSpeedGain * (spec.param("target_speed") - obs.ego.speed);
  return std::clamp(a, kMinAcceleration, kMaxAcceleration);
}

}  // namespace

ControllerSpec constant_speed_defaults() { return {"constant_speed", {{"target_speed", 10.0}}}; }

ControllerSpec reactive_braking_defaults() {
  return {"reactive_braking", {{"target_speed", 10.0}, {"reaction_distance", 12.0}}};
}

Decision constant_speed(const ControllerSpec& spec, const ControllerState& state,
                        const Observation& obs) {
  return {{track_speed(spec, obs)}, state};
}

Decision reactive_braking(const ControllerSpec& spec, const ControllerState& state,
                          const Observation& obs) {
  const double reach = spec.param("reaction_distance");
  for (const auto& v : obs.visible_actors) {
    const RouteProjection p = obs.ego_route->project(v.state.position);
    const double ahead = p.arc_length - obs.ego.route_progress;
    if (ahead >= 0.0 && ahead <= reach && std::abs(p.lateral) < kAheadLateralLimit) {
      return {{kMinAcceleration}, state};
    }
  }
  return {{track_speed(spec, obs)}, state};
}

}  // namespace controllers

}  // namespace falsify
