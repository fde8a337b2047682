#include <string>
#include <vector>

#include "falsify/scenario.hpp"

namespace falsify {

namespace {

// Shared ranges. Ego cruises at kEgoSpeed along +x unless a template says otherwise.
constexpr double kEgoSpeed = 10.0;
constexpr double kEgoRadius = 1.0;
constexpr double kVehicleRadius = 1.0;
constexpr double kPedestrianRadius = 0.3;
constexpr double kBicycleRadius = 0.5;

ParameterSpec start_distance() { return {"start_distance", "m", 20.0, 60.0}; }
ParameterSpec trigger_distance() { return {"d_trigger", "m", 5.0, 30.0}; }
ParameterSpec pedestrian_velocity() { return {"v", "m/s", 0.5, 3.0}; }
ParameterSpec bicycle_velocity() { return {"v", "m/s", 1.0, 8.0}; }
ParameterSpec vehicle_velocity() { return {"v", "m/s", 2.0, 14.0}; }
ParameterSpec cloudiness() { return {"cloudiness", "percent", 0.0, 100.0}; }

// Ego placed so that its arc-length distance to the point at `conflict_s` along its
// route equals the start_distance parameter.
ActorSpec ego_before(std::vector<Vec2> route, double conflict_s) {
  ActorSpec ego;
  ego.actor_id = "ego";
  ego.actor_class = ActorClass::Ego;
  ego.footprint = kEgoRadius;
  ego.route = std::move(route);
  ego.initial_offset = ValueSource::parameter("start_distance", -1.0, conflict_s);
  ego.speed = ValueSource::constant(kEgoSpeed);
  return ego;
}

ActorSpec ego_at(std::vector<Vec2> route, double offset) {
  ActorSpec ego = ego_before(std::move(route), 0.0);
  ego.initial_offset = ValueSource::constant(offset);
  return ego;
}

ActorSpec dormant(std::string id, ActorClass cls, double radius, std::vector<Vec2> route,
                  ValueSource offset = ValueSource::constant(0.0)) {
  ActorSpec a;
  a.actor_id = std::move(id);
  a.actor_class = cls;
  a.footprint = radius;
  a.route = std::move(route);
  a.initial_offset = std::move(offset);
  a.speed = ValueSource::parameter("v");
  a.trigger = TriggerRule{"ego", ValueSource::parameter("d_trigger"), "euclidean"};
  return a;
}

ActorSpec fixed_obstacle(std::string id, double radius, std::vector<Vec2> route,
                         ValueSource offset) {
  ActorSpec a;
  a.actor_id = std::move(id);
  a.actor_class = ActorClass::StaticObstacle;
  a.footprint = radius;
  a.route = std::move(route);
  a.initial_offset = std::move(offset);
  a.speed = ValueSource::constant(0.0);
  return a;
}

ScenarioTemplate make(std::string id, ScenarioCategory category, std::string description,
                      std::vector<ActorSpec> actors, std::vector<ParameterSpec> params) {
  ScenarioTemplate t;
  t.template_id = std::move(id);
  t.category = category;
  t.description = std::move(description);
  t.actors = std::move(actors);
  t.parameters = std::move(params);
  t.weather_parameters = {"cloudiness"};
  t.horizon = 20.0;
  return t;
}

}  // namespace

std::vector<ScenarioTemplate> builtin_templates() {
  std::vector<ScenarioTemplate> out;

  // Obstacle recognition ----------------------------------------------------

  {
    ParameterSpec lateral{"lateral_position", "m", -3.0, 3.0, ParameterKind::Stepped, 0.5};
    out.push_back(make(
        "static_obstacle", ScenarioCategory::ObstacleRecognition,
        "Static obstacle on a straight road at a parameterized lateral position.",
        {ego_before({{0, 0}, {160, 0}}, 80.0),
         fixed_obstacle("obstacle", kVehicleRadius, {{80, -3}, {80, 3}},
                        ValueSource::parameter("lateral_position", 1.0, 3.0))},
        {start_distance(), lateral, cloudiness()}));
  }
  out.push_back(make(
      "stalled_vehicle_after_turn", ScenarioCategory::ObstacleRecognition,
      "Stationary vehicle shortly after a left turn at an intersection.",
      {ego_before({{0, 0}, {60, 0}, {60, 100}}, 80.0),
       fixed_obstacle("stalled", kVehicleRadius, {{57, 20}, {63, 20}},
                      ValueSource::parameter("lateral_position", -1.0, 3.0))},
      {start_distance(), {"lateral_position", "m", -3.0, 3.0}, cloudiness()}));

  // Intersection encounters -------------------------------------------------

  out.push_back(make(
      "side_street_crossing", ScenarioCategory::IntersectionEncounter,
      "Vehicle waiting in a side street crosses the ego path at a crossroads.",
      {ego_before({{0, 0}, {160, 0}}, 80.0),
       dormant("crossing", ActorClass::Vehicle, kVehicleRadius, {{80, -8}, {80, 60}})},
      {start_distance(), trigger_distance(), vehicle_velocity(), cloudiness()}));
  out.push_back(make(
      "oncoming_left_turn", ScenarioCategory::IntersectionEncounter,
      "Ego turns left across the lane of an oncoming vehicle.",
      {ego_before({{0, 0}, {80, 0}, {80, 80}}, 80.0),
       dormant("oncoming", ActorClass::Vehicle, kVehicleRadius, {{88, 3.5}, {0, 3.5}})},
      {start_distance(), trigger_distance(), vehicle_velocity(), cloudiness()}));

  // Pedestrian and non-motorized --------------------------------------------

  out.push_back(make(
      "ped_crossing", ScenarioCategory::PedestrianNonMotorized,
      "Pedestrian starts crossing in front of the ego once it is within the trigger distance.",
      {ego_before({{0, 0}, {160, 0}}, 80.0),
       dormant("pedestrian", ActorClass::Pedestrian, kPedestrianRadius, {{80, -7}, {80, 6}})},
      {pedestrian_velocity(), trigger_distance(), start_distance(), cloudiness()}));
  out.push_back(make(
      "bicycle_crossing_diagonal", ScenarioCategory::PedestrianNonMotorized,
      "Bicycle crosses the ego path diagonally at an intersection.",
      {ego_before({{0, 0}, {160, 0}}, 80.0),
       dormant("bicycle", ActorClass::Bicycle, kBicycleRadius, {{74, -8}, {86, 8}})},
      {start_distance(), trigger_distance(), bicycle_velocity(), cloudiness()}));
  out.push_back(make(
      "bicycle_along_road", ScenarioCategory::PedestrianNonMotorized,
      "Bicycle riding ahead near the lane edge, pulling away once the ego approaches.",
      {ego_at({{0, 0}, {220, 0}}, 20.0),
       dormant("bicycle", ActorClass::Bicycle, kBicycleRadius, {{20, 1.5}, {400, 1.5}},
               ValueSource::parameter("start_distance"))},
      {start_distance(), trigger_distance(), bicycle_velocity(), cloudiness()}));

  // Surrounding vehicles ----------------------------------------------------

  out.push_back(make(
      "lead_vehicle_brake", ScenarioCategory::SurroundingVehicle,
      "Lead vehicle halted in the ego lane accelerates away once the ego closes in.",
      {ego_at({{0, 0}, {220, 0}}, 20.0),
       dormant("lead", ActorClass::Vehicle, kVehicleRadius, {{20, 0}, {400, 0}},
               ValueSource::parameter("start_distance"))},
      {start_distance(), trigger_distance(), vehicle_velocity(), cloudiness()}));
  out.push_back(make(
      "cut_in", ScenarioCategory::SurroundingVehicle,
      "Vehicle in the adjacent lane merges into the ego lane ahead.",
      {ego_at({{0, 0}, {220, 0}}, 20.0),
       dormant("merging", ActorClass::Vehicle, kVehicleRadius,
               {{20, 3.5}, {100, 3.5}, {115, 0}, {400, 0}},
               ValueSource::parameter("start_distance"))},
      {start_distance(), trigger_distance(), vehicle_velocity(), cloudiness()}));
  out.push_back(make(
      "ramp_merge", ScenarioCategory::SurroundingVehicle,
      "Vehicle joins the ego lane from an access ramp.",
      {ego_before({{0, 0}, {200, 0}}, 100.0),
       dormant("ramp", ActorClass::Vehicle, kVehicleRadius, {{64, -12}, {100, 0}, {300, 0}})},
      {start_distance(), trigger_distance(), vehicle_velocity(), cloudiness()}));

  // Emergency evasion -------------------------------------------------------

  out.push_back(make(
      "sudden_pedestrian", ScenarioCategory::EmergencyEvasion,
      "Pedestrian steps out next to a parked car, very close to the ego lane.",
      {ego_before({{0, 0}, {160, 0}}, 80.0),
       fixed_obstacle("parked", kVehicleRadius, {{76, -3.5}, {77, -3.5}},
                      ValueSource::constant(0.0)),
       dormant("pedestrian", ActorClass::Pedestrian, kPedestrianRadius,
               {{80, -2.6}, {80, 6}})},
      {start_distance(), trigger_distance(), pedestrian_velocity(), cloudiness()}));
  out.push_back(make(
      "adjacent_loss_of_control", ScenarioCategory::EmergencyEvasion,
      "Vehicle in the adjacent lane loses control and veers across the ego lane.",
      {ego_at({{0, 0}, {200, 0}}, 0.0),
       dormant("swerving", ActorClass::Vehicle, kVehicleRadius,
               {{0, 3.5}, {80, 3.5}, {92, -4}, {140, -4}},
               ValueSource::parameter("start_distance"))},
      {start_distance(), trigger_distance(), vehicle_velocity(), cloudiness()}));
  out.push_back(make(
      "emergency_brake_after_merge", ScenarioCategory::EmergencyEvasion,
      "Vehicle merges in front of the ego and stops abruptly.",
      {ego_at({{0, 0}, {200, 0}}, 0.0),
       dormant("merging", ActorClass::Vehicle, kVehicleRadius,
               {{0, 3.5}, {60, 3.5}, {70, 0}, {80, 0}},
               ValueSource::parameter("start_distance"))},
      {start_distance(), trigger_distance(), vehicle_velocity(), cloudiness()}));

  return out;
}

std::vector<std::string> case_study_template_ids() {
  return {"ped_crossing", "side_street_crossing", "cut_in", "sudden_pedestrian"};
}

}  // namespace falsify
