#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "falsify/geometry.hpp"

namespace falsify {

enum class ScenarioCategory {
  ObstacleRecognition,
  IntersectionEncounter,
  PedestrianNonMotorized,
  SurroundingVehicle,
  EmergencyEvasion,
};

inline constexpr ScenarioCategory kAllCategories[] = {
    ScenarioCategory::ObstacleRecognition,    ScenarioCategory::IntersectionEncounter,
    ScenarioCategory::PedestrianNonMotorized, ScenarioCategory::SurroundingVehicle,
    ScenarioCategory::EmergencyEvasion,
};

std::string_view to_string(ScenarioCategory category);
std::optional<ScenarioCategory> category_from_string(std::string_view name);

enum class ParameterKind { Continuous, Stepped };

struct ParameterSpec {
  std::string name;
  std::string unit;
  double lower = 0.0;
  double upper = 0.0;
  ParameterKind kind = ParameterKind::Continuous;
  // Only meaningful for Stepped.
  double step = 0.0;

  // Number of lattice points minus one for Stepped specs.
  std::int64_t lattice_steps() const;

  friend bool operator==(const ParameterSpec&, const ParameterSpec&) = default;
};

using Bindings = std::map<std::string, double>;

// A scalar in a template that is either a constant or an affine function of one
// parameter: bias + scale * bindings[param].
struct ValueSource {
  std::optional<std::string> param;
  double scale = 1.0;
  double bias = 0.0;

  static ValueSource constant(double v) { return {std::nullopt, 1.0, v}; }
  static ValueSource parameter(std::string name, double scale = 1.0, double bias = 0.0) {
    return {std::move(name), scale, bias};
  }

  bool is_constant() const { return !param.has_value(); }
  // Throws InvalidBindings when the referenced parameter is unbound.
  double resolve(const Bindings& bindings) const;

  friend bool operator==(const ValueSource&, const ValueSource&) = default;
};

enum class ActorClass { Ego, Vehicle, Pedestrian, Bicycle, StaticObstacle };

std::string_view to_string(ActorClass cls);
std::optional<ActorClass> actor_class_from_string(std::string_view name);

struct TriggerRule {
  std::string reference_actor = "ego";
  ValueSource trigger_distance;
  // Only "euclidean" is defined.
  std::string metric = "euclidean";

  friend bool operator==(const TriggerRule&, const TriggerRule&) = default;
};

struct ActorSpec {
  std::string actor_id;
  ActorClass actor_class = ActorClass::Vehicle;
  double footprint = 1.0;  // disc radius, m
  std::vector<Vec2> route;
  ValueSource initial_offset = ValueSource::constant(0.0);
  // For the ego this is the initial speed; for other actors the cruise speed they
  // hold while moving.
  ValueSource speed = ValueSource::constant(0.0);
  std::optional<TriggerRule> trigger;

  friend bool operator==(const ActorSpec&, const ActorSpec&) = default;
};

struct Terminators {
  bool collision = true;
  bool route_completed = true;
  // Timeout is always at the template horizon.

  friend bool operator==(const Terminators&, const Terminators&) = default;
};

struct ScenarioTemplate {
  std::string template_id;
  ScenarioCategory category = ScenarioCategory::ObstacleRecognition;
  std::string description;
  std::vector<ActorSpec> actors;
  std::vector<ParameterSpec> parameters;
  // Names from `parameters` that are environmental. "cloudiness" drives visibility.
  std::vector<std::string> weather_parameters;
  double horizon = 20.0;  // s
  Terminators terminators;

  const ParameterSpec* find_parameter(std::string_view name) const;
  const ActorSpec& ego() const;

  friend bool operator==(const ScenarioTemplate&, const ScenarioTemplate&) = default;
};

inline constexpr int kConfigSchemaVersion = 1;

struct ScenarioConfig {
  std::string template_id;
  Bindings bindings;
  std::uint64_t seed = 0;
  int schema_version = kConfigSchemaVersion;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct Violation {
  enum class Kind { OutOfRange, Missing, Extra, OffStep, NonFinite };
  Kind kind;
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  std::string describe() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

// Throws InvalidTemplate listing the first broken structural invariant.
void validate_template(const ScenarioTemplate& tmpl);

// Every problem with a binding set; empty means the bindings are acceptable.
std::vector<Violation> validate_bindings(const ScenarioTemplate& tmpl, const Bindings& bindings);

// Pure; throws InvalidBindings when validate_bindings reports anything.
ScenarioConfig instantiate(const ScenarioTemplate& tmpl, const Bindings& bindings,
                           std::uint64_t seed);

// Linear cloudiness-to-visibility map used by the simulator.
inline constexpr double kVisibilityClear = 60.0;  // m
inline constexpr double kVisibilityOvercast = 15.0;
double visibility_from_cloudiness(double cloudiness_percent);
// Visibility implied by a config: clear when the template has no cloudiness parameter.
double visibility_for(const ScenarioTemplate& tmpl, const Bindings& bindings);

struct TemplateEntry {
  std::string template_id;
  ScenarioCategory category;
};

// Read-mostly registry. After registration it may be shared across threads for reads.
class ScenarioLibrary {
 public:
  ScenarioLibrary() = default;

  static ScenarioLibrary with_builtins();

  // Throws DuplicateName or InvalidTemplate.
  void register_template(ScenarioTemplate tmpl);
  // Loads every *.json file in a directory (non-recursive, sorted by file name).
  void register_directory(const std::string& dir);

  std::vector<TemplateEntry> list_templates() const;
  // Throws UnknownTemplate.
  const ScenarioTemplate& get_template(std::string_view template_id) const;
  bool contains(std::string_view template_id) const;

 private:
  std::map<std::string, std::shared_ptr<const ScenarioTemplate>, std::less<>> templates_;
};

std::vector<ScenarioTemplate> builtin_templates();

// The four templates used for the GA-versus-uniform comparison.
std::vector<std::string> case_study_template_ids();

// JSON round-tripping. Config output has sorted keys and shortest round-trip floats.
std::string to_json(const ScenarioTemplate& tmpl);
std::string to_json(const ScenarioConfig& config);
ScenarioTemplate template_from_json(std::string_view text);
ScenarioConfig config_from_json(std::string_view text);

ScenarioTemplate load_template_file(const std::string& path);
ScenarioConfig load_config_file(const std::string& path);
void save_config_file(const ScenarioConfig& config, const std::string& path);

}  // namespace falsify
