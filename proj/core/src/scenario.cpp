#include "falsify/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "falsify/error.hpp"
#include "json_util.hpp"

namespace falsify {

namespace {

constexpr double kStepTolerance = 1e-9;

bool on_lattice(double value, double lower, double step) {
  const double k = (value - lower) / step;
  return std::abs(k - std::round(k)) <= kStepTolerance * std::max(1.0, std::abs(k));
}

std::string join(const std::vector<Violation>& violations) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) ss << "; ";
    ss << violations[i].describe();
  }
  return ss.str();
}

}  // namespace

std::string_view to_string(ScenarioCategory category) {
  switch (category) {
    case ScenarioCategory::ObstacleRecognition: return "ObstacleRecognition";
    case ScenarioCategory::IntersectionEncounter: return "IntersectionEncounter";
    case ScenarioCategory::PedestrianNonMotorized: return "PedestrianNonMotorized";
    case ScenarioCategory::SurroundingVehicle: return "SurroundingVehicle";
    case ScenarioCategory::EmergencyEvasion: return "EmergencyEvasion";
  }
  return "";
}

std::optional<ScenarioCategory> category_from_string(std::string_view name) {
  for (auto c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(ActorClass cls) {
  switch (cls) {
    case ActorClass::Ego: return "ego";
    case ActorClass::Vehicle: return "vehicle";
    case ActorClass::Pedestrian: return "pedestrian";
    case ActorClass::Bicycle: return "bicycle";
    case ActorClass::StaticObstacle: return "static_obstacle";
  }
  return "";
}

std::optional<ActorClass> actor_class_from_string(std::string_view name) {
  for (auto c : {ActorClass::Ego, ActorClass::Vehicle, ActorClass::Pedestrian,
                 ActorClass::Bicycle, ActorClass::StaticObstacle}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::int64_t ParameterSpec::lattice_steps() const {
  if (kind != ParameterKind::Stepped || step <= 0.0) return 0;
  return std::llround((upper - lower) / step);
}

double ValueSource::resolve(const Bindings& bindings) const {
  if (!param) return bias;
  const auto it = bindings.find(*param);
  if (it == bindings.end()) {
    throw Error(ErrorCode::InvalidBindings, "parameter '" + *param + "' is not bound");
  }
  return bias + scale * it->second;
}

const ParameterSpec* ScenarioTemplate::find_parameter(std::string_view name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const ActorSpec& ScenarioTemplate::ego() const {
  for (const auto& a : actors) {
    if (a.actor_class == ActorClass::Ego) return a;
  }
  throw Error(ErrorCode::InvalidTemplate, template_id + ": no ego actor");
}

std::string Violation::describe() const {
  std::ostringstream ss;
  ss.precision(17);
  switch (kind) {
    case Kind::OutOfRange:
      ss << "OutOfRange(" << name << ", " << value << ", " << lower << ", " << upper << ")";
      break;
    case Kind::Missing: ss << "Missing(" << name << ")"; break;
    case Kind::Extra: ss << "Extra(" << name << ")"; break;
    case Kind::OffStep: ss << "OffStep(" << name << ", " << value << ")"; break;
    case Kind::NonFinite: ss << "NonFinite(" << name << ")"; break;
  }
  return ss.str();
}

void validate_template(const ScenarioTemplate& tmpl) {
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::InvalidTemplate, tmpl.template_id + ": " + msg);
  };
  if (tmpl.template_id.empty()) fail("empty template_id");
  if (!(tmpl.horizon > 0.0) || !std::isfinite(tmpl.horizon)) fail("horizon must be positive");

  std::set<std::string> names;
  for (const auto& p : tmpl.parameters) {
    if (p.name.empty()) fail("parameter with empty name");
    if (!names.insert(p.name).second) fail("duplicate parameter '" + p.name + "'");
    if (!std::isfinite(p.lower) || !std::isfinite(p.upper)) fail(p.name + ": non-finite range");
    if (p.lower > p.upper) fail(p.name + ": lower > upper");
    if (p.kind == ParameterKind::Stepped) {
      if (!(p.step > 0.0)) fail(p.name + ": step must be positive");
      if (!on_lattice(p.upper, p.lower, p.step)) {
        fail(p.name + ": range is not a multiple of step");
      }
    }
  }

  auto check_ref = [&](const ValueSource& v, const std::string& where) {
    if (v.param && !names.contains(*v.param)) {
      fail(where + " references unknown parameter '" + *v.param + "'");
    }
    if (!std::isfinite(v.scale) || !std::isfinite(v.bias)) fail(where + ": non-finite value");
  };

  std::set<std::string> ids;
  int egos = 0;
  for (const auto& a : tmpl.actors) {
    if (a.actor_id.empty()) fail("actor with empty id");
    if (!ids.insert(a.actor_id).second) fail("duplicate actor '" + a.actor_id + "'");
    if (a.actor_class == ActorClass::Ego) ++egos;
    if (!(a.footprint > 0.0)) fail(a.actor_id + ": footprint radius must be positive");
    try {
      Polyline route(a.route);
    } catch (const Error& e) {
      fail(a.actor_id + ": " + e.what());
    }
    check_ref(a.initial_offset, a.actor_id + ".initial_offset");
    check_ref(a.speed, a.actor_id + ".speed");
    if (a.trigger) {
      if (a.actor_class == ActorClass::Ego) fail("the ego cannot carry a trigger");
      if (a.trigger->metric != "euclidean") fail(a.actor_id + ": unsupported trigger metric");
      check_ref(a.trigger->trigger_distance, a.actor_id + ".trigger.trigger_distance");
      if (a.trigger->trigger_distance.is_constant() && !(a.trigger->trigger_distance.bias > 0.0)) {
        fail(a.actor_id + ": trigger distance must be positive");
      }
      if (a.trigger->trigger_distance.param) {
        const auto* p = tmpl.find_parameter(*a.trigger->trigger_distance.param);
        const auto& v = a.trigger->trigger_distance;
        if (!(std::min(v.bias + v.scale * p->lower, v.bias + v.scale * p->upper) > 0.0)) {
          fail(a.actor_id + ": trigger distance range must be positive");
        }
      }
    }
  }
  if (egos != 1) fail("exactly one ego actor required");
  for (const auto& a : tmpl.actors) {
    if (a.trigger && !ids.contains(a.trigger->reference_actor)) {
      fail(a.actor_id + ": trigger references unknown actor '" + a.trigger->reference_actor + "'");
    }
    if (a.trigger && a.trigger->reference_actor == a.actor_id) {
      fail(a.actor_id + ": trigger cannot reference itself");
    }
  }
  for (const auto& w : tmpl.weather_parameters) {
    if (!names.contains(w)) fail("weather parameter '" + w + "' is not a parameter");
  }
}

std::vector<Violation> validate_bindings(const ScenarioTemplate& tmpl, const Bindings& bindings) {
  std::vector<Violation> out;
  for (const auto& p : tmpl.parameters) {
    const auto it = bindings.find(p.name);
    if (it == bindings.end()) {
      out.push_back({Violation::Kind::Missing, p.name, 0.0, p.lower, p.upper});
      continue;
    }
    const double v = it->second;
    if (!std::isfinite(v)) {
      out.push_back({Violation::Kind::NonFinite, p.name, v, p.lower, p.upper});
    } else if (v < p.lower || v > p.upper) {
      out.push_back({Violation::Kind::OutOfRange, p.name, v, p.lower, p.upper});
    } else if (p.kind == ParameterKind::Stepped && !on_lattice(v, p.lower, p.step)) {
      out.push_back({Violation::Kind::OffStep, p.name, v, p.lower, p.upper});
    }
  }
  for (const auto& [name, value] : bindings) {
    if (!tmpl.find_parameter(name)) {
      out.push_back({Violation::Kind::Extra, name, value, 0.0, 0.0});
    }
  }
  return out;
}

ScenarioConfig instantiate(const ScenarioTemplate& tmpl, const Bindings& bindings,
                           std::uint64_t seed) {
  auto violations = validate_bindings(tmpl, bindings);
  if (!violations.empty()) {
    throw Error(ErrorCode::InvalidBindings, tmpl.template_id + ": " + join(violations));
  }
  return ScenarioConfig{tmpl.template_id, bindings, seed, kConfigSchemaVersion};
}

double visibility_from_cloudiness(double cloudiness_percent) {
  return kVisibilityClear -
         (cloudiness_percent / 100.0) * (kVisibilityClear - kVisibilityOvercast);
}

double visibility_for(const ScenarioTemplate& tmpl, const Bindings& bindings) {
  const bool has_cloud = std::find(tmpl.weather_parameters.begin(), tmpl.weather_parameters.end(),
                                   "cloudiness") != tmpl.weather_parameters.end();
  if (!has_cloud) return kVisibilityClear;
  const auto it = bindings.find("cloudiness");
  if (it == bindings.end()) {
    throw Error(ErrorCode::InvalidBindings, "parameter 'cloudiness' is not bound");
  }
  return visibility_from_cloudiness(it->second);
}

// ---------------------------------------------------------------------------
// Library

ScenarioLibrary ScenarioLibrary::with_builtins() {
  ScenarioLibrary lib;
  for (auto& t : builtin_templates()) lib.register_template(std::move(t));
  return lib;
}

void ScenarioLibrary::register_template(ScenarioTemplate tmpl) {
  validate_template(tmpl);
  if (templates_.contains(tmpl.template_id)) {
    throw Error(ErrorCode::DuplicateName, "template '" + tmpl.template_id + "' already registered");
  }
  auto id = tmpl.template_id;
  templates_.emplace(std::move(id), std::make_shared<const ScenarioTemplate>(std::move(tmpl)));
}

void ScenarioLibrary::register_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::IoFailure, dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) register_template(load_template_file(f.string()));
}

std::vector<TemplateEntry> ScenarioLibrary::list_templates() const {
  std::vector<TemplateEntry> out;
  out.reserve(templates_.size());
  for (const auto& [id, t] : templates_) out.push_back({id, t->category});
  return out;
}

const ScenarioTemplate& ScenarioLibrary::get_template(std::string_view template_id) const {
  const auto it = templates_.find(template_id);
  if (it == templates_.end()) {
    throw Error(ErrorCode::UnknownTemplate, std::string(template_id));
  }
  return *it->second;
}

bool ScenarioLibrary::contains(std::string_view template_id) const {
  return templates_.find(template_id) != templates_.end();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using detail::json;

json value_to_json(const ValueSource& v) {
  if (v.is_constant()) return v.bias;
  json j{{"param", *v.param}};
  if (v.scale != 1.0) j["scale"] = v.scale;
  if (v.bias != 0.0) j["bias"] = v.bias;
  return j;
}

ValueSource value_from_json(const json& j) {
  if (j.is_number()) return ValueSource::constant(j.get<double>());
  ValueSource v;
  v.param = j.at("param").get<std::string>();
  v.scale = j.value("scale", 1.0);
  v.bias = j.value("bias", 0.0);
  return v;
}

std::string_view kind_name(ParameterKind k) {
  return k == ParameterKind::Stepped ? "integer-stepped" : "continuous";
}

}  // namespace

std::string to_json(const ScenarioTemplate& tmpl) {
  json params = json::array();
  for (const auto& p : tmpl.parameters) {
    json jp{{"name", p.name},
            {"unit", p.unit},
            {"lower", p.lower},
            {"upper", p.upper},
            {"kind", kind_name(p.kind)}};
    if (p.kind == ParameterKind::Stepped) jp["step"] = p.step;
    params.push_back(std::move(jp));
  }
  json actors = json::array();
  for (const auto& a : tmpl.actors) {
    json route = json::array();
    for (const auto& w : a.route) route.push_back({w.x, w.y});
    json ja{{"actor_id", a.actor_id},
            {"actor_class", to_string(a.actor_class)},
            {"footprint", a.footprint},
            {"route", std::move(route)},
            {"initial_offset", value_to_json(a.initial_offset)},
            {"speed", value_to_json(a.speed)}};
    if (a.trigger) {
      ja["trigger"] = {{"reference_actor", a.trigger->reference_actor},
                       {"trigger_distance", value_to_json(a.trigger->trigger_distance)},
                       {"metric", a.trigger->metric}};
    }
    actors.push_back(std::move(ja));
  }
  json j{{"template_id", tmpl.template_id},
         {"category", to_string(tmpl.category)},
         {"description", tmpl.description},
         {"actors", std::move(actors)},
         {"parameters", std::move(params)},
         {"weather_parameters", tmpl.weather_parameters},
         {"horizon", tmpl.horizon},
         {"terminators",
          {{"collision", tmpl.terminators.collision},
           {"route_completed", tmpl.terminators.route_completed},
           {"timeout", true}}}};
  return detail::dump(j);
}

ScenarioTemplate template_from_json(std::string_view text) {
  const json j = detail::parse_json(text, "template");
  return detail::with_parse_errors("template", [&] {
    ScenarioTemplate t;
    t.template_id = j.at("template_id").get<std::string>();
    const auto cat = category_from_string(j.at("category").get<std::string>());
    if (!cat) throw Error(ErrorCode::ParseError, t.template_id + ": unknown category");
    t.category = *cat;
    t.description = j.value("description", "");
    t.horizon = j.at("horizon").get<double>();
    for (const auto& jp : j.at("parameters")) {
      ParameterSpec p;
      p.name = jp.at("name").get<std::string>();
      p.unit = jp.value("unit", "");
      p.lower = jp.at("lower").get<double>();
      p.upper = jp.at("upper").get<double>();
      const auto kind = jp.value("kind", std::string("continuous"));
      if (kind == "integer-stepped") {
        p.kind = ParameterKind::Stepped;
        p.step = jp.at("step").get<double>();
      } else if (kind != "continuous") {
        throw Error(ErrorCode::ParseError, p.name + ": unknown parameter kind '" + kind + "'");
      }
      t.parameters.push_back(std::move(p));
    }
    t.weather_parameters = j.value("weather_parameters", std::vector<std::string>{});
    for (const auto& ja : j.at("actors")) {
      ActorSpec a;
      a.actor_id = ja.at("actor_id").get<std::string>();
      const auto cls = actor_class_from_string(ja.at("actor_class").get<std::string>());
      if (!cls) throw Error(ErrorCode::ParseError, a.actor_id + ": unknown actor_class");
      a.actor_class = *cls;
      a.footprint = ja.at("footprint").get<double>();
      for (const auto& w : ja.at("route")) a.route.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
      if (ja.contains("initial_offset")) a.initial_offset = value_from_json(ja.at("initial_offset"));
      if (ja.contains("speed")) a.speed = value_from_json(ja.at("speed"));
      if (ja.contains("trigger") && !ja.at("trigger").is_null()) {
        const auto& jt = ja.at("trigger");
        TriggerRule r;
        r.reference_actor = jt.value("reference_actor", std::string("ego"));
        r.trigger_distance = value_from_json(jt.at("trigger_distance"));
        r.metric = jt.value("metric", std::string("euclidean"));
        a.trigger = std::move(r);
      }
      t.actors.push_back(std::move(a));
    }
    if (j.contains("terminators")) {
      const auto& jt = j.at("terminators");
      t.terminators.collision = jt.value("collision", true);
      t.terminators.route_completed = jt.value("route_completed", true);
    }
    return t;
  });
}

std::string to_json(const ScenarioConfig& config) {
  json j{{"template_id", config.template_id},
         {"bindings", config.bindings},
         {"seed", config.seed},
         {"schema_version", config.schema_version}};
  return detail::dump(j);
}

ScenarioConfig config_from_json(std::string_view text) {
  const json j = detail::parse_json(text, "config");
  return detail::with_parse_errors("config", [&] {
    ScenarioConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != kConfigSchemaVersion) {
      throw Error(ErrorCode::ParseError,
                  "unsupported config schema_version " + std::to_string(c.schema_version));
    }
    c.template_id = j.at("template_id").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.bindings = j.at("bindings").get<Bindings>();
    return c;
  });
}

ScenarioTemplate load_template_file(const std::string& path) {
  return template_from_json(detail::read_file(path));
}

ScenarioConfig load_config_file(const std::string& path) {
  return config_from_json(detail::read_file(path));
}

void save_config_file(const ScenarioConfig& config, const std::string& path) {
  detail::write_file(path, to_json(config));
}

}  // namespace falsify
