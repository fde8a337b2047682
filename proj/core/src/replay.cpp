#include "falsify/replay.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <sstream>

#include "falsify/error.hpp"
#include "falsify/evaluation.hpp"
#include "falsify/simulation.hpp"
#include "json_util.hpp"

namespace falsify {

// ---------------------------------------------------------------------------
// Digests

namespace {

class ByteWriter {
 public:
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void str(const std::string& s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

void write_actor(ByteWriter& w, const ActorState& a) {
  w.str(a.actor_id);
  w.f64(a.position.x);
  w.f64(a.position.y);
  w.f64(a.heading);
  w.f64(a.speed);
  w.f64(a.route_progress);
  w.u8(a.triggered ? 1 : 0);
  w.f64(a.radius);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos) {
    throw Error(ErrorCode::ParseError, "bad digest '" + s + "'");
  }
  return std::stoull(s, nullptr, 16);
}

}  // namespace

std::vector<std::uint8_t> canonical_bytes(const WorldState& world) {
  ByteWriter w;
  w.i64(world.step_index);
  w.f64(world.time);
  w.f64(world.visibility);
  w.u64(1 + world.others.size());
  write_actor(w, world.ego);
  for (const auto& o : world.others) write_actor(w, o);
  return w.take();
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t frame_digest(const WorldState& world) { return fnv1a64(canonical_bytes(world)); }

std::uint64_t config_digest(const ScenarioConfig& config) {
  const std::string text = to_json(config);
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string build_id() {
#if defined(__clang__)
  return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  return std::string("gcc ") + __VERSION__;
#else
  return "unknown";
#endif
}

// ---------------------------------------------------------------------------
// Log files

ReplayLog make_replay_log(const Trace& trace, const ControllerSpec& controller,
                          bool embed_frames) {
  ReplayLog log;
  log.build = build_id();
  log.config = trace.config;
  log.config_digest = config_digest(trace.config);
  log.controller = controller;
  log.step_size = trace.step_size;
  log.outcome = trace.outcome;
  log.frame_digests.reserve(trace.frames.size());
  for (const auto& f : trace.frames) log.frame_digests.push_back(frame_digest(f));
  if (embed_frames) log.frames = trace.frames;
  return log;
}

namespace {

using detail::json;

json actor_to_json(const ActorState& a) {
  return {{"actor_id", a.actor_id}, {"x", a.position.x},         {"y", a.position.y},
          {"heading", a.heading},   {"speed", a.speed},          {"route_progress", a.route_progress},
          {"triggered", a.triggered}, {"radius", a.radius}};
}

ActorState actor_from_json(const json& j) {
  ActorState a;
  a.actor_id = j.at("actor_id").get<std::string>();
  a.position = {j.at("x").get<double>(), j.at("y").get<double>()};
  a.heading = j.at("heading").get<double>();
  a.speed = j.at("speed").get<double>();
  a.route_progress = j.at("route_progress").get<double>();
  a.triggered = j.at("triggered").get<bool>();
  a.radius = j.at("radius").get<double>();
  return a;
}

json frame_to_json(const WorldState& w) {
  json others = json::array();
  for (const auto& o : w.others) others.push_back(actor_to_json(o));
  return {{"step_index", w.step_index},
          {"time", w.time},
          {"visibility", w.visibility},
          {"ego", actor_to_json(w.ego)},
          {"others", std::move(others)}};
}

WorldState frame_from_json(const json& j) {
  WorldState w;
  w.step_index = j.at("step_index").get<std::int64_t>();
  w.time = j.at("time").get<double>();
  w.visibility = j.at("visibility").get<double>();
  w.ego = actor_from_json(j.at("ego"));
  for (const auto& o : j.at("others")) w.others.push_back(actor_from_json(o));
  return w;
}

}  // namespace

std::string to_json(const ReplayLog& log) {
  json digests = json::array();
  for (auto d : log.frame_digests) digests.push_back(hex64(d));
  json j{{"schema_version", log.schema_version},
         {"build", log.build},
         {"config", json::parse(to_json(log.config))},
         {"config_digest", hex64(log.config_digest)},
         {"controller", {{"name", log.controller.name}, {"parameters", log.controller.parameters}}},
         {"step_size", log.step_size},
         {"outcome", to_string(log.outcome)},
         {"frame_digests", std::move(digests)}};
  if (log.frames) {
    json frames = json::array();
    for (const auto& f : *log.frames) frames.push_back(frame_to_json(f));
    j["frames"] = std::move(frames);
  }
  return detail::dump(j);
}

ReplayLog replay_log_from_json(std::string_view text) {
  const json j = detail::parse_json(text, "replay log");
  return detail::with_parse_errors("replay log", [&] {
    ReplayLog log;
    log.schema_version = j.at("schema_version").get<int>();
    if (log.schema_version != kReplaySchemaVersion) {
      throw Error(ErrorCode::ParseError,
                  "unsupported replay schema_version " + std::to_string(log.schema_version));
    }
    log.build = j.value("build", "");
    log.config = config_from_json(j.at("config").dump());
    log.config_digest = parse_hex64(j.at("config_digest").get<std::string>());
    log.controller.name = j.at("controller").at("name").get<std::string>();
    log.controller.parameters =
        j.at("controller").at("parameters").get<std::map<std::string, double>>();
    log.step_size = j.at("step_size").get<double>();
    log.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    for (const auto& d : j.at("frame_digests")) {
      log.frame_digests.push_back(parse_hex64(d.get<std::string>()));
    }
    if (j.contains("frames")) {
      std::vector<WorldState> frames;
      for (const auto& f : j.at("frames")) frames.push_back(frame_from_json(f));
      log.frames = std::move(frames);
    }
    return log;
  });
}

void write_log(const ReplayLog& log, const std::string& path) {
  detail::write_file(path, to_json(log));
}

void write_log(const Trace& trace, const ControllerSpec& controller, const std::string& path,
               bool embed_frames) {
  write_log(make_replay_log(trace, controller, embed_frames), path);
}

ReplayLog read_log(const std::string& path) {
  return replay_log_from_json(detail::read_file(path));
}

// ---------------------------------------------------------------------------
// Verification

std::string describe(const ReplayVerdict& v) {
  if (v.matched()) return "Match";
  std::ostringstream ss;
  ss << "Mismatch at frame " << v.frame;
  switch (v.reason) {
    case ReplayVerdict::Reason::FrameDigest: ss << " (frame digest)"; break;
    case ReplayVerdict::Reason::FrameCount: ss << " (frame count)"; break;
    case ReplayVerdict::Reason::Outcome: ss << " (outcome)"; break;
    case ReplayVerdict::Reason::Config: ss << " (config digest)"; break;
    case ReplayVerdict::Reason::None: break;
  }
  if (!v.detail.empty()) ss << ": " << v.detail;
  return ss.str();
}

ReplayResult replay(const ReplayLog& log, const ScenarioLibrary& library,
                    const ControllerRegistry& registry) {
  const auto& entry = registry.get(log.controller.name);
  const auto& tmpl = library.get_template(log.config.template_id);
  ReplayResult out;
  out.trace = run_simulation(tmpl, log.config, log.controller, entry.decide, log.step_size);

  const auto& frames = out.trace.frames;
  const std::size_t common = std::min(frames.size(), log.frame_digests.size());
  ReplayVerdict& v = out.verdict;
  for (std::size_t k = 0; k < common; ++k) {
    const auto d = frame_digest(frames[k]);
    if (d != log.frame_digests[k]) {
      v = {ReplayVerdict::Kind::Mismatch, ReplayVerdict::Reason::FrameDigest, k,
           "recorded " + hex64(log.frame_digests[k]) + ", replayed " + hex64(d)};
      return out;
    }
  }
  if (frames.size() != log.frame_digests.size()) {
    v = {ReplayVerdict::Kind::Mismatch, ReplayVerdict::Reason::FrameCount, common,
         "recorded " + std::to_string(log.frame_digests.size()) + " frames, replayed " +
             std::to_string(frames.size())};
    return out;
  }
  if (out.trace.outcome != log.outcome) {
    v = {ReplayVerdict::Kind::Mismatch, ReplayVerdict::Reason::Outcome,
         frames.empty() ? 0 : frames.size() - 1,
         "recorded " + std::string(to_string(log.outcome)) + ", replayed " +
             std::string(to_string(out.trace.outcome))};
    return out;
  }
  // The trajectory can be insensitive to a config edit (e.g. a speed for an actor whose
  // trigger never fires); the recorded config digest still catches it.
  const auto cd = config_digest(log.config);
  if (cd != log.config_digest) {
    v = {ReplayVerdict::Kind::Mismatch, ReplayVerdict::Reason::Config, 0,
         "recorded " + hex64(log.config_digest) + ", config hashes to " + hex64(cd)};
    return out;
  }
  v = {};
  return out;
}

ReplayVerdict verify_replay(const ReplayLog& log, const ScenarioLibrary& library,
                            const ControllerRegistry& registry) {
  return replay(log, library, registry).verdict;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

constexpr double kPixelsPerMeter = 4.0;
constexpr double kMargin = 5.0;  // m

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* actor_color(std::size_t index) {
  static constexpr const char* kPalette[] = {"#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                             "#8c564b", "#e377c2", "#17becf"};
  return kPalette[index % (sizeof kPalette / sizeof kPalette[0])];
}

}  // namespace

std::string render_svg(const Trace& trace, const ScenarioTemplate& tmpl) {
  if (trace.frames.empty()) throw Error(ErrorCode::FramesUnavailable, "trace has no frames");

  // Scene order: ego first, then template order, matching the frame layout.
  std::vector<const ActorSpec*> actors{&tmpl.ego()};
  for (const auto& a : tmpl.actors) {
    if (a.actor_class != ActorClass::Ego) actors.push_back(&a);
  }

  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  auto extend = [&](Vec2 p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  };
  for (const auto* a : actors) {
    for (auto w : a->route) extend(w);
  }
  for (const auto& f : trace.frames) {
    extend(f.ego.position);
    for (const auto& o : f.others) extend(o.position);
  }
  min_x -= kMargin;
  min_y -= kMargin;
  max_x += kMargin;
  max_y += kMargin;
  const double width = (max_x - min_x) * kPixelsPerMeter;
  const double height = (max_y - min_y) * kPixelsPerMeter;
  auto px = [&](Vec2 p) {
    return num((p.x - min_x) * kPixelsPerMeter) + "," + num((max_y - p.y) * kPixelsPerMeter);
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"#ffffff\"/>\n";

  svg << "<g id=\"routes\" fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"1\" "
         "stroke-dasharray=\"4 3\">\n";
  for (const auto* a : actors) {
    svg << "<polyline data-actor=\"" << escape(a->actor_id) << "\" points=\"";
    for (std::size_t i = 0; i < a->route.size(); ++i) svg << (i ? " " : "") << px(a->route[i]);
    svg << "\"/>\n";
  }
  svg << "</g>\n";

  svg << "<g id=\"trajectories\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (std::size_t k = 0; k < actors.size(); ++k) {
    svg << "<polyline data-actor=\"" << escape(actors[k]->actor_id) << "\" stroke=\""
        << (k == 0 ? "#1f77b4" : actor_color(k - 1)) << "\" points=\"";
    for (std::size_t i = 0; i < trace.frames.size(); ++i) {
      const auto& f = trace.frames[i];
      const Vec2 p = k == 0 ? f.ego.position : f.others[k - 1].position;
      svg << (i ? " " : "") << px(p);
    }
    svg << "\"/>\n";
  }
  svg << "</g>\n";

  std::string caption = tmpl.template_id + " | " + std::string(to_string(trace.outcome));
  if (!trace.frames.front().others.empty()) {
    const EvaluationResult eval = evaluate(trace);
    std::size_t at = 0;
    for (std::size_t i = 0; i < trace.frames.size(); ++i) {
      if (trace.frames[i].time == eval.time_of_min) {
        at = i;
        break;
      }
    }
    const auto& f = trace.frames[at];
    svg << "<g id=\"footprints\" fill-opacity=\"0.3\" stroke-width=\"1\" data-time=\""
        << num(f.time) << "\">\n";
    auto circle = [&](const ActorState& a, const char* color) {
      svg << "<circle data-actor=\"" << escape(a.actor_id) << "\" cx=\""
          << num((a.position.x - min_x) * kPixelsPerMeter) << "\" cy=\""
          << num((max_y - a.position.y) * kPixelsPerMeter) << "\" r=\""
          << num(a.radius * kPixelsPerMeter) << "\" fill=\"" << color << "\" stroke=\"" << color
          << "\"/>\n";
    };
    circle(f.ego, "#1f77b4");
    for (std::size_t i = 0; i < f.others.size(); ++i) circle(f.others[i], actor_color(i));
    svg << "</g>\n";
    caption += " | min distance " + num(eval.min_distance) + " m at t=" + num(eval.time_of_min) + " s";

    if (trace.outcome == Outcome::Collision) {
      const auto& last = trace.frames.back();
      if (const auto pair = detect_collision(last)) {
        auto find = [&](const std::string& id) -> const ActorState& {
          if (last.ego.actor_id == id) return last.ego;
          return *std::find_if(last.others.begin(), last.others.end(),
                               [&](const ActorState& a) { return a.actor_id == id; });
        };
        const ActorState& a = find(pair->first);
        const ActorState& b = find(pair->second);
        // Point on the segment between centres, weighted by radius.
        const double t = a.radius / (a.radius + b.radius);
        const Vec2 c = a.position + t * (b.position - a.position);
        const double cx = (c.x - min_x) * kPixelsPerMeter;
        const double cy = (max_y - c.y) * kPixelsPerMeter;
        const double s = 6.0;
        svg << "<g id=\"collision\" stroke=\"#000000\" stroke-width=\"2\" data-time=\""
            << num(last.time) << "\">\n";
        svg << "<line x1=\"" << num(cx - s) << "\" y1=\"" << num(cy - s) << "\" x2=\""
            << num(cx + s) << "\" y2=\"" << num(cy + s) << "\"/>\n";
        svg << "<line x1=\"" << num(cx - s) << "\" y1=\"" << num(cy + s) << "\" x2=\""
            << num(cx + s) << "\" y2=\"" << num(cy - s) << "\"/>\n";
        svg << "</g>\n";
      }
    }
  }
  svg << "<text x=\"4\" y=\"14\" font-family=\"monospace\" font-size=\"12\">" << escape(caption)
      << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void render_trace(const Trace& trace, const ScenarioTemplate& tmpl,
                  const std::string& output_path) {
  detail::write_file(output_path, render_svg(trace, tmpl));
}

void render_trace(const ReplayLog& log, const ScenarioLibrary& library,
                  const ControllerRegistry& registry, const std::string& output_path) {
  const auto& tmpl = library.get_template(log.config.template_id);
  if (log.frames) {
    Trace trace{log.config, log.step_size, *log.frames, log.outcome};
    render_trace(trace, tmpl, output_path);
    return;
  }
  if (!registry.contains(log.controller.name)) {
    throw Error(ErrorCode::FramesUnavailable,
                "no embedded frames and controller '" + log.controller.name + "' is not registered");
  }
  ReplayResult r = replay(log, library, registry);
  if (!r.verdict.matched()) {
    throw Error(ErrorCode::FramesUnavailable,
                "no embedded frames and replay did not verify: " + describe(r.verdict));
  }
  render_trace(r.trace, tmpl, output_path);
}

}  // namespace falsify
