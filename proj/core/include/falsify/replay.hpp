#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "falsify/controller.hpp"
#include "falsify/scenario.hpp"
#include "falsify/world.hpp"

namespace falsify {

inline constexpr int kReplaySchemaVersion = 1;
inline constexpr const char* kReplayExtension = ".replay.json";

// Frame digest: 64-bit FNV-1a over the canonical byte serialization of a WorldState.
// Canonical form, all integers and IEEE-754 doubles little-endian:
//   i64 step_index, f64 time, f64 visibility, u64 actor count (ego + others),
//   then for the ego followed by each other actor in order:
//     u64 id length, id bytes, f64 x, f64 y, f64 heading, f64 speed,
//     f64 route_progress, u8 triggered, f64 radius
std::vector<std::uint8_t> canonical_bytes(const WorldState& world);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t frame_digest(const WorldState& world);
// FNV-1a of the config's canonical JSON text.
std::uint64_t config_digest(const ScenarioConfig& config);

// Identifies the toolchain that produced a log. Bit-exact replay holds within a build.
std::string build_id();

struct ReplayLog {
  int schema_version = kReplaySchemaVersion;
  std::string build;
  ScenarioConfig config;
  std::uint64_t config_digest = 0;
  ControllerSpec controller;
  double step_size = 0.05;
  std::vector<std::uint64_t> frame_digests;
  std::optional<std::vector<WorldState>> frames;
  Outcome outcome = Outcome::Timeout;

  friend bool operator==(const ReplayLog&, const ReplayLog&) = default;
};

ReplayLog make_replay_log(const Trace& trace, const ControllerSpec& controller,
                          bool embed_frames);

std::string to_json(const ReplayLog& log);
ReplayLog replay_log_from_json(std::string_view text);

// Throws IoFailure.
void write_log(const ReplayLog& log, const std::string& path);
void write_log(const Trace& trace, const ControllerSpec& controller, const std::string& path,
               bool embed_frames);
// Throws IoFailure or ParseError.
ReplayLog read_log(const std::string& path);

struct ReplayVerdict {
  enum class Kind { Match, Mismatch };
  // Why a mismatch was reported.
  enum class Reason { None, FrameDigest, FrameCount, Outcome, Config };

  Kind kind = Kind::Match;
  Reason reason = Reason::None;
  // First frame that differs. For Reason::Config (identical trajectories under a
  // config whose digest no longer matches the recorded one) this is 0.
  std::size_t frame = 0;
  std::string detail;

  bool matched() const { return kind == Kind::Match; }
};

std::string describe(const ReplayVerdict& verdict);

struct ReplayResult {
  ReplayVerdict verdict;
  Trace trace;  // the re-derived trace
};

// Re-runs the recorded config and compares digests frame by frame.
// Throws UnknownController or UnknownTemplate.
ReplayResult replay(const ReplayLog& log, const ScenarioLibrary& library,
                    const ControllerRegistry& registry);
ReplayVerdict verify_replay(const ReplayLog& log, const ScenarioLibrary& library,
                            const ControllerRegistry& registry);

// Deterministic SVG of routes, trajectories, footprints at the closest-approach frame and
// the collision point when there is one.
std::string render_svg(const Trace& trace, const ScenarioTemplate& tmpl);
void render_trace(const Trace& trace, const ScenarioTemplate& tmpl,
                  const std::string& output_path);
// Uses embedded frames, or re-derives them through a verified replay.
// Throws FramesUnavailable when neither is possible.
void render_trace(const ReplayLog& log, const ScenarioLibrary& library,
                  const ControllerRegistry& registry, const std::string& output_path);

}  // namespace falsify
