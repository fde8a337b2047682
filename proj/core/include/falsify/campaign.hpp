#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "falsify/controller.hpp"
#include "falsify/evaluation.hpp"
#include "falsify/sampling.hpp"
#include "falsify/scenario.hpp"

namespace falsify {

inline constexpr int kReportSchemaVersion = 1;

struct CampaignConfig {
  std::string template_id;
  ControllerSpec controller;
  SamplerKind sampler = SamplerKind::Uniform;
  GeneticParams genetic;
  std::size_t budget = 1;
  std::uint64_t seed = 0;
  double step_size = 0.05;
  std::string output_dir;
  std::size_t workers = 1;
  bool embed_frames = false;
};

struct GenerationStats {
  std::int64_t generation = 0;
  std::size_t cases = 0;
  std::size_t collisions = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;

  friend bool operator==(const GenerationStats&, const GenerationStats&) = default;
};

struct CampaignReport {
  std::string template_id;
  std::string controller;
  SamplerKind sampler = SamplerKind::Uniform;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  CampaignSummary summary;
  // Genetic only: complete generations. A trailing partial generation is evaluated and
  // counted in `summary` but not listed here.
  std::vector<GenerationStats> generations;
  double wall_time_s = 0.0;
};

// Throws InvalidCampaign for budget 0, workers 0, a genetic budget below the population
// size, or a non-positive step size.
void validate_campaign(const CampaignConfig& config);

// Writes output_dir/cases/<index>/{config.json,result.json,case.replay.json} and
// output_dir/report.json. Deterministic in the campaign seed for any worker count.
CampaignReport run_campaign(const CampaignConfig& config, const ScenarioLibrary& library,
                            const ControllerRegistry& registry);

// Recomputes counts from the case files alone; report.json is not required.
CampaignSummary summarize_directory(const std::string& output_dir);

// Zero-padded case directory name.
std::string case_dir_name(std::size_t index);

std::string to_json(const CampaignReport& report);
std::string to_json(const CampaignConfig& config);
CampaignConfig campaign_config_from_json(std::string_view text);
CampaignConfig load_campaign_config(const std::string& path);

std::string_view to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(std::string_view name);

}  // namespace falsify
