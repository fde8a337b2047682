#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "falsify/scenario.hpp"
#include "falsify/world.hpp"

namespace falsify {

inline constexpr double kCollisionFitness = 2.0;
inline constexpr double kNearMissThreshold = 0.5;  // m
inline constexpr int kResultSchemaVersion = 1;

struct EvaluationResult {
  bool collision = false;
  double min_distance = 0.0;
  double time_of_min = 0.0;
  double fitness = 0.0;
  Outcome outcome = Outcome::Timeout;

  friend bool operator==(const EvaluationResult&, const EvaluationResult&) = default;
};

// 2 for a collision, 1 / (1 + d) otherwise. Higher is more dangerous.
double fitness_from(double min_distance, bool collision);

// Throws EmptyTrace or NoOtherActors.
EvaluationResult evaluate(const Trace& trace);

struct CaseRecord {
  std::size_t index = 0;
  ScenarioConfig config;
  EvaluationResult result;
  // Where the config lives, relative to the campaign root.
  std::string config_ref;
};

struct ParameterStats {
  std::string name;
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // population standard deviation

  friend bool operator==(const ParameterStats&, const ParameterStats&) = default;
};

struct CampaignSummary {
  std::size_t cases_run = 0;
  std::size_t collision_count = 0;
  std::size_t near_miss_count = 0;
  double best_fitness = 0.0;
  std::optional<std::size_t> best_index;
  std::string best_config_ref;
  // Statistics of colliding configs, one entry per parameter name, sorted by name.
  std::vector<ParameterStats> collision_parameters;

  friend bool operator==(const CampaignSummary&, const CampaignSummary&) = default;
};

// Best case is the highest fitness; ties go to the lowest index.
CampaignSummary campaign_summary(std::span<const CaseRecord> records);

std::string to_json(const EvaluationResult& result, std::size_t case_index,
                    const std::string& config_ref);
// Parses the per-case result file; returns the result plus its config reference.
std::pair<EvaluationResult, std::string> result_from_json(std::string_view text);

}  // namespace falsify
