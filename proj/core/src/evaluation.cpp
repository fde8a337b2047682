#include "falsify/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "falsify/error.hpp"
#include "falsify/simulation.hpp"
#include "json_util.hpp"

namespace falsify {

double fitness_from(double min_distance, bool collision) {
  return collision ? kCollisionFitness : 1.0 / (1.0 + min_distance);
}

EvaluationResult evaluate(const Trace& trace) {
  if (trace.frames.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no frames");
  EvaluationResult r;
  r.outcome = trace.outcome;
  r.min_distance = pairwise_min_distance(trace.frames.front());
  r.time_of_min = trace.frames.front().time;
  for (std::size_t i = 1; i < trace.frames.size(); ++i) {
    const double d = pairwise_min_distance(trace.frames[i]);
    if (d < r.min_distance) {
      r.min_distance = d;
      r.time_of_min = trace.frames[i].time;
    }
  }
  r.collision = trace.outcome == Outcome::Collision;
  r.fitness = fitness_from(r.min_distance, r.collision);
  return r;
}

CampaignSummary campaign_summary(std::span<const CaseRecord> records) {
  CampaignSummary s;
  std::map<std::string, std::vector<double>> colliding;
  for (const auto& rec : records) {
    ++s.cases_run;
    if (rec.result.collision) {
      ++s.collision_count;
      for (const auto& [name, v] : rec.config.bindings) colliding[name].push_back(v);
    } else if (rec.result.min_distance < kNearMissThreshold) {
      ++s.near_miss_count;
    }
    const bool better = !s.best_index || rec.result.fitness > s.best_fitness ||
                        (rec.result.fitness == s.best_fitness && rec.index < *s.best_index);
    if (better) {
      s.best_index = rec.index;
      s.best_fitness = rec.result.fitness;
      s.best_config_ref = rec.config_ref;
    }
  }
  for (const auto& [name, values] : colliding) {
    ParameterStats st;
    st.name = name;
    st.count = values.size();
    st.min = *std::min_element(values.begin(), values.end());
    st.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    st.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - st.mean) * (v - st.mean);
    st.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    s.collision_parameters.push_back(std::move(st));
  }
  return s;
}

std::string to_json(const EvaluationResult& result, std::size_t case_index,
                    const std::string& config_ref) {
  detail::json j{{"schema_version", kResultSchemaVersion},
                 {"case_index", case_index},
                 {"collision", result.collision},
                 {"min_distance", result.min_distance},
                 {"time_of_min", result.time_of_min},
                 {"fitness", result.fitness},
                 {"outcome", to_string(result.outcome)},
                 {"config", config_ref}};
  return detail::dump(j);
}

std::pair<EvaluationResult, std::string> result_from_json(std::string_view text) {
  const auto j = detail::parse_json(text, "result");
  return detail::with_parse_errors("result", [&] {
    if (j.at("schema_version").get<int>() != kResultSchemaVersion) {
      throw Error(ErrorCode::ParseError, "unsupported result schema_version");
    }
    EvaluationResult r;
    r.collision = j.at("collision").get<bool>();
    r.min_distance = j.at("min_distance").get<double>();
    r.time_of_min = j.at("time_of_min").get<double>();
    r.fitness = j.at("fitness").get<double>();
    r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    return std::pair{r, j.at("config").get<std::string>()};
  });
}

}  // namespace falsify
