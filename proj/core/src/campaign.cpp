#include "falsify/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "falsify/error.hpp"
#include "falsify/replay.hpp"
#include "falsify/rng.hpp"
#include "falsify/simulation.hpp"
#include "json_util.hpp"

namespace falsify {

namespace fs = std::filesystem;
using detail::json;

namespace {

// Cases handed to the worker pool at once by the uniform sampler.
constexpr std::size_t kUniformBatch = 64;

struct CaseJob {
  std::size_t index;
  Bindings bindings;
};

class CaseExecutor {
 public:
  CaseExecutor(const CampaignConfig& cfg, const ScenarioTemplate& tmpl, ControllerSpec controller,
               DecideFn decide)
      : cfg_(cfg), tmpl_(tmpl), controller_(std::move(controller)), decide_(std::move(decide)) {}

  // Runs every job, possibly concurrently; returned records are in job order.
  std::vector<CaseRecord> run(const std::vector<CaseJob>& jobs) const {
    std::vector<CaseRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          records[i] = run_one(jobs[i]);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    };
    const std::size_t threads = std::min(cfg_.workers, jobs.size());
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(threads);
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
    return records;
  }

 private:
  CaseRecord run_one(const CaseJob& job) const {
    const ScenarioConfig config =
        instantiate(tmpl_, job.bindings, derive_seed(cfg_.seed, streams::kCase, job.index));
    const Trace trace = run_simulation(tmpl_, config, controller_, decide_, cfg_.step_size);
    const EvaluationResult result = evaluate(trace);

    const std::string rel = "cases/" + case_dir_name(job.index);
    const fs::path dir = fs::path(cfg_.output_dir) / rel;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    const std::string config_ref = rel + "/config.json";
    save_config_file(config, (dir / "config.json").string());
    write_log(trace, controller_, (dir / "case.replay.json").string(), cfg_.embed_frames);
    // result.json marks a complete case, so it is written last and moved into place.
    const fs::path tmp = dir / "result.json.tmp";
    detail::write_file(tmp.string(), to_json(result, job.index, config_ref));
    fs::rename(tmp, dir / "result.json", ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot finalize result in " + dir.string());

    return {job.index, config, result, config_ref};
  }

  const CampaignConfig& cfg_;
  const ScenarioTemplate& tmpl_;
  ControllerSpec controller_;
  DecideFn decide_;
};

GenerationStats generation_stats(std::int64_t generation, const std::vector<CaseRecord>& batch) {
  GenerationStats g;
  g.generation = generation;
  g.cases = batch.size();
  double sum = 0.0;
  g.best_fitness = -std::numeric_limits<double>::infinity();
  for (const auto& r : batch) {
    sum += r.result.fitness;
    g.best_fitness = std::max(g.best_fitness, r.result.fitness);
    if (r.result.collision) ++g.collisions;
  }
  g.mean_fitness = batch.empty() ? 0.0 : sum / static_cast<double>(batch.size());
  return g;
}

json summary_to_json(const CampaignSummary& s) {
  json params = json::array();
  for (const auto& p : s.collision_parameters) {
    params.push_back({{"name", p.name},
                      {"count", p.count},
                      {"mean", p.mean},
                      {"min", p.min},
                      {"max", p.max},
                      {"stddev", p.stddev}});
  }
  return {{"cases_run", s.cases_run},
          {"collision_count", s.collision_count},
          {"near_miss_count", s.near_miss_count},
          {"best_fitness", s.best_fitness},
          {"best_case", s.best_index ? json(*s.best_index) : json(nullptr)},
          {"best_config", s.best_config_ref},
          {"collision_parameters", std::move(params)}};
}

json genetic_to_json(const GeneticParams& g) {
  return {{"population_size", g.population_size},
          {"elite_count", g.elite_count},
          {"tournament_size", g.tournament_size},
          {"crossover_prob", g.crossover_prob},
          {"mutation_prob", g.mutation_prob ? json(*g.mutation_prob) : json(nullptr)},
          {"mutation_sigma", g.mutation_sigma}};
}

}  // namespace

std::string_view to_string(SamplerKind kind) {
  return kind == SamplerKind::Genetic ? "genetic" : "uniform";
}

SamplerKind sampler_kind_from_string(std::string_view name) {
  if (name == "uniform") return SamplerKind::Uniform;
  if (name == "genetic") return SamplerKind::Genetic;
  throw Error(ErrorCode::InvalidCampaign, "unknown sampler '" + std::string(name) + "'");
}

std::string case_dir_name(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return digits;
}

void validate_campaign(const CampaignConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidCampaign, m); };
  if (c.template_id.empty()) fail("template_id is empty");
  if (c.controller.name.empty()) fail("controller name is empty");
  if (c.budget < 1) fail("budget must be >= 1");
  if (c.workers < 1) fail("workers must be >= 1");
  if (!(c.step_size > 0.0) || !std::isfinite(c.step_size)) fail("step_size must be positive");
  if (c.output_dir.empty()) fail("output_dir is empty");
  if (c.sampler == SamplerKind::Genetic) {
    if (c.genetic.population_size < 2) {
      throw Error(ErrorCode::BadPopulationSize, "population size must be >= 2");
    }
    if (c.budget < c.genetic.population_size) fail("genetic budget is below the population size");
    const auto& g = c.genetic;
    if (g.crossover_prob < 0.0 || g.crossover_prob > 1.0) fail("crossover_prob outside [0, 1]");
    if (g.mutation_prob && (*g.mutation_prob < 0.0 || *g.mutation_prob > 1.0)) {
      fail("mutation_prob outside [0, 1]");
    }
    if (!(g.mutation_sigma >= 0.0)) fail("mutation_sigma must be >= 0");
  }
}

CampaignReport run_campaign(const CampaignConfig& cfg, const ScenarioLibrary& library,
                            const ControllerRegistry& registry) {
  validate_campaign(cfg);
  const ScenarioTemplate& tmpl = library.get_template(cfg.template_id);
  const ControllerSpec controller = registry.resolve(cfg.controller.name, cfg.controller.parameters);
  const auto started = std::chrono::steady_clock::now();

  std::error_code ec;
  fs::create_directories(fs::path(cfg.output_dir) / "cases", ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + cfg.output_dir + ": " + ec.message());

  const CaseExecutor executor(cfg, tmpl, controller, registry.get(controller.name).decide);
  const std::uint64_t sampler_seed = derive_seed(cfg.seed, streams::kSampler);

  CampaignReport report;
  report.template_id = cfg.template_id;
  report.controller = controller.name;
  report.sampler = cfg.sampler;
  report.seed = cfg.seed;
  report.budget = cfg.budget;

  std::vector<CaseRecord> records;
  records.reserve(cfg.budget);

  if (cfg.sampler == SamplerKind::Uniform) {
    SamplerState state = uniform_init(tmpl.parameters, sampler_seed);
    while (records.size() < cfg.budget) {
      const std::size_t n = std::min(kUniformBatch, cfg.budget - records.size());
      std::vector<CaseJob> jobs;
      for (std::size_t i = 0; i < n; ++i) jobs.push_back({records.size() + i, uniform_sample(state)});
      for (auto& rec : executor.run(jobs)) {
        state.history.emplace_back(rec.config.bindings, rec.result.fitness);
        records.push_back(std::move(rec));
      }
    }
  } else {
    SamplerState state = ga_init(tmpl.parameters, cfg.genetic, sampler_seed);
    const std::size_t pop = cfg.genetic.population_size;
    while (records.size() < cfg.budget) {
      Population& population = *state.population;
      const std::size_t n = std::min(pop, cfg.budget - records.size());
      std::vector<CaseJob> jobs;
      for (std::size_t i = 0; i < n; ++i) {
        jobs.push_back({records.size() + i, denormalize(population.members[i], state.specs)});
      }
      std::vector<CaseRecord> batch = executor.run(jobs);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        population.members[i].fitness = batch[i].result.fitness;
        state.history.emplace_back(batch[i].config.bindings, batch[i].result.fitness);
      }
      if (n == pop) report.generations.push_back(generation_stats(population.generation, batch));
      for (auto& rec : batch) records.push_back(std::move(rec));
      if (records.size() < cfg.budget) ga_next_generation(state);
    }
  }

  report.summary = campaign_summary(records);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  detail::write_file((fs::path(cfg.output_dir) / "report.json").string(), to_json(report));
  return report;
}

CampaignSummary summarize_directory(const std::string& output_dir) {
  const fs::path cases = fs::path(output_dir) / "cases";
  std::error_code ec;
  if (!fs::is_directory(cases, ec)) {
    throw Error(ErrorCode::IoFailure, cases.string() + " is not a directory");
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(cases)) {
    if (entry.is_directory() && fs::exists(entry.path() / "result.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<CaseRecord> records;
  for (const auto& d : dirs) {
    CaseRecord rec;
    const std::string name = d.filename().string();
    if (name.empty() || name.find_first_not_of("0123456789") != std::string::npos) continue;
    rec.index = std::stoull(name);
    auto [result, ref] = result_from_json(detail::read_file((d / "result.json").string()));
    rec.result = result;
    rec.config_ref = ref;
    rec.config = load_config_file((d / "config.json").string());
    records.push_back(std::move(rec));
  }
  std::sort(records.begin(), records.end(),
            [](const CaseRecord& a, const CaseRecord& b) { return a.index < b.index; });
  return campaign_summary(records);
}

std::string to_json(const CampaignReport& r) {
  json gens = json::array();
  for (const auto& g : r.generations) {
    gens.push_back({{"generation", g.generation},
                    {"cases", g.cases},
                    {"collisions", g.collisions},
                    {"best_fitness", g.best_fitness},
                    {"mean_fitness", g.mean_fitness}});
  }
  json j = summary_to_json(r.summary);
  j["schema_version"] = kReportSchemaVersion;
  j["template_id"] = r.template_id;
  j["controller"] = r.controller;
  j["sampler"] = to_string(r.sampler);
  j["seed"] = r.seed;
  j["budget"] = r.budget;
  j["generations"] = std::move(gens);
  j["wall_time_s"] = r.wall_time_s;
  return detail::dump(j);
}

std::string to_json(const CampaignConfig& c) {
  json sampler = genetic_to_json(c.genetic);
  sampler["kind"] = to_string(c.sampler);
  json j{{"template_id", c.template_id},
         {"controller", {{"name", c.controller.name}, {"parameters", c.controller.parameters}}},
         {"sampler", std::move(sampler)},
         {"budget", c.budget},
         {"seed", c.seed},
         {"step_size", c.step_size},
         {"output_dir", c.output_dir},
         {"workers", c.workers},
         {"embed_frames", c.embed_frames}};
  return detail::dump(j);
}

CampaignConfig campaign_config_from_json(std::string_view text) {
  const json j = detail::parse_json(text, "campaign config");
  return detail::with_parse_errors("campaign config", [&] {
    CampaignConfig c;
    c.template_id = j.at("template_id").get<std::string>();
    const auto& jc = j.at("controller");
    if (jc.is_string()) {
      c.controller.name = jc.get<std::string>();
    } else {
      c.controller.name = jc.at("name").get<std::string>();
      c.controller.parameters = jc.value("parameters", std::map<std::string, double>{});
    }
    if (j.contains("sampler")) {
      const auto& js = j.at("sampler");
      if (js.is_string()) {
        c.sampler = sampler_kind_from_string(js.get<std::string>());
      } else {
        c.sampler = sampler_kind_from_string(js.value("kind", std::string("uniform")));
        auto& g = c.genetic;
        g.population_size = js.value("population_size", g.population_size);
        g.elite_count = js.value("elite_count", g.elite_count);
        g.tournament_size = js.value("tournament_size", g.tournament_size);
        g.crossover_prob = js.value("crossover_prob", g.crossover_prob);
        if (js.contains("mutation_prob") && !js.at("mutation_prob").is_null()) {
          g.mutation_prob = js.at("mutation_prob").get<double>();
        }
        g.mutation_sigma = js.value("mutation_sigma", g.mutation_sigma);
      }
    }
    c.budget = j.value("budget", c.budget);
    c.seed = j.value("seed", c.seed);
    c.step_size = j.value("step_size", c.step_size);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.workers = j.value("workers", c.workers);
    c.embed_frames = j.value("embed_frames", c.embed_frames);
    return c;
  });
}

CampaignConfig load_campaign_config(const std::string& path) {
  return campaign_config_from_json(detail::read_file(path));
}

}  // namespace falsify
