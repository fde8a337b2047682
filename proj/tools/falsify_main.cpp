// falsify: command-line front end for scenario campaigns.
//
//   falsify list-scenarios [--templates DIR]
//   falsify run [--config FILE] [--template ID] [--seed N] [--budget N]
//               [--sampler uniform|genetic] [--controller NAME] [--param K=V]...
//               [--workers N] [--out DIR] [--step-size S] [--embed-frames]
//   falsify replay LOG
//   falsify render LOG [--out FILE]
//   falsify summarize DIR [--json]
//
// Exit codes: 0 success, 1 usage error, 2 replay mismatch, 3 I/O failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "falsify/campaign.hpp"
#include "falsify/error.hpp"
#include "falsify/replay.hpp"
#include "falsify/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMismatch = 2;
constexpr int kExitIo = 3;

constexpr const char* kOutputRootEnv = "FALSIFY_OUTPUT_ROOT";

int exit_code_for(const falsify::Error& e) {
  switch (e.code()) {
    case falsify::ErrorCode::IoFailure:
    case falsify::ErrorCode::ParseError:
      return kExitIo;
    default:
      return kExitUsage;
  }
}

struct RunOptions {
  std::string config_path;
  std::optional<std::string> template_id;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::optional<std::string> sampler;
  std::optional<std::string> controller;
  std::vector<std::string> params;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  std::optional<double> step_size;
  bool embed_frames = false;
};

std::string default_output_dir(const falsify::CampaignConfig& c) {
  const char* root = std::getenv(kOutputRootEnv);
  const std::filesystem::path base = root && *root ? root : "falsify-out";
  return (base / (c.template_id + "_" + std::string(falsify::to_string(c.sampler)) + "_" +
                  std::to_string(c.seed)))
      .string();
}

int cmd_list(const falsify::ScenarioLibrary& library) {
  for (const auto& entry : library.list_templates()) {
    const auto& t = library.get_template(entry.template_id);
    std::cout << entry.template_id << "  [" << falsify::to_string(entry.category) << "]\n";
    for (const auto& p : t.parameters) {
      std::cout << "    " << p.name << " [" << p.lower << ", " << p.upper << "] " << p.unit;
      if (p.kind == falsify::ParameterKind::Stepped) std::cout << " step " << p.step;
      std::cout << "\n";
    }
  }
  return kExitOk;
}

int cmd_run(const RunOptions& opt, const falsify::ScenarioLibrary& library,
            const falsify::ControllerRegistry& registry) {
  falsify::CampaignConfig c;
  if (!opt.config_path.empty()) c = falsify::load_campaign_config(opt.config_path);
  if (opt.template_id) c.template_id = *opt.template_id;
  if (opt.seed) c.seed = *opt.seed;
  if (opt.budget) c.budget = *opt.budget;
  if (opt.sampler) c.sampler = falsify::sampler_kind_from_string(*opt.sampler);
  if (opt.controller && *opt.controller != c.controller.name) {
    c.controller.name = *opt.controller;
    c.controller.parameters.clear();
  }
  if (c.controller.name.empty()) c.controller.name = "reactive_braking";
  for (const auto& kv : opt.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw falsify::Error(falsify::ErrorCode::InvalidCampaign, "--param expects KEY=VALUE");
    }
    c.controller.parameters[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  if (opt.workers) c.workers = *opt.workers;
  if (opt.step_size) c.step_size = *opt.step_size;
  if (opt.embed_frames) c.embed_frames = true;
  if (opt.out) c.output_dir = *opt.out;
  if (c.output_dir.empty()) c.output_dir = default_output_dir(c);

  const auto report = falsify::run_campaign(c, library, registry);
  const auto& s = report.summary;
  std::cout << "cases " << s.cases_run << ", collisions " << s.collision_count << ", near misses "
            << s.near_miss_count << ", best fitness " << s.best_fitness << "\n";
  std::cout << "report: " << (std::filesystem::path(c.output_dir) / "report.json").string() << "\n";
  return kExitOk;
}

int cmd_replay(const std::string& log_path, const falsify::ScenarioLibrary& library,
               const falsify::ControllerRegistry& registry) {
  const auto log = falsify::read_log(log_path);
  const auto verdict = falsify::verify_replay(log, library, registry);
  std::cout << falsify::describe(verdict) << "\n";
  return verdict.matched() ? kExitOk : kExitMismatch;
}

int cmd_render(const std::string& log_path, std::string out,
               const falsify::ScenarioLibrary& library,
               const falsify::ControllerRegistry& registry) {
  const auto log = falsify::read_log(log_path);
  if (out.empty()) {
    std::string base = log_path;
    const std::string ext = falsify::kReplayExtension;
    if (base.size() > ext.size() && base.compare(base.size() - ext.size(), ext.size(), ext) == 0) {
      base.resize(base.size() - ext.size());
    }
    out = base + ".svg";
  }
  falsify::render_trace(log, library, registry, out);
  std::cout << out << "\n";
  return kExitOk;
}

int cmd_summarize(const std::string& dir, bool as_json) {
  const auto s = falsify::summarize_directory(dir);
  if (as_json) {
    falsify::CampaignReport r;
    r.summary = s;
    std::cout << falsify::to_json(r);
    return kExitOk;
  }
  std::cout << "cases_run " << s.cases_run << "\n"
            << "collision_count " << s.collision_count << "\n"
            << "near_miss_count " << s.near_miss_count << "\n"
            << "best_fitness " << s.best_fitness << "\n"
            << "best_config " << s.best_config_ref << "\n";
  for (const auto& p : s.collision_parameters) {
    std::cout << "  " << p.name << ": n=" << p.count << " mean=" << p.mean << " min=" << p.min
              << " max=" << p.max << " sd=" << p.stddev << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-based falsification of driving controllers"};
  app.require_subcommand(1);
  std::string templates_dir;
  app.add_option("--templates", templates_dir, "Directory of extra template JSON files");

  auto* list = app.add_subcommand("list-scenarios", "List templates with parameter ranges");

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run a campaign");
  run->add_option("--config", run_opt.config_path, "Campaign config JSON");
  run->add_option("--template", run_opt.template_id, "Template id");
  run->add_option("--seed", run_opt.seed, "Campaign seed");
  run->add_option("--budget", run_opt.budget, "Number of cases");
  run->add_option("--sampler", run_opt.sampler, "uniform or genetic")
      ->check(CLI::IsMember({"uniform", "genetic"}));
  run->add_option("--controller", run_opt.controller, "Registered controller name");
  run->add_option("--param", run_opt.params, "Controller parameter KEY=VALUE");
  run->add_option("--workers", run_opt.workers, "Parallel workers");
  run->add_option("--out", run_opt.out, "Output directory");
  run->add_option("--step-size", run_opt.step_size, "Simulation step in seconds");
  run->add_flag("--embed-frames", run_opt.embed_frames, "Embed full frames in replay logs");

  std::string log_path;
  auto* replay = app.add_subcommand("replay", "Verify a replay log by re-execution");
  replay->add_option("log", log_path, "Path to a .replay.json file")->required();

  std::string render_log, render_out;
  auto* render = app.add_subcommand("render", "Render a replay log to SVG");
  render->add_option("log", render_log, "Path to a .replay.json file")->required();
  render->add_option("--out", render_out, "Output SVG path");

  std::string summary_dir;
  bool summary_json = false;
  auto* summarize = app.add_subcommand("summarize", "Recompute campaign counts from case files");
  summarize->add_option("dir", summary_dir, "Campaign output directory")->required();
  summarize->add_flag("--json", summary_json, "Print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    auto library = falsify::ScenarioLibrary::with_builtins();
    if (!templates_dir.empty()) library.register_directory(templates_dir);
    const auto registry = falsify::ControllerRegistry::with_builtins();

    if (*list) return cmd_list(library);
    if (*run) return cmd_run(run_opt, library, registry);
    if (*replay) return cmd_replay(log_path, library, registry);
    if (*render) return cmd_render(render_log, render_out, library, registry);
    if (*summarize) return cmd_summarize(summary_dir, summary_json);
  } catch (const falsify::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
