#include <gtest/gtest.h>

#include <filesystem>

#include "../common/dir_compare.hpp"
#include "falsify/campaign.hpp"
#include "falsify/error.hpp"
#include "falsify/replay.hpp"
#include "test_support.hpp"

using namespace falsify;
using falsify::testing::snapshot_campaign;
using falsify::testing::TempDir;
namespace fs = std::filesystem;

namespace {

const ScenarioLibrary& library() {
  static const auto lib = ScenarioLibrary::with_builtins();
  return lib;
}

const ControllerRegistry& registry() {
  static const auto reg = ControllerRegistry::with_builtins();
  return reg;
}

CampaignConfig campaign(const std::string& out, std::size_t budget,
                        SamplerKind sampler = SamplerKind::Uniform) {
  CampaignConfig c;
  c.template_id = "ped_crossing";
  c.controller = {"constant_speed", {}};
  c.sampler = sampler;
  c.budget = budget;
  c.seed = 7;
  c.output_dir = out;
  return c;
}

std::size_t count_case_dirs(const fs::path& root) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(root / "cases")) n += e.is_directory();
  return n;
}

}  // namespace

TEST(Campaign, MinimalCampaignLayout) {
  TempDir dir;
  const auto report = run_campaign(campaign(dir.str(), 1), library(), registry());
  EXPECT_EQ(report.summary.cases_run, 1u);
  const auto case_dir = dir.path() / "cases" / case_dir_name(0);
  for (const char* f : {"config.json", "result.json", "case.replay.json"}) {
    EXPECT_TRUE(fs::exists(case_dir / f)) << f;
  }
  EXPECT_EQ(std::distance(fs::directory_iterator(case_dir), fs::directory_iterator{}), 3);
  EXPECT_TRUE(fs::exists(dir.path() / "report.json"));
  EXPECT_EQ(count_case_dirs(dir.path()), 1u);
}

TEST(Campaign, CaseDirName) {
  EXPECT_EQ(case_dir_name(0), "00000");
  EXPECT_EQ(case_dir_name(123), "00123");
  EXPECT_EQ(case_dir_name(1234567), "1234567");
}

TEST(Campaign, DeterministicAcrossRunsAndWorkers) {
  TempDir a, b, c;
  auto cfg = campaign(a.str(), 30);
  cfg.controller.name = "reactive_braking";
  run_campaign(cfg, library(), registry());
  cfg.output_dir = b.str();
  run_campaign(cfg, library(), registry());
  cfg.output_dir = c.str();
  cfg.workers = 3;
  run_campaign(cfg, library(), registry());
  const auto sa = snapshot_campaign(a.path());
  EXPECT_EQ(sa.size(), 30u * 3 + 1);
  EXPECT_EQ(sa, snapshot_campaign(b.path()));
  EXPECT_EQ(sa, snapshot_campaign(c.path()));
}

TEST(Campaign, GeneticGenerationsAndElitism) {
  TempDir dir;
  auto cfg = campaign(dir.str(), 480, SamplerKind::Genetic);
  cfg.controller.name = "reactive_braking";
  const auto r = run_campaign(cfg, library(), registry());
  ASSERT_EQ(r.generations.size(), 20u);
  for (std::size_t g = 0; g < r.generations.size(); ++g) {
    EXPECT_EQ(r.generations[g].generation, static_cast<std::int64_t>(g));
    EXPECT_EQ(r.generations[g].cases, 24u);
    if (g > 0) EXPECT_GE(r.generations[g].best_fitness, r.generations[g - 1].best_fitness);
  }
  EXPECT_EQ(count_case_dirs(dir.path()), 480u);
}

TEST(Campaign, GeneticTruncatesLastGeneration) {
  TempDir dir;
  const auto r = run_campaign(campaign(dir.str(), 50, SamplerKind::Genetic), library(), registry());
  EXPECT_EQ(r.summary.cases_run, 50u);
  EXPECT_EQ(r.generations.size(), 2u);
  EXPECT_EQ(count_case_dirs(dir.path()), 50u);
}

TEST(Campaign, SummarizeMatchesReport) {
  TempDir dir;
  const auto r = run_campaign(campaign(dir.str(), 40), library(), registry());
  EXPECT_EQ(summarize_directory(dir.str()), r.summary);
}

TEST(Campaign, SummarizeSurvivesInterruption) {
  TempDir dir;
  run_campaign(campaign(dir.str(), 12), library(), registry());
  fs::remove(dir.path() / "report.json");
  for (std::size_t i = 8; i < 12; ++i) fs::remove(dir.path() / "cases" / case_dir_name(i) / "result.json");
  fs::create_directories(dir.path() / "cases" / "junk");
  const auto s = summarize_directory(dir.str());
  EXPECT_EQ(s.cases_run, 8u);
  EXPECT_THROW((void)summarize_directory((dir.path() / "nope").string()), Error);
}

TEST(Campaign, EveryReplayLogVerifies) {
  TempDir dir;
  auto cfg = campaign(dir.str(), 10);
  cfg.controller.name = "reactive_braking";
  run_campaign(cfg, library(), registry());
  for (std::size_t i = 0; i < 10; ++i) {
    const auto log = read_log((dir.path() / "cases" / case_dir_name(i) / "case.replay.json").string());
    EXPECT_TRUE(verify_replay(log, library(), registry()).matched());
  }
}

TEST(Campaign, ValidationErrors) {
  TempDir dir;
  auto expect_code = [&](CampaignConfig c, ErrorCode code) {
    try {
      run_campaign(c, library(), registry());
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  auto c = campaign(dir.str(), 0);
  expect_code(c, ErrorCode::InvalidCampaign);
  c = campaign(dir.str(), 5);
  c.workers = 0;
  expect_code(c, ErrorCode::InvalidCampaign);
  c = campaign(dir.str(), 5, SamplerKind::Genetic);
  expect_code(c, ErrorCode::InvalidCampaign);
  c.genetic.population_size = 1;
  expect_code(c, ErrorCode::BadPopulationSize);
  c = campaign(dir.str(), 5);
  c.template_id = "nope";
  expect_code(c, ErrorCode::UnknownTemplate);
  c = campaign(dir.str(), 5);
  c.controller.name = "nope";
  expect_code(c, ErrorCode::UnknownController);
  falsify::testing::spit(dir.path() / "file", "x");
  c = campaign((dir.path() / "file" / "sub").string(), 5);
  expect_code(c, ErrorCode::IoFailure);
}

TEST(Campaign, ConfigJsonRoundTrip) {
  auto c = campaign("out", 96, SamplerKind::Genetic);
  c.controller.parameters = {{"reaction_distance", 9.5}};
  c.genetic.mutation_prob = 0.2;
  c.workers = 2;
  c.embed_frames = true;
  const auto back = campaign_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.genetic, c.genetic);
  EXPECT_EQ(back.controller, c.controller);

  const auto short_form = campaign_config_from_json(
      R"({"template_id": "cut_in", "controller": "constant_speed", "sampler": "genetic", "budget": 48})");
  EXPECT_EQ(short_form.controller.name, "constant_speed");
  EXPECT_EQ(short_form.sampler, SamplerKind::Genetic);
  EXPECT_THROW((void)campaign_config_from_json(R"({"sampler": "annealing"})"), Error);
}
