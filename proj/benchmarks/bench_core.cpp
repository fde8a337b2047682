#include <benchmark/benchmark.h>

#include "falsify/replay.hpp"
#include "falsify/sampling.hpp"
#include "falsify/scenario.hpp"
#include "falsify/simulation.hpp"

using namespace falsify;

namespace {

const ScenarioLibrary& library() {
  static const auto lib = ScenarioLibrary::with_builtins();
  return lib;
}

const ControllerRegistry& registry() {
  static const auto reg = ControllerRegistry::with_builtins();
  return reg;
}

ScenarioConfig ped_config() {
  const auto& t = library().get_template("ped_crossing");
  return instantiate(t, {{"v", 1.5}, {"d_trigger", 15.0}, {"start_distance", 40.0}, {"cloudiness", 0.0}},
                     1);
}

WorldState crowded_world(std::size_t n) {
  WorldState w;
  w.ego = {"ego", {0, 0}, 0, 10, 0, false, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    // spread on a line so no pair overlaps and every pair gets checked
    w.others.push_back({"a" + std::to_string(i), {5.0 * static_cast<double>(i + 1), 3.0}, 0, 1, 0,
                        false, 0.3});
  }
  return w;
}

}  // namespace

static void BM_Step(benchmark::State& state) {
  const auto& t = library().get_template("ped_crossing");
  const auto scene = build_scene(t, ped_config());
  auto w = initial_world(scene);
  for (auto _ : state) {
    auto next = step(w, {0.0}, scene, kDefaultStepSize);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_Step);

static void BM_RunSimulation(benchmark::State& state) {
  const auto& t = library().get_template("ped_crossing");
  const auto config = ped_config();
  const auto spec = registry().resolve("reactive_braking");
  for (auto _ : state) {
    auto trace = run_simulation(t, config, registry(), spec);
    benchmark::DoNotOptimize(trace);
  }
}
BENCHMARK(BM_RunSimulation)->Unit(benchmark::kMicrosecond);

static void BM_DetectCollision(benchmark::State& state) {
  const auto w = crowded_world(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto hit = detect_collision(w);
    benchmark::DoNotOptimize(hit);
  }
}
BENCHMARK(BM_DetectCollision)->Arg(2)->Arg(10)->Arg(50);

static void BM_FrameDigest(benchmark::State& state) {
  const auto w = crowded_world(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(frame_digest(w));
}
BENCHMARK(BM_FrameDigest)->Arg(2)->Arg(10);

static void BM_GaNextGeneration(benchmark::State& state) {
  const auto& t = library().get_template("ped_crossing");
  auto s = ga_init(t.parameters, GeneticParams{}, 7);
  for (auto _ : state) {
    for (auto& m : s.population->members) m.fitness = m.genes[0];
    ga_next_generation(s);
  }
}
BENCHMARK(BM_GaNextGeneration);

BENCHMARK_MAIN();
