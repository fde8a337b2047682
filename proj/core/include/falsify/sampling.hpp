#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "falsify/rng.hpp"
#include "falsify/scenario.hpp"

namespace falsify {

struct Genome {
  // One gene per ParameterSpec, normalized to [0, 1].
  std::vector<double> genes;
  std::optional<double> fitness;

  friend bool operator==(const Genome&, const Genome&) = default;
};

struct Population {
  std::int64_t generation = 0;
  std::vector<Genome> members;
  Rng rng;
};

struct GeneticParams {
  std::size_t population_size = 24;
  std::size_t elite_count = 2;
  std::size_t tournament_size = 3;
  // Per gene pair: probability that the pair is recombined (fair coin assigns the genes).
  double crossover_prob = 0.9;
  // Per gene; unset means 1 / gene count.
  std::optional<double> mutation_prob;
  double mutation_sigma = 0.1;

  friend bool operator==(const GeneticParams&, const GeneticParams&) = default;
};

enum class SamplerKind { Uniform, Genetic };

struct SamplerState {
  SamplerKind kind = SamplerKind::Uniform;
  std::vector<ParameterSpec> specs;
  GeneticParams genetic;
  // Present iff kind == Genetic.
  std::optional<Population> population;
  // Used by the uniform sampler.
  Rng rng;
  std::vector<std::pair<Bindings, double>> history;
};

SamplerState uniform_init(std::vector<ParameterSpec> specs, std::uint64_t seed);

// Draws every parameter independently; stepped kinds are uniform over their lattice.
// Advances state.rng.
Bindings uniform_sample(SamplerState& state);

// Maps genes to parameter values. Stepped kinds snap to the nearest lattice point,
// ties toward the lower one.
Bindings denormalize(const Genome& genome, std::span<const ParameterSpec> specs);

// Inverse of denormalize for continuous specs; degenerate ranges map to 0.
Genome normalize(const Bindings& bindings, std::span<const ParameterSpec> specs);

// Throws BadPopulationSize when params.population_size < 2 or elites exceed it.
SamplerState ga_init(std::vector<ParameterSpec> specs, const GeneticParams& params,
                     std::uint64_t seed);

// Elites, then tournament selection, uniform crossover, Gaussian mutation, clamping.
// Throws UnevaluatedMember.
void ga_next_generation(SamplerState& state);

double effective_mutation_prob(const GeneticParams& params, std::size_t gene_count);

}  // namespace falsify
