#include "falsify/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "falsify/error.hpp"

namespace falsify {

namespace {

double snap_to_lattice(double x, double lower, double step, std::int64_t steps) {
  // x is an offset from lower. Nearest lattice index, ties toward the lower index.
  const double k = x / step;
  auto idx = static_cast<std::int64_t>(std::ceil(k - 0.5));
  idx = std::clamp<std::int64_t>(idx, 0, steps);
  return lower + static_cast<double>(idx) * step;
}

std::size_t tournament(const Population& pop, std::size_t k, Rng& rng) {
  const std::size_t n = pop.members.size();
  std::size_t best = static_cast<std::size_t>(rng.uniform_index(n));
  for (std::size_t i = 1; i < k; ++i) {
    const auto c = static_cast<std::size_t>(rng.uniform_index(n));
    const double fc = *pop.members[c].fitness;
    const double fb = *pop.members[best].fitness;
    if (fc > fb || (fc == fb && c < best)) best = c;
  }
  return best;
}

}  // namespace

SamplerState uniform_init(std::vector<ParameterSpec> specs, std::uint64_t seed) {
  SamplerState s;
  s.kind = SamplerKind::Uniform;
  s.specs = std::move(specs);
  s.rng = Rng(seed);
  return s;
}

Bindings uniform_sample(SamplerState& state) {
  Bindings out;
  for (const auto& p : state.specs) {
    double v = p.lower;
    if (p.kind == ParameterKind::Stepped && p.step > 0.0) {
      const auto steps = static_cast<std::uint64_t>(p.lattice_steps());
      const auto idx = state.rng.uniform_index(steps + 1);
      v = p.lower + static_cast<double>(idx) * p.step;
    } else {
      const double u = state.rng.uniform01();
      v = std::clamp(p.lower + u * (p.upper - p.lower), p.lower, p.upper);
    }
    out[p.name] = v;
  }
  return out;
}

Bindings denormalize(const Genome& genome, std::span<const ParameterSpec> specs) {
  Bindings out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& p = specs[i];
    const double g = std::clamp(genome.genes.at(i), 0.0, 1.0);
    double v = std::clamp(p.lower + g * (p.upper - p.lower), p.lower, p.upper);
    if (g == 1.0) v = p.upper;
    if (p.kind == ParameterKind::Stepped && p.step > 0.0) {
      v = snap_to_lattice(g * (p.upper - p.lower), p.lower, p.step, p.lattice_steps());
    }
    out[p.name] = v;
  }
  return out;
}

Genome normalize(const Bindings& bindings, std::span<const ParameterSpec> specs) {
  Genome g;
  for (const auto& p : specs) {
    const double span = p.upper - p.lower;
    const double v = bindings.at(p.name);
    g.genes.push_back(span > 0.0 ? std::clamp((v - p.lower) / span, 0.0, 1.0) : 0.0);
  }
  return g;
}

double effective_mutation_prob(const GeneticParams& params, std::size_t gene_count) {
  if (params.mutation_prob) return *params.mutation_prob;
  return gene_count == 0 ? 0.0 : 1.0 / static_cast<double>(gene_count);
}

SamplerState ga_init(std::vector<ParameterSpec> specs, const GeneticParams& params,
                     std::uint64_t seed) {
  if (params.population_size < 2) {
    throw Error(ErrorCode::BadPopulationSize,
                "population size " + std::to_string(params.population_size) + " < 2");
  }
  if (params.elite_count > params.population_size) {
    throw Error(ErrorCode::BadPopulationSize, "elite count exceeds population size");
  }
  if (params.tournament_size < 1) {
    throw Error(ErrorCode::BadPopulationSize, "tournament size must be >= 1");
  }
  SamplerState s;
  s.kind = SamplerKind::Genetic;
  s.specs = std::move(specs);
  s.genetic = params;
  Population pop;
  pop.generation = 0;
  pop.rng = Rng(seed);
  pop.members.resize(params.population_size);
  for (auto& m : pop.members) {
    m.genes.resize(s.specs.size());
    for (auto& g : m.genes) g = pop.rng.uniform01();
  }
  s.population = std::move(pop);
  return s;
}

void ga_next_generation(SamplerState& state) {
  if (state.kind != SamplerKind::Genetic || !state.population) {
    throw Error(ErrorCode::BadPopulationSize, "sampler has no population");
  }
  Population& pop = *state.population;
  const GeneticParams& gp = state.genetic;
  const std::size_t n = pop.members.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!pop.members[i].fitness) {
      throw Error(ErrorCode::UnevaluatedMember, "member " + std::to_string(i) + " has no fitness");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *pop.members[a].fitness > *pop.members[b].fitness;
  });

  std::vector<Genome> next;
  next.reserve(n);
  for (std::size_t e = 0; e < std::min(gp.elite_count, n); ++e) {
    next.push_back(pop.members[order[e]]);
  }

  const double pm = effective_mutation_prob(gp, state.specs.size());
  auto mutate = [&](std::vector<double>& genes) {
    for (auto& g : genes) {
      if (pop.rng.bernoulli(pm)) g = std::clamp(g + pop.rng.normal(0.0, gp.mutation_sigma), 0.0, 1.0);
    }
  };

  while (next.size() < n) {
    const std::size_t a = tournament(pop, gp.tournament_size, pop.rng);
    const std::size_t b = tournament(pop, gp.tournament_size, pop.rng);
    std::vector<double> c1 = pop.members[a].genes;
    std::vector<double> c2 = pop.members[b].genes;
    for (std::size_t i = 0; i < c1.size(); ++i) {
      if (pop.rng.bernoulli(gp.crossover_prob) && pop.rng.bernoulli(0.5)) std::swap(c1[i], c2[i]);
    }
    mutate(c1);
    mutate(c2);
    next.push_back({std::move(c1), std::nullopt});
    if (next.size() < n) next.push_back({std::move(c2), std::nullopt});
  }

  pop.members = std::move(next);
  ++pop.generation;
}

}  // namespace falsify
