// Copyright 2026 The popmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POPMC_SMC_HPP
#define POPMC_SMC_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "popmc/models.hpp"
#include "popmc/parallel.hpp"
#include "popmc/prng.hpp"

namespace popmc {

/// N particles of dimension `dim`, particle-major, with log weights.
struct WeightedPopulation {
  std::size_t dim = 0;
  std::vector<double> particles;
  std::vector<double> log_weights;
  double ess_ratio = 1.0;  ///< ESS / N, refreshed on normalization

  [[nodiscard]] std::size_t size() const noexcept { return log_weights.size(); }
  [[nodiscard]] std::span<double> particle(std::size_t i) noexcept {
    return {particles.data() + i * dim, dim};
  }
  [[nodiscard]] std::span<const double> particle(std::size_t i) const noexcept {
    return {particles.data() + i * dim, dim};
  }
};

enum class Resampler { multinomial, systematic };

[[nodiscard]] Resampler parse_resampler(std::string_view name);
[[nodiscard]] std::string_view to_string(Resampler resampler) noexcept;

/// Ancestor k for uniform u_k is the first index whose inclusive cumulative
/// weight exceeds u_k * total. Weights need not be normalized. Throws
/// DegeneratePopulation when the total is not positive and finite.
[[nodiscard]] std::vector<std::size_t> multinomial_ancestors(std::span<const double> weights,
                                                             std::span<const double> uniforms,
                                                             unsigned workers = 1);

/// N stratified positions (u + k) / N through the same inversion.
[[nodiscard]] std::vector<std::size_t> systematic_ancestors(std::span<const double> weights, double u,
                                                            std::size_t count, unsigned workers = 1);

/// Normalizes the log weights, draws ancestors (N uniforms or one uniform
/// from `rng`), copies the particles and resets every log weight to zero.
/// Returns the ancestor indices.
std::vector<std::size_t> resample(WeightedPopulation& population, Resampler resampler, RandomStream& rng,
                                  Precision precision = Precision::f64, unsigned workers = 1);
inline std::vector<std::size_t> resample_multinomial(WeightedPopulation& population, RandomStream& rng,
                                                     Precision precision = Precision::f64,
                                                     unsigned workers = 1) {
  return resample(population, Resampler::multinomial, rng, precision, workers);
}
inline std::vector<std::size_t> resample_systematic(WeightedPopulation& population, RandomStream& rng,
                                                    Precision precision = Precision::f64,
                                                    unsigned workers = 1) {
  return resample(population, Resampler::systematic, rng, precision, workers);
}

/// Number of times each index appears in `ancestors`.
[[nodiscard]] std::vector<std::size_t> offspring_counts(std::span<const std::size_t> ancestors,
                                                        std::size_t population_size);

struct SmcSamplerConfig {
  std::size_t particles = 8192;
  std::size_t temperatures = 200;
  std::size_t mcmc_steps = 10;
  double ess_threshold = 0.5;  ///< resample when ESS / N falls below; 0 gives AIS
  Resampler resampler = Resampler::multinomial;
  double rwm_scale = 1.0;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  Precision precision = Precision::f64;
  GeneratorKind generator = GeneratorKind::mrg32k3a;

  void validate() const;
};

struct SmcSamplerResult {
  WeightedPopulation population;        ///< final particles and log weights
  std::vector<double> weights;          ///< normalized final weights
  std::vector<double> ess_trace;        ///< ESS / N after reweighting, per temperature
  std::vector<double> log_evidence_increments;
  std::vector<std::size_t> resample_events;  ///< temperature indices (1-based)
  double log_evidence = 0.0;
  double acceptance_rate = 0.0;
};

/// Tempered SMC sampler over beta_t = (t / T)^2. Particles start from the
/// target's initial sampler with equal weights. At each temperature the
/// weights are multiplied by pi*(x)^(beta_t - beta_{t-1}) at the pre-move
/// particles, the population is resampled if ESS / N is below the threshold,
/// and every particle takes `mcmc_steps` Metropolis steps at beta_t. Streams
/// 0..N-1 belong to the particles, stream N drives resampling.
[[nodiscard]] SmcSamplerResult smc_sampler_run(const SmcSamplerConfig& config, const Target& target);

struct PfilterConfig {
  std::size_t particles = 8192;
  double ess_threshold = 0.5;
  Resampler resampler = Resampler::multinomial;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  Precision precision = Precision::f64;
  GeneratorKind generator = GeneratorKind::mrg32k3a;

  void validate() const;
};

struct PfilterResult {
  std::size_t length = 0;
  std::size_t state_dim = 0;
  std::vector<double> means;      ///< length x state_dim, weighted before resampling
  std::vector<double> stds;       ///< length x state_dim
  std::vector<double> ess_trace;  ///< ESS / N after weighting, per step
  std::vector<std::size_t> resample_events;  ///< 1-based time indices
  double log_likelihood = 0.0;
};

/// Bootstrap filter for observations y_1..y_T (length x obs_dim). Particles
/// start from the initial law, then at each step move through the
/// transition, are weighted by the observation density, contribute their
/// normalizing constant increment, and are resampled when ESS / N is below
/// the threshold.
[[nodiscard]] PfilterResult particle_filter_run(const PfilterConfig& config, const StateSpaceModel& model,
                                                std::span<const double> observations, std::size_t length);

}  // namespace popmc

#endif
