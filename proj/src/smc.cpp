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

#include "popmc/smc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "popmc/error.hpp"
#include "popmc/popmcmc.hpp"

namespace popmc {
namespace {

std::size_t last_positive(std::span<const double> weights) {
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

std::vector<double> checked_cdf(std::span<const double> weights, unsigned workers) {
  if (weights.empty()) throw DegeneratePopulation("resampling an empty population");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DegeneratePopulation("resampling weights must be finite and non-negative");
  }
  auto cdf = inclusive_prefix_sum(weights, Precision::f64, workers);
  if (!(cdf.back() > 0.0) || !std::isfinite(cdf.back())) {
    throw DegeneratePopulation("resampling weights sum to zero");
  }
  return cdf;
}

std::size_t invert(const std::vector<double>& cdf, double position, std::size_t fallback) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), position);
  if (it == cdf.end()) return fallback;
  return static_cast<std::size_t>(it - cdf.begin());
}

std::vector<std::size_t> draw_ancestors(std::span<const double> weights, Resampler resampler,
                                        RandomStream& rng, unsigned workers) {
  const std::size_t n = weights.size();
  if (resampler == Resampler::systematic) return systematic_ancestors(weights, rng.uniform(), n, workers);
  std::vector<double> uniforms(n);
  for (auto& u : uniforms) u = rng.uniform();
  return multinomial_ancestors(weights, uniforms, workers);
}

void gather_rows(std::vector<double>& rows, std::size_t dim, std::span<const std::size_t> ancestors,
                 unsigned workers) {
  std::vector<double> out(ancestors.size() * dim);
  parallel_for_each(ancestors.size(), workers, [&](std::size_t i) {
    std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(ancestors[i] * dim), dim,
                out.begin() + static_cast<std::ptrdiff_t>(i * dim));
  });
  rows = std::move(out);
}

}  // namespace

Resampler parse_resampler(std::string_view name) {
  if (name == "multinomial") return Resampler::multinomial;
  if (name == "systematic") return Resampler::systematic;
  throw ConfigError("unknown resampler '" + std::string(name) + "' (expected multinomial or systematic)");
}

std::string_view to_string(Resampler resampler) noexcept {
  return resampler == Resampler::systematic ? "systematic" : "multinomial";
}

std::vector<std::size_t> multinomial_ancestors(std::span<const double> weights, std::span<const double> uniforms,
                                               unsigned workers) {
  const auto cdf = checked_cdf(weights, workers);
  const double total = cdf.back();
  const std::size_t fallback = last_positive(weights);
  std::vector<std::size_t> ancestors(uniforms.size());
  parallel_for_each(uniforms.size(), workers,
                    [&](std::size_t k) { ancestors[k] = invert(cdf, uniforms[k] * total, fallback); });
  return ancestors;
}

std::vector<std::size_t> systematic_ancestors(std::span<const double> weights, double u, std::size_t count,
                                              unsigned workers) {
  const auto cdf = checked_cdf(weights, workers);
  const double total = cdf.back();
  const std::size_t fallback = last_positive(weights);
  const auto n = static_cast<double>(count);
  std::vector<std::size_t> ancestors(count);
  parallel_for_each(count, workers, [&](std::size_t k) {
    ancestors[k] = invert(cdf, (u + static_cast<double>(k)) / n * total, fallback);
  });
  return ancestors;
}

std::vector<std::size_t> resample(WeightedPopulation& population, Resampler resampler, RandomStream& rng,
                                  Precision precision, unsigned workers) {
  const auto normalized = normalize_log_weights(population.log_weights, precision, workers);
  auto ancestors = draw_ancestors(normalized.weights, resampler, rng, workers);
  gather_rows(population.particles, population.dim, ancestors, workers);
  std::fill(population.log_weights.begin(), population.log_weights.end(), 0.0);
  population.ess_ratio = 1.0;
  return ancestors;
}

std::vector<std::size_t> offspring_counts(std::span<const std::size_t> ancestors, std::size_t population_size) {
  std::vector<std::size_t> counts(population_size, 0);
  for (std::size_t a : ancestors) {
    if (a >= population_size) throw ConfigError("ancestor index out of range");
    ++counts[a];
  }
  return counts;
}

void SmcSamplerConfig::validate() const {
  if (particles < 2) throw ConfigError("smc-sampler: particles must be at least 2");
  if (temperatures < 1) throw ConfigError("smc-sampler: temperatures must be at least 1");
  if (!(ess_threshold >= 0.0 && ess_threshold <= 1.0)) throw ConfigError("smc-sampler: ess_threshold must be in [0, 1]");
  if (!(rwm_scale > 0.0) || !std::isfinite(rwm_scale)) throw ConfigError("smc-sampler: rwm_scale must be positive");
  if (workers == 0) throw ConfigError("smc-sampler: workers must be at least 1");
}

SmcSamplerResult smc_sampler_run(const SmcSamplerConfig& config, const Target& target) {
  config.validate();
  const std::size_t n = config.particles;
  const std::size_t dim = target.dim();
  const auto betas = make_ladder(config.temperatures).betas;
  auto streams = make_streams(config.generator, config.seed, n + 1);
  RandomStream control = streams.back();
  streams.pop_back();

  WeightedPopulation pop;
  pop.dim = dim;
  pop.particles.resize(n * dim);
  pop.log_weights.assign(n, 0.0);
  std::vector<double> cache(n);
  parallel_for_each(n, config.workers, [&](std::size_t i) {
    target.sample_initial(pop.particle(i), streams[i]);
    cache[i] = target.log_density(pop.particle(i), config.precision);
  });

  SmcSamplerResult result;
  std::vector<double> scratch(n * dim);
  std::vector<std::uint64_t> accepts(n, 0);
  double previous_increment = 0.0;
  double previous_beta = 0.0;
  for (std::size_t t = 1; t <= config.temperatures; ++t) {
    const double beta = betas[t - 1];
    const double delta = beta - previous_beta;
    previous_beta = beta;
    parallel_for_each(n, config.workers, [&](std::size_t i) { pop.log_weights[i] += delta * cache[i]; });
    NormalizedWeights normalized;
    try {
      normalized = normalize_log_weights(pop.log_weights, config.precision, config.workers);
    } catch (const DegeneratePopulation& e) {
      throw DegeneratePopulation("smc-sampler: temperature " + std::to_string(t) + ": " + e.what());
    }
    const double increment = normalized.log_norm_constant_increment - previous_increment;
    result.log_evidence_increments.push_back(increment);
    result.log_evidence += increment;
    pop.ess_ratio = ess(normalized, config.precision, config.workers) / static_cast<double>(n);
    result.ess_trace.push_back(pop.ess_ratio);
    if (pop.ess_ratio < config.ess_threshold) {
      const auto ancestors = draw_ancestors(normalized.weights, config.resampler, control, config.workers);
      gather_rows(pop.particles, dim, ancestors, config.workers);
      gather_rows(cache, 1, ancestors, config.workers);
      std::fill(pop.log_weights.begin(), pop.log_weights.end(), 0.0);
      pop.ess_ratio = 1.0;
      previous_increment = 0.0;
      result.resample_events.push_back(t);
    } else {
      previous_increment = normalized.log_norm_constant_increment;
    }
    parallel_for_each(n, config.workers, [&](std::size_t i) {
      std::span<double> tmp(scratch.data() + i * dim, dim);
      for (std::size_t s = 0; s < config.mcmc_steps; ++s) {
        if (rwm_step(pop.particle(i), cache[i], beta, target, config.rwm_scale, streams[i], tmp, config.precision)) {
          ++accepts[i];
        }
      }
    });
  }
  result.weights = normalize_log_weights(pop.log_weights, config.precision, config.workers).weights;
  std::uint64_t accepted = 0;
  for (auto a : accepts) accepted += a;
  const double moves = static_cast<double>(n) * static_cast<double>(config.temperatures) *
                       static_cast<double>(config.mcmc_steps);
  result.acceptance_rate = moves > 0.0 ? static_cast<double>(accepted) / moves : 0.0;
  result.population = std::move(pop);
  return result;
}

void PfilterConfig::validate() const {
  if (particles < 2) throw ConfigError("pfilter: particles must be at least 2");
  if (!(ess_threshold >= 0.0 && ess_threshold <= 1.0)) throw ConfigError("pfilter: ess_threshold must be in [0, 1]");
  if (workers == 0) throw ConfigError("pfilter: workers must be at least 1");
}

PfilterResult particle_filter_run(const PfilterConfig& config, const StateSpaceModel& model,
                                  std::span<const double> observations, std::size_t length) {
  config.validate();
  const std::size_t n = config.particles;
  const std::size_t dim = model.state_dim();
  const std::size_t ydim = model.obs_dim();
  if (length < 1) throw ConfigError("pfilter: at least one observation is required");
  if (observations.size() != length * ydim) throw ConfigError("pfilter: observation array does not match length x obs_dim");
  auto streams = make_streams(config.generator, config.seed, n + 1);
  RandomStream control = streams.back();
  streams.pop_back();

  std::vector<double> x(n * dim);
  std::vector<double> next(n * dim);
  parallel_for_each(n, config.workers,
                    [&](std::size_t i) { model.sample_initial(std::span<double>(x.data() + i * dim, dim), streams[i]); });
  std::vector<double> log_weights(n, 0.0);
  std::vector<double> column(n);

  PfilterResult result;
  result.length = length;
  result.state_dim = dim;
  result.means.resize(length * dim);
  result.stds.resize(length * dim);
  double previous_increment = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    const std::span<const double> y = observations.subspan(t * ydim, ydim);
    parallel_for_each(n, config.workers, [&](std::size_t i) {
      std::span<double> xi(next.data() + i * dim, dim);
      model.sample_transition(std::span<const double>(x.data() + i * dim, dim), xi, streams[i]);
      log_weights[i] += model.log_obs_density(xi, y, config.precision);
    });
    std::swap(x, next);
    NormalizedWeights normalized;
    try {
      normalized = normalize_log_weights(log_weights, config.precision, config.workers);
    } catch (const DegeneratePopulation& e) {
      throw DegeneratePopulation("pfilter: time step " + std::to_string(t + 1) + ": " + e.what());
    }
    result.log_likelihood += normalized.log_norm_constant_increment - previous_increment;
    for (std::size_t k = 0; k < dim; ++k) {
      for (std::size_t i = 0; i < n; ++i) column[i] = x[i * dim + k];
      const double mean = weighted_sum(normalized.weights, column, config.precision, config.workers);
      for (std::size_t i = 0; i < n; ++i) column[i] = (column[i] - mean) * (column[i] - mean);
      const double var = weighted_sum(normalized.weights, column, config.precision, config.workers);
      result.means[t * dim + k] = mean;
      result.stds[t * dim + k] = std::sqrt(std::max(var, 0.0));
    }
    const double ratio = ess(normalized, config.precision, config.workers) / static_cast<double>(n);
    result.ess_trace.push_back(ratio);
    if (ratio < config.ess_threshold) {
      const auto ancestors = draw_ancestors(normalized.weights, config.resampler, control, config.workers);
      gather_rows(x, dim, ancestors, config.workers);
      std::fill(log_weights.begin(), log_weights.end(), 0.0);
      previous_increment = 0.0;
      result.resample_events.push_back(t + 1);
    } else {
      previous_increment = normalized.log_norm_constant_increment;
    }
  }
  return result;
}

}  // namespace popmc
