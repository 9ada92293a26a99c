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

#include "popmc/popmcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "popmc/error.hpp"

namespace popmc {
namespace {

template <class Propose>
bool metropolis_impl(std::span<double> state, double& cached, double beta, const Target& target,
                     Propose&& propose, RandomStream& rng, std::span<double> scratch,
                     Precision precision) {
  propose(std::span<const double>(state), scratch, rng);
  const double proposed = target.log_density(scratch, precision);
  const double u = rng.uniform();
  if (proposed == -std::numeric_limits<double>::infinity() || std::isnan(proposed)) return false;
  const double log_ratio = beta * (proposed - cached);
  if (!(log_ratio >= 0.0) && !(std::log(u) < log_ratio)) return false;
  std::copy(scratch.begin(), scratch.end(), state.begin());
  cached = proposed;
  return true;
}

void gaussian_propose(std::span<const double> current, std::span<double> proposal, RandomStream& rng,
                      double scale) {
  for (std::size_t d = 0; d < current.size(); ++d) proposal[d] = current[d] + scale * rng.normal();
}

}  // namespace

TemperatureLadder make_ladder(std::size_t chains) {
  if (chains == 0) throw ConfigError("temperature ladder needs at least one chain");
  TemperatureLadder ladder;
  ladder.betas.resize(chains);
  const auto m = static_cast<double>(chains);
  for (std::size_t i = 1; i <= chains; ++i) {
    const double r = static_cast<double>(i) / m;
    ladder.betas[i - 1] = r * r;
  }
  ladder.betas.back() = 1.0;
  return ladder;
}

ProposalFn gaussian_random_walk(double scale) {
  return [scale](std::span<const double> current, std::span<double> proposal, RandomStream& rng) {
    gaussian_propose(current, proposal, rng, scale);
  };
}

bool metropolis_step(std::span<double> state, double& cached_log_target, double beta,
                     const Target& target, const ProposalFn& proposal, RandomStream& rng,
                     std::span<double> scratch, Precision precision) {
  return metropolis_impl(state, cached_log_target, beta, target, proposal, rng, scratch, precision);
}

bool rwm_step(std::span<double> state, double& cached_log_target, double beta, const Target& target,
              double scale, RandomStream& rng, std::span<double> scratch, Precision precision) {
  return metropolis_impl(
      state, cached_log_target, beta, target,
      [scale](std::span<const double> x, std::span<double> y, RandomStream& r) { gaussian_propose(x, y, r, scale); },
      rng, scratch, precision);
}

std::vector<std::pair<std::size_t, std::size_t>> exchange_pairs(std::size_t chains, unsigned parity) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (chains < 2) return pairs;
  for (std::size_t i = parity & 1U; i + 1 < chains; i += 2) pairs.emplace_back(i, i + 1);
  if ((parity & 1U) == 1U && chains % 2 == 0) pairs.emplace_back(chains - 1, 0);
  return pairs;
}

double exchange_log_alpha(double beta_i, double beta_j, double log_target_i, double log_target_j) noexcept {
  if (beta_i == beta_j || log_target_i == log_target_j) return 0.0;
  const double value = (beta_i - beta_j) * (log_target_j - log_target_i);
  return std::isnan(value) ? -std::numeric_limits<double>::infinity() : value;
}

ExchangeOutcome exchange_pass(ChainPopulation& population, std::span<RandomStream> chain_streams,
                              RandomStream& control, unsigned workers) {
  const std::size_t m = population.chains();
  if (chain_streams.size() != m) throw ConfigError("exchange_pass: one stream per chain is required");
  ExchangeOutcome outcome;
  outcome.parity = control.uniform() < 0.5 ? 0U : 1U;
  outcome.pairs = exchange_pairs(m, outcome.parity);
  outcome.accepted.assign(outcome.pairs.size(), 0);
  const auto& betas = population.ladder.betas;
  parallel_for_each(outcome.pairs.size(), workers, [&](std::size_t p) {
    const auto [i, j] = outcome.pairs[p];
    const double log_alpha =
        exchange_log_alpha(betas[i], betas[j], population.cached_log_target[i], population.cached_log_target[j]);
    const double u = chain_streams[i].uniform();
    if (log_alpha >= 0.0 || std::log(u) < log_alpha) {
      auto a = population.state(i);
      auto b = population.state(j);
      std::swap_ranges(a.begin(), a.end(), b.begin());
      std::swap(population.cached_log_target[i], population.cached_log_target[j]);
      outcome.accepted[p] = 1;
    }
  });
  return outcome;
}

void PopMcmcConfig::validate() const {
  if (chains == 0) throw ConfigError("popmcmc: chains must be at least 1");
  if (iterations == 0) throw ConfigError("popmcmc: iterations must be at least 1");
  if (!(rwm_scale > 0.0) || !std::isfinite(rwm_scale)) throw ConfigError("popmcmc: rwm_scale must be positive");
  if (workers == 0) throw ConfigError("popmcmc: workers must be at least 1");
}

namespace {

template <class Step>
PopMcmcResult run_impl(const PopMcmcConfig& config, const Target& target, Step&& step) {
  config.validate();
  const std::size_t m = config.chains;
  const std::size_t dim = target.dim();
  auto streams = make_streams(config.generator, config.seed, m + 1);
  RandomStream control = streams.back();
  streams.pop_back();

  ChainPopulation pop;
  pop.dim = dim;
  pop.ladder = make_ladder(m);
  pop.states.resize(m * dim);
  pop.cached_log_target.resize(m);
  parallel_for_each(m, config.workers, [&](std::size_t i) {
    target.sample_initial(pop.state(i), streams[i]);
    pop.cached_log_target[i] = target.log_density(pop.state(i), config.precision);
  });

  PopMcmcResult result;
  result.dim = dim;
  result.samples.resize(config.iterations * dim);
  result.sample_log_target.resize(config.iterations);
  if (config.record_all_chains) result.all_chains.resize(config.iterations * m * dim);
  std::vector<std::uint64_t> accepts(m, 0);
  result.swap_attempts.assign(m, 0);
  result.swap_accepts.assign(m, 0);
  std::vector<double> scratch(m * dim);

  const std::size_t total = config.burn_in + config.iterations;
  for (std::size_t it = 0; it < total; ++it) {
    parallel_for_each(m, config.workers, [&](std::size_t i) {
      std::span<double> tmp(scratch.data() + i * dim, dim);
      if (step(pop.state(i), pop.cached_log_target[i], pop.ladder.betas[i], streams[i], tmp)) ++accepts[i];
    });
    const auto outcome = exchange_pass(pop, streams, control, config.workers);
    for (std::size_t p = 0; p < outcome.pairs.size(); ++p) {
      const auto [i, j] = outcome.pairs[p];
      const std::size_t slot = j == 0 ? m - 1 : i;
      ++result.swap_attempts[slot];
      result.swap_accepts[slot] += outcome.accepted[p];
    }
    if (it < config.burn_in) continue;
    const std::size_t row = it - config.burn_in;
    const auto last = pop.state(m - 1);
    std::copy(last.begin(), last.end(), result.samples.begin() + static_cast<std::ptrdiff_t>(row * dim));
    result.sample_log_target[row] = pop.cached_log_target[m - 1];
    if (config.record_all_chains) {
      std::copy(pop.states.begin(), pop.states.end(),
                result.all_chains.begin() + static_cast<std::ptrdiff_t>(row * m * dim));
    }
  }
  result.acceptance_rates.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    result.acceptance_rates[i] = static_cast<double>(accepts[i]) / static_cast<double>(total);
  }
  result.final_population = std::move(pop);
  return result;
}

}  // namespace

PopMcmcResult run_popmcmc(const PopMcmcConfig& config, const Target& target) {
  const double scale = config.rwm_scale;
  const Precision precision = config.precision;
  return run_impl(config, target,
                  [&](std::span<double> x, double& cached, double beta, RandomStream& rng, std::span<double> tmp) {
                    return rwm_step(x, cached, beta, target, scale, rng, tmp, precision);
                  });
}

PopMcmcResult run_popmcmc(const PopMcmcConfig& config, const Target& target, const ProposalFn& proposal) {
  const Precision precision = config.precision;
  return run_impl(config, target,
                  [&](std::span<double> x, double& cached, double beta, RandomStream& rng, std::span<double> tmp) {
                    return metropolis_step(x, cached, beta, target, proposal, rng, tmp, precision);
                  });
}

}  // namespace popmc
