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

#ifndef POPMC_POPMCMC_HPP
#define POPMC_POPMCMC_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "popmc/models.hpp"
#include "popmc/parallel.hpp"
#include "popmc/prng.hpp"

namespace popmc {

/// Ascending inverse temperatures ending at exactly 1.
struct TemperatureLadder {
  std::vector<double> betas;

  [[nodiscard]] std::size_t size() const noexcept { return betas.size(); }
};

/// beta_i = (i / M)^2 for i = 1..M.
[[nodiscard]] TemperatureLadder make_ladder(std::size_t chains);

/// Fills `proposal` with a symmetric proposal from `current`.
using ProposalFn = std::function<void(std::span<const double> current, std::span<double> proposal,
                                      RandomStream& rng)>;

/// x + scale * z with z standard normal in every coordinate.
[[nodiscard]] ProposalFn gaussian_random_walk(double scale);

/// One Metropolis step on beta * log pi*. `cached_log_target` holds log pi*
/// at `state` on entry and at the (possibly new) state on exit. Exactly one
/// uniform is drawn after the proposal; a -inf proposal is always rejected
/// and a proposal at least as likely as the current state is always taken.
/// `scratch` must have the state's length.
bool metropolis_step(std::span<double> state, double& cached_log_target, double beta,
                     const Target& target, const ProposalFn& proposal, RandomStream& rng,
                     std::span<double> scratch, Precision precision = Precision::f64);

/// Gaussian random-walk special case of metropolis_step.
bool rwm_step(std::span<double> state, double& cached_log_target, double beta, const Target& target,
              double scale, RandomStream& rng, std::span<double> scratch,
              Precision precision = Precision::f64);

/// M chains of dimension `dim`, stored chain-major, with log pi* cached at
/// every state.
struct ChainPopulation {
  std::size_t dim = 0;
  std::vector<double> states;
  std::vector<double> cached_log_target;
  TemperatureLadder ladder;

  [[nodiscard]] std::size_t chains() const noexcept { return cached_log_target.size(); }
  [[nodiscard]] std::span<double> state(std::size_t i) noexcept {
    return {states.data() + i * dim, dim};
  }
  [[nodiscard]] std::span<const double> state(std::size_t i) const noexcept {
    return {states.data() + i * dim, dim};
  }
};

/// Zero-based disjoint pairs for one exchange pass. Parity 0 pairs
/// (0,1), (2,3), ...; parity 1 pairs (1,2), (3,4), ... and, for even M,
/// the wrap pair (M-1, 0). For odd M the wrap pair would share chain M-1
/// with (M-2, M-1), so it is left out.
[[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> exchange_pairs(std::size_t chains,
                                                                              unsigned parity);

/// log alpha for swapping chains i and j; zero when the temperatures or the
/// cached values coincide.
[[nodiscard]] double exchange_log_alpha(double beta_i, double beta_j, double log_target_i,
                                        double log_target_j) noexcept;

struct ExchangeOutcome {
  unsigned parity = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::uint8_t> accepted;  ///< one flag per pair
};

/// Draws the parity from `control`, then attempts every pair of that parity.
/// Pair (i, j) takes its uniform from `chain_streams[i]`. States and caches
/// are swapped, never re-evaluated.
ExchangeOutcome exchange_pass(ChainPopulation& population, std::span<RandomStream> chain_streams,
                              RandomStream& control, unsigned workers = 1);

struct PopMcmcConfig {
  std::size_t chains = 200;
  std::size_t iterations = 8192;  ///< retained samples from the last chain
  std::size_t burn_in = 0;        ///< extra leading iterations discarded
  double rwm_scale = 1.0;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  Precision precision = Precision::f64;
  GeneratorKind generator = GeneratorKind::mrg32k3a;
  bool record_all_chains = false;

  /// Throws ConfigError on zero chains or iterations or a non-positive scale.
  void validate() const;
};

struct PopMcmcResult {
  std::size_t dim = 0;
  std::vector<double> samples;             ///< iterations x dim, last chain
  std::vector<double> sample_log_target;   ///< log pi* of each retained sample
  std::vector<double> all_chains;          ///< iterations x chains x dim when recorded
  std::vector<double> acceptance_rates;    ///< per chain, over all iterations
  std::vector<std::uint64_t> swap_attempts;  ///< index i: pair (i, i+1 mod M)
  std::vector<std::uint64_t> swap_accepts;
  ChainPopulation final_population;
};

/// Streams 0..M-1 drive the chains, stream M the exchange parity. Chains
/// start from the target's initial sampler. Each iteration runs one
/// Metropolis step per chain in parallel, then one exchange pass.
[[nodiscard]] PopMcmcResult run_popmcmc(const PopMcmcConfig& config, const Target& target);
[[nodiscard]] PopMcmcResult run_popmcmc(const PopMcmcConfig& config, const Target& target,
                                        const ProposalFn& proposal);

}  // namespace popmc

#endif
