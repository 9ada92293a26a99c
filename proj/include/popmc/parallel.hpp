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

#ifndef POPMC_PARALLEL_HPP
#define POPMC_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "popmc/error.hpp"
#include "popmc/prng.hpp"

namespace popmc {

/// Arithmetic width used for density evaluation and accumulation in a run.
enum class Precision { f32, f64 };

[[nodiscard]] Precision parse_precision(std::string_view name);
[[nodiscard]] std::string_view to_string(Precision precision) noexcept;

/// Splits [0, n) into at most `workers` contiguous chunks and runs
/// `body(begin, end)` on each, concurrently. Rethrows the exception of the
/// lowest-numbered failing chunk after all chunks finish.
void parallel_for_chunks(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t, std::size_t)>& body);

/// Runs `kernel(i)` for every i in [0, n). A throwing element stops its
/// chunk; the lowest failing index is rethrown as ElementFailure.
template <class Kernel>
void parallel_for_each(std::size_t n, unsigned workers, Kernel&& kernel) {
  parallel_for_chunks(n, workers, [&kernel](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        kernel(i);
      } catch (const ElementFailure&) {
        throw;
      } catch (const Error& e) {
        throw ElementFailure(e.kind(), i, e.what());
      } catch (const std::exception& e) {
        throw ElementFailure(ErrorKind::internal, i, e.what());
      }
    }
  });
}

/// Elements paired one-to-one with their private random streams.
template <class T>
struct Population {
  std::vector<T> items;
  std::vector<RandomStream> streams;
};

/// Applies `kernel(item, stream)` to every element. The kernel may only touch
/// its own element and stream, so the result is identical for any `workers`.
template <class T, class Kernel>
void par_map(Population<T>& population, unsigned workers, Kernel&& kernel) {
  if (population.items.size() != population.streams.size()) {
    throw ConfigError("population items and streams differ in length");
  }
  parallel_for_each(population.items.size(), workers, [&](std::size_t i) {
    kernel(population.items[i], population.streams[i]);
  });
}

/// Balanced binary-tree sum. The tree depends only on the length: a range of
/// n > 1 values splits at the largest power of two below n. Empty input
/// sums to zero. In f32 mode every value is rounded to float and all
/// additions happen in float.
[[nodiscard]] double pairwise_sum(std::span<const double> values, Precision precision = Precision::f64,
                                  unsigned workers = 1);
[[nodiscard]] float pairwise_sum(std::span<const float> values, unsigned workers = 1);

/// out[i] is bit-identical to pairwise_sum(values[0..i]).
[[nodiscard]] std::vector<double> inclusive_prefix_sum(std::span<const double> values,
                                                       Precision precision = Precision::f64,
                                                       unsigned workers = 1);

struct NormalizedWeights {
  std::vector<double> weights;
  /// log of the mean unnormalized weight.
  double log_norm_constant_increment = 0.0;
};

/// exp(lw - max) / sum. -inf entries get weight zero. Throws
/// DegeneratePopulation when every entry is -inf or any entry is NaN or +inf.
[[nodiscard]] NormalizedWeights normalize_log_weights(std::span<const double> log_weights,
                                                      Precision precision = Precision::f64,
                                                      unsigned workers = 1);

/// 1 / sum(w^2) for normalized weights.
[[nodiscard]] double ess(std::span<const double> weights, Precision precision = Precision::f64,
                         unsigned workers = 1);
[[nodiscard]] inline double ess(const NormalizedWeights& w, Precision precision = Precision::f64,
                                unsigned workers = 1) {
  return ess(w.weights, precision, workers);
}

/// sum(w_i * v_i) through the pairwise tree.
[[nodiscard]] double weighted_sum(std::span<const double> weights, std::span<const double> values,
                                  Precision precision = Precision::f64, unsigned workers = 1);

/// (1/N) sum phi(x_i).
template <class Phi>
[[nodiscard]] double mc_estimate(std::span<const double> samples, Phi&& phi,
                                 Precision precision = Precision::f64, unsigned workers = 1) {
  if (samples.empty()) throw ConfigError("mc_estimate needs at least one sample");
  std::vector<double> values(samples.size());
  parallel_for_each(samples.size(), workers, [&](std::size_t i) { values[i] = phi(samples[i]); });
  return pairwise_sum(values, precision, workers) / static_cast<double>(samples.size());
}

struct ImportanceEstimate {
  double estimate = 0.0;
  /// Delta-method standard error of the self-normalized estimate.
  double standard_error = 0.0;
  double ess = 0.0;
  double log_norm_constant_increment = 0.0;
};

/// Self-normalized importance estimate from per-sample log weights and
/// test-function values.
[[nodiscard]] ImportanceEstimate importance_estimate_from_terms(std::span<const double> log_weights,
                                                                std::span<const double> phi_values,
                                                                Precision precision = Precision::f64,
                                                                unsigned workers = 1);

/// sum W_i phi(x_i), with W from log_target(x) - log_proposal(x).
template <class LogTarget, class LogProposal, class Phi>
[[nodiscard]] ImportanceEstimate importance_estimate(std::span<const double> samples,
                                                     LogTarget&& log_target,
                                                     LogProposal&& log_proposal, Phi&& phi,
                                                     Precision precision = Precision::f64,
                                                     unsigned workers = 1) {
  if (samples.empty()) throw ConfigError("importance_estimate needs at least one sample");
  std::vector<double> log_weights(samples.size());
  std::vector<double> values(samples.size());
  parallel_for_each(samples.size(), workers, [&](std::size_t i) {
    log_weights[i] = log_target(samples[i]) - log_proposal(samples[i]);
    values[i] = phi(samples[i]);
  });
  return importance_estimate_from_terms(log_weights, values, precision, workers);
}

}  // namespace popmc

#endif
