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

#include "popmc/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace popmc {
namespace {

// Leaves per parallel block. A power of two, so block boundaries fall on
// split points of the global tree and blocking never changes the result.
constexpr std::size_t kBlock = std::size_t{1} << 14;
constexpr std::size_t kLeafRun = 32;

template <class Real, class In>
Real tree_sum(const In* values, std::size_t n) {
  if (n == 0) return Real{0};
  if (n <= kLeafRun) {
    // Level-by-level pairing with the odd tail carried up is the same
    // association as splitting at the largest power of two below n.
    Real buf[kLeafRun];
    for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<Real>(values[i]);
    std::size_t len = n;
    while (len > 1) {
      const std::size_t half = len / 2;
      for (std::size_t i = 0; i < half; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
      if (len & 1U) buf[half] = buf[len - 1];
      len = half + (len & 1U);
    }
    return buf[0];
  }
  const std::size_t split = std::bit_floor(n - 1);
  return tree_sum<Real>(values, split) + tree_sum<Real>(values + split, n - split);
}

template <class Real, class In>
Real blocked_tree_sum(const In* values, std::size_t n, unsigned workers) {
  if (n <= kBlock) return tree_sum<Real>(values, n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<Real> partial(blocks);
  parallel_for_chunks(blocks, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const std::size_t offset = b * kBlock;
      partial[b] = tree_sum<Real>(values + offset, std::min(kBlock, n - offset));
    }
  });
  return tree_sum<Real>(partial.data(), blocks);
}

template <class Real>
std::vector<double> prefix_impl(std::span<const double> values, unsigned workers) {
  const std::size_t n = values.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  // levels[p][j] is the tree sum of the aligned block [j 2^p, (j+1) 2^p).
  std::vector<std::vector<Real>> levels;
  levels.emplace_back(values.begin(), values.end());
  while (levels.back().size() >= 2) {
    const auto& prev = levels.back();
    std::vector<Real> next(prev.size() / 2);
    for (std::size_t j = 0; j < next.size(); ++j) next[j] = prev[2 * j] + prev[2 * j + 1];
    levels.push_back(std::move(next));
  }
  parallel_for_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      // Prefix of length L is the right-nested sum of its binary blocks,
      // largest first; accumulate from the smallest (rightmost) block.
      const std::size_t length = i + 1;
      Real acc{0};
      bool first = true;
      for (std::size_t p = 0; (length >> p) != 0; ++p) {
        if (((length >> p) & 1U) == 0) continue;
        const std::size_t start = (length >> (p + 1)) << (p + 1);
        const Real block = levels[p][start >> p];
        acc = first ? block : block + acc;
        first = false;
      }
      out[i] = static_cast<double>(acc);
    }
  });
  return out;
}

template <class Real>
NormalizedWeights normalize_impl(std::span<const double> log_weights, double max_log_weight,
                                 unsigned workers) {
  const std::size_t n = log_weights.size();
  std::vector<Real> scaled(n);
  const Real shift = static_cast<Real>(max_log_weight);
  parallel_for_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      scaled[i] = std::exp(static_cast<Real>(log_weights[i]) - shift);
    }
  });
  const Real total = blocked_tree_sum<Real>(scaled.data(), n, workers);
  NormalizedWeights out;
  out.weights.resize(n);
  parallel_for_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out.weights[i] = static_cast<double>(scaled[i] / total);
  });
  out.log_norm_constant_increment = static_cast<double>(shift) +
                                    static_cast<double>(std::log(total)) -
                                    std::log(static_cast<double>(n));
  return out;
}

template <class Real>
double product_sum(std::span<const double> a, std::span<const double> b, unsigned workers) {
  std::vector<Real> terms(a.size());
  parallel_for_chunks(a.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      terms[i] = static_cast<Real>(a[i]) * static_cast<Real>(b[i]);
    }
  });
  return static_cast<double>(blocked_tree_sum<Real>(terms.data(), terms.size(), workers));
}

}  // namespace

Precision parse_precision(std::string_view name) {
  if (name == "double") return Precision::f64;
  if (name == "single") return Precision::f32;
  throw ConfigError("unknown precision '" + std::string(name) + "' (expected single or double)");
}

std::string_view to_string(Precision precision) noexcept {
  return precision == Precision::f32 ? "single" : "double";
}

void parallel_for_chunks(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t chunks = std::min<std::size_t>(std::max(workers, 1U), n);
  if (chunks == 1) {
    body(0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  const auto count = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for num_threads(static_cast<int>(chunks)) schedule(static, 1)
  for (std::ptrdiff_t c = 0; c < count; ++c) {
    const auto chunk = static_cast<std::size_t>(c);
    try {
      body(n * chunk / chunks, n * (chunk + 1) / chunks);
    } catch (...) {
      errors[chunk] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double pairwise_sum(std::span<const double> values, Precision precision, unsigned workers) {
  if (precision == Precision::f32) {
    return static_cast<double>(blocked_tree_sum<float>(values.data(), values.size(), workers));
  }
  return blocked_tree_sum<double>(values.data(), values.size(), workers);
}

float pairwise_sum(std::span<const float> values, unsigned workers) {
  return blocked_tree_sum<float>(values.data(), values.size(), workers);
}

std::vector<double> inclusive_prefix_sum(std::span<const double> values, Precision precision,
                                         unsigned workers) {
  return precision == Precision::f32 ? prefix_impl<float>(values, workers)
                                     : prefix_impl<double>(values, workers);
}

NormalizedWeights normalize_log_weights(std::span<const double> log_weights, Precision precision,
                                        unsigned workers) {
  double max_log_weight = -std::numeric_limits<double>::infinity();
  for (const double lw : log_weights) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      throw DegeneratePopulation("log weight is NaN or +inf");
    }
    max_log_weight = std::max(max_log_weight, lw);
  }
  if (!std::isfinite(max_log_weight)) {
    throw DegeneratePopulation("every log weight is -inf");
  }
  if (precision == Precision::f32) {
    return normalize_impl<float>(log_weights, max_log_weight, workers);
  }
  return normalize_impl<double>(log_weights, max_log_weight, workers);
}

double ess(std::span<const double> weights, Precision precision, unsigned workers) {
  const double sum_sq = precision == Precision::f32 ? product_sum<float>(weights, weights, workers)
                                                    : product_sum<double>(weights, weights, workers);
  return 1.0 / sum_sq;
}

double weighted_sum(std::span<const double> weights, std::span<const double> values, Precision precision,
                    unsigned workers) {
  if (weights.size() != values.size()) throw ConfigError("weighted_sum: length mismatch");
  return precision == Precision::f32 ? product_sum<float>(weights, values, workers)
                                     : product_sum<double>(weights, values, workers);
}

ImportanceEstimate importance_estimate_from_terms(std::span<const double> log_weights,
                                                  std::span<const double> phi_values,
                                                  Precision precision, unsigned workers) {
  if (log_weights.size() != phi_values.size()) {
    throw ConfigError("importance estimate: weights and test values differ in length");
  }
  const NormalizedWeights normalized = normalize_log_weights(log_weights, precision, workers);
  ImportanceEstimate out;
  out.estimate = weighted_sum(normalized.weights, phi_values, precision, workers);
  out.ess = ess(normalized, precision, workers);
  out.log_norm_constant_increment = normalized.log_norm_constant_increment;

  std::vector<double> squared_weights(log_weights.size());
  std::vector<double> squared_residuals(log_weights.size());
  parallel_for_chunks(log_weights.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double w = normalized.weights[i];
      const double r = phi_values[i] - out.estimate;
      squared_weights[i] = w * w;
      squared_residuals[i] = r * r;
    }
  });
  out.standard_error = std::sqrt(weighted_sum(squared_weights, squared_residuals, precision, workers));
  return out;
}

}  // namespace popmc
