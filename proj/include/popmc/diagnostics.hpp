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

#ifndef POPMC_DIAGNOSTICS_HPP
#define POPMC_DIAGNOSTICS_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace popmc {

/// -1 marks a sample outside every capture ball.
using ModeId = int;
inline constexpr ModeId kUnassigned = -1;

/// The 24 relabelings of the true mixture means and the 12 ordered pairs
/// of distinct means seen in the (mu_1, mu_2) marginal.
struct ModeAtlas {
  std::array<double, 4> true_means{};
  std::vector<std::array<double, 4>> full_modes;      ///< lexicographic permutation order
  std::vector<std::array<double, 2>> marginal_modes;  ///< lexicographic (index) order
  double capture_radius = 1.0;

  /// Throws ConfigError unless the means are strictly increasing and the
  /// radius is positive and below half the smallest gap.
  [[nodiscard]] static ModeAtlas make(const std::array<double, 4>& true_means, double capture_radius = 1.0);
  [[nodiscard]] static ModeAtlas standard(double capture_radius = 1.0);
};

/// Index of the nearest full mode, or kUnassigned beyond the capture radius.
[[nodiscard]] ModeId assign_mode(std::span<const double> sample, const ModeAtlas& atlas);
/// Same on the first two coordinates against the marginal modes.
[[nodiscard]] ModeId assign_marginal_mode(std::span<const double> sample, const ModeAtlas& atlas);

struct ModeHistogram {
  std::vector<double> mass;  ///< per mode: sample count or weight sum
  double unassigned = 0.0;

  [[nodiscard]] double assigned_total() const noexcept;
  /// Largest over smallest mass; +inf when some mode is empty.
  [[nodiscard]] double max_min_ratio() const noexcept;
  [[nodiscard]] std::size_t occupied() const noexcept;
};

/// Histogram of `samples` (n x dim, dim >= 4 for full modes, >= 2 for
/// marginal). With `weights` the bins hold weight sums, otherwise counts.
[[nodiscard]] ModeHistogram mode_counts(std::span<const double> samples, std::size_t dim,
                                        const ModeAtlas& atlas, bool marginal,
                                        std::span<const double> weights = {});

/// Mode label of each row.
[[nodiscard]] std::vector<ModeId> assign_modes(std::span<const double> samples, std::size_t dim,
                                               const ModeAtlas& atlas);

/// Length of the shortest prefix whose labels cover 0..mode_count-1, or
/// nullopt if the sequence never covers them all.
[[nodiscard]] std::optional<std::size_t> traversal_time(std::span<const ModeId> modes,
                                                        std::size_t mode_count = 24);

/// k * H_k, the expected number of uniform draws needed to see all k labels.
[[nodiscard]] double coupon_expectation(std::size_t k);

struct EstimatorReport {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double standard_error = 0.0;
};

/// Needs at least two runs.
[[nodiscard]] EstimatorReport estimator_report(std::span<const double> runs);

/// Gaussian kernel density estimate of the (mu_1, mu_2) marginal on a
/// regular grid, row-major with x varying fastest.
struct DensityGrid {
  double lower = -10.0;
  double upper = 10.0;
  std::size_t points = 81;
  double bandwidth = 0.25;
  std::vector<double> density;  ///< points x points

  [[nodiscard]] double coordinate(std::size_t i) const noexcept;
};

/// Kernel contributions beyond four bandwidths are dropped. Weights default
/// to equal; the grid integrates to about one when the mass lies inside it.
[[nodiscard]] DensityGrid marginal_density_grid(std::span<const double> samples, std::size_t dim,
                                                std::span<const double> weights = {},
                                                DensityGrid grid = {});

}  // namespace popmc

#endif
