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

#include "popmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "popmc/error.hpp"
#include "popmc/models.hpp"

namespace popmc {

ModeAtlas ModeAtlas::make(const std::array<double, 4>& true_means, double capture_radius) {
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < true_means.size(); ++i) {
    if (!(true_means[i] > true_means[i - 1])) throw ConfigError("mode atlas: means must be strictly increasing");
    min_gap = std::min(min_gap, true_means[i] - true_means[i - 1]);
  }
  if (!(capture_radius > 0.0) || !(capture_radius < 0.5 * min_gap)) {
    throw ConfigError("mode atlas: capture radius must be positive and below half the smallest gap");
  }
  ModeAtlas atlas;
  atlas.true_means = true_means;
  atlas.capture_radius = capture_radius;
  std::array<double, 4> perm = true_means;
  do {
    atlas.full_modes.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) atlas.marginal_modes.push_back({true_means[i], true_means[j]});
    }
  }
  return atlas;
}

ModeAtlas ModeAtlas::standard(double capture_radius) {
  return make({kTrueMixtureMeans[0], kTrueMixtureMeans[1], kTrueMixtureMeans[2], kTrueMixtureMeans[3]},
              capture_radius);
}

namespace {

template <std::size_t D>
ModeId nearest(std::span<const double> sample, const std::vector<std::array<double, D>>& modes, double radius) {
  if (sample.size() < D) throw ConfigError("mode assignment: sample has too few coordinates");
  double best = std::numeric_limits<double>::infinity();
  ModeId best_id = kUnassigned;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < D; ++c) {
      const double d = sample[c] - modes[m][c];
      d2 += d * d;
    }
    if (d2 < best) {
      best = d2;
      best_id = static_cast<ModeId>(m);
    }
  }
  return best <= radius * radius ? best_id : kUnassigned;
}

}  // namespace

ModeId assign_mode(std::span<const double> sample, const ModeAtlas& atlas) {
  return nearest<4>(sample, atlas.full_modes, atlas.capture_radius);
}

ModeId assign_marginal_mode(std::span<const double> sample, const ModeAtlas& atlas) {
  return nearest<2>(sample, atlas.marginal_modes, atlas.capture_radius);
}

double ModeHistogram::assigned_total() const noexcept {
  double total = 0.0;
  for (double m : mass) total += m;
  return total;
}

double ModeHistogram::max_min_ratio() const noexcept {
  if (mass.empty()) return std::numeric_limits<double>::infinity();
  const auto [lo, hi] = std::minmax_element(mass.begin(), mass.end());
  if (!(*lo > 0.0)) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

std::size_t ModeHistogram::occupied() const noexcept {
  return static_cast<std::size_t>(std::count_if(mass.begin(), mass.end(), [](double m) { return m > 0.0; }));
}

ModeHistogram mode_counts(std::span<const double> samples, std::size_t dim, const ModeAtlas& atlas, bool marginal,
                          std::span<const double> weights) {
  if (dim == 0 || samples.size() % dim != 0) throw ConfigError("mode_counts: samples are not a whole number of rows");
  const std::size_t n = samples.size() / dim;
  if (!weights.empty() && weights.size() != n) throw ConfigError("mode_counts: one weight per sample is required");
  ModeHistogram h;
  h.mass.assign(marginal ? atlas.marginal_modes.size() : atlas.full_modes.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = samples.subspan(i * dim, dim);
    const ModeId id = marginal ? assign_marginal_mode(row, atlas) : assign_mode(row, atlas);
    const double w = weights.empty() ? 1.0 : weights[i];
    if (id == kUnassigned) {
      h.unassigned += w;
    } else {
      h.mass[static_cast<std::size_t>(id)] += w;
    }
  }
  return h;
}

std::vector<ModeId> assign_modes(std::span<const double> samples, std::size_t dim, const ModeAtlas& atlas) {
  if (dim == 0 || samples.size() % dim != 0) throw ConfigError("assign_modes: samples are not a whole number of rows");
  std::vector<ModeId> ids(samples.size() / dim);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = assign_mode(samples.subspan(i * dim, dim), atlas);
  return ids;
}

std::optional<std::size_t> traversal_time(std::span<const ModeId> modes, std::size_t mode_count) {
  if (mode_count == 0) return 0;
  std::vector<bool> seen(mode_count, false);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const ModeId id = modes[i];
    if (id < 0 || static_cast<std::size_t>(id) >= mode_count || seen[static_cast<std::size_t>(id)]) continue;
    seen[static_cast<std::size_t>(id)] = true;
    if (++covered == mode_count) return i + 1;
  }
  return std::nullopt;
}

double coupon_expectation(std::size_t k) {
  if (k == 0) throw ConfigError("coupon_expectation: k must be at least 1");
  double harmonic = 0.0;
  for (std::size_t i = k; i >= 1; --i) harmonic += 1.0 / static_cast<double>(i);
  return static_cast<double>(k) * harmonic;
}

EstimatorReport estimator_report(std::span<const double> runs) {
  if (runs.size() < 2) throw ConfigError("estimator_report: at least two runs are required");
  const auto r = static_cast<double>(runs.size());
  double mean = 0.0;
  for (double v : runs) mean += v;
  mean /= r;
  double ss = 0.0;
  for (double v : runs) ss += (v - mean) * (v - mean);
  EstimatorReport report;
  report.mean = mean;
  report.variance = ss / (r - 1.0);
  report.standard_error = std::sqrt(report.variance / r);
  return report;
}

double DensityGrid::coordinate(std::size_t i) const noexcept {
  if (points < 2) return lower;
  return lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(points - 1);
}

DensityGrid marginal_density_grid(std::span<const double> samples, std::size_t dim, std::span<const double> weights,
                                  DensityGrid grid) {
  if (dim < 2 || samples.size() % dim != 0) throw ConfigError("density grid: samples need at least two coordinates");
  if (grid.points < 2 || !(grid.upper > grid.lower) || !(grid.bandwidth > 0.0)) {
    throw ConfigError("density grid: invalid grid");
  }
  const std::size_t n = samples.size() / dim;
  if (!weights.empty() && weights.size() != n) throw ConfigError("density grid: one weight per sample is required");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += weights.empty() ? 1.0 : weights[i];
  grid.density.assign(grid.points * grid.points, 0.0);
  if (!(total > 0.0)) return grid;
  const double h = grid.bandwidth;
  const double step = (grid.upper - grid.lower) / static_cast<double>(grid.points - 1);
  const double norm = 1.0 / (2.0 * std::numbers::pi * h * h * total);
  const double reach = 4.0 * h;
  const auto last = static_cast<double>(grid.points - 1);
  auto index_range = [&](double v) {
    const double lo = std::clamp(std::ceil((v - reach - grid.lower) / step), 0.0, last);
    const double hi = std::clamp(std::floor((v + reach - grid.lower) / step), 0.0, last);
    return std::pair<std::size_t, std::size_t>(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
  };
  for (std::size_t s = 0; s < n; ++s) {
    const double w = weights.empty() ? 1.0 : weights[s];
    if (w == 0.0) continue;
    const double a = samples[s * dim];
    const double b = samples[s * dim + 1];
    if (a < grid.lower - reach || a > grid.upper + reach || b < grid.lower - reach || b > grid.upper + reach) continue;
    const auto [x0, x1] = index_range(a);
    const auto [y0, y1] = index_range(b);
    for (std::size_t iy = y0; iy <= y1; ++iy) {
      const double dy = grid.coordinate(iy) - b;
      for (std::size_t ix = x0; ix <= x1; ++ix) {
        const double dx = grid.coordinate(ix) - a;
        const double d2 = dx * dx + dy * dy;
        if (d2 > reach * reach) continue;
        grid.density[iy * grid.points + ix] += w * norm * std::exp(-0.5 * d2 / (h * h));
      }
    }
  }
  return grid;
}

}  // namespace popmc
