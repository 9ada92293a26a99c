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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "popmc/diagnostics.hpp"
#include "popmc/error.hpp"
#include "popmc/prng.hpp"

using namespace popmc;

namespace {

std::vector<double> rows_at_modes(const ModeAtlas& atlas, std::size_t copies) {
  std::vector<double> out;
  for (const auto& mode : atlas.full_modes) {
    for (std::size_t c = 0; c < copies; ++c) out.insert(out.end(), mode.begin(), mode.end());
  }
  return out;
}

}  // namespace

TEST_CASE("mode atlas layout") {
  const auto atlas = ModeAtlas::standard();
  REQUIRE(atlas.full_modes.size() == 24);
  REQUIRE(atlas.marginal_modes.size() == 12);
  CHECK(atlas.full_modes.front() == std::array<double, 4>{-3, 0, 3, 6});
  CHECK(atlas.full_modes.back() == std::array<double, 4>{6, 3, 0, -3});
  CHECK(std::is_sorted(atlas.full_modes.begin(), atlas.full_modes.end()));
  CHECK(std::adjacent_find(atlas.full_modes.begin(), atlas.full_modes.end()) == atlas.full_modes.end());
  CHECK(atlas.marginal_modes.front() == std::array<double, 2>{-3, 0});
  for (const auto& m : atlas.marginal_modes) CHECK(m[0] != m[1]);
  CHECK_THROWS_AS((void)ModeAtlas::standard(1.5), ConfigError);
  CHECK_THROWS_AS((void)ModeAtlas::standard(0.0), ConfigError);
  CHECK_THROWS_AS((void)ModeAtlas::make({0, 0, 3, 6}), ConfigError);
  CHECK_NOTHROW((void)ModeAtlas::standard(1.49));
}

TEST_CASE("mode assignment examples") {
  const auto atlas = ModeAtlas::standard();
  CHECK(assign_mode(std::vector<double>{-3, 0, 3, 6}, atlas) == 0);
  CHECK(assign_mode(std::vector<double>{6, 3, 0, -3}, atlas) == 23);
  CHECK(assign_mode(std::vector<double>{-2.9, 0.1, 3.0, 6.1}, atlas) == 0);
  CHECK(assign_mode(std::vector<double>{-1.5, 0, 3, 6}, atlas) == kUnassigned);
  CHECK(assign_mode(std::vector<double>{-3, 0, 3, 7.0}, atlas) == 0);
  CHECK(assign_mode(std::vector<double>{-3, 0, 3, 7.0001}, atlas) == kUnassigned);
  CHECK(assign_marginal_mode(std::vector<double>{-3.2, 0.3, 99, 99}, atlas) == 0);
  CHECK(assign_marginal_mode(std::vector<double>{1.5, 0.0}, atlas) == kUnassigned);
  const auto& m = atlas.marginal_modes[7];
  CHECK(assign_marginal_mode(std::vector<double>{m[0], m[1]}, atlas) == 7);
}

TEST_CASE("mode assignment is permutation equivariant") {
  const auto atlas = ModeAtlas::standard();
  RandomStream rng(seed_state(3));
  std::array<int, 4> perm{0, 1, 2, 3};
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto base = atlas.full_modes[static_cast<std::size_t>(rng.uniform() * 24)];
    std::array<double, 4> x{};
    for (std::size_t i = 0; i < 4; ++i) x[i] = base[i] + 1.2 * (rng.uniform() - 0.5);
    std::next_permutation(perm.begin(), perm.end());
    std::array<double, 4> px{};
    for (std::size_t i = 0; i < 4; ++i) px[i] = x[static_cast<std::size_t>(perm[i])];
    const ModeId a = assign_mode(x, atlas);
    const ModeId b = assign_mode(px, atlas);
    if (a == kUnassigned) {
      CHECK(b == kUnassigned);
      continue;
    }
    std::array<double, 4> pm{};
    for (std::size_t i = 0; i < 4; ++i) pm[i] = atlas.full_modes[static_cast<std::size_t>(a)][static_cast<std::size_t>(perm[i])];
    REQUIRE(b != kUnassigned);
    CHECK(atlas.full_modes[static_cast<std::size_t>(b)] == pm);
    ++checked;
  }
  CHECK(checked > 500);
}

TEST_CASE("mode histograms conserve mass") {
  const auto atlas = ModeAtlas::standard();
  const auto uniform = rows_at_modes(atlas, 3);
  const auto h = mode_counts(uniform, 4, atlas, false);
  CHECK(h.mass == std::vector<double>(24, 3.0));
  CHECK(h.max_min_ratio() == 1.0);
  CHECK(h.occupied() == 24);
  CHECK(h.unassigned == 0.0);

  std::vector<double> one;
  for (int i = 0; i < 10; ++i) one.insert(one.end(), {6, 0, 3, -3});
  one.insert(one.end(), {50, 50, 50, 50});
  const auto h1 = mode_counts(one, 4, atlas, false);
  CHECK(h1.occupied() == 1);
  CHECK(h1.assigned_total() == 10.0);
  CHECK(h1.unassigned == 1.0);
  CHECK(std::isinf(h1.max_min_ratio()));

  RandomStream rng(seed_state(4));
  std::vector<double> cloud(4000 * 4), w(4000);
  for (auto& v : cloud) v = 20.0 * rng.uniform() - 10.0;
  for (auto& v : w) v = rng.uniform() / 4000.0;
  const auto hw = mode_counts(cloud, 4, atlas, true, w);
  REQUIRE(hw.mass.size() == 12);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  CHECK(hw.assigned_total() + hw.unassigned == doctest::Approx(total).epsilon(1e-14));
  const auto hc = mode_counts(cloud, 4, atlas, true);
  CHECK(hc.assigned_total() + hc.unassigned == 4000.0);
  const auto labels = assign_modes(cloud, 4, atlas);
  REQUIRE(labels.size() == 4000);
  CHECK(std::count(labels.begin(), labels.end(), kUnassigned) > 3900);
}

TEST_CASE("traversal time") {
  std::vector<ModeId> seq(24);
  std::iota(seq.begin(), seq.end(), 0);
  CHECK(traversal_time(seq) == 24);
  CHECK_FALSE(traversal_time(std::vector<ModeId>(5000, 3)).has_value());
  CHECK_FALSE(traversal_time(std::vector<ModeId>{}).has_value());
  CHECK(traversal_time(std::vector<ModeId>{0, kUnassigned, 1, 0, 2}, 3) == 5);
  RandomStream rng(seed_state(5));
  std::vector<ModeId> walk;
  std::optional<std::size_t> previous;
  for (int i = 0; i < 400; ++i) {
    walk.push_back(rng.uniform() < 0.1 ? kUnassigned : static_cast<ModeId>(rng.uniform() * 24));
    const auto now = traversal_time(walk);
    if (previous) REQUIRE(now == previous);
    previous = now;
  }
  CHECK(previous.has_value());
}

TEST_CASE("coupon collector baseline") {
  CHECK(coupon_expectation(1) == 1.0);
  CHECK(coupon_expectation(2) == 3.0);
  CHECK(std::abs(coupon_expectation(24) - 90.6) <= 0.05);
  RandomStream rng(seed_state(6));
  std::vector<double> times;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<ModeId> draws;
    std::optional<std::size_t> t;
    while (!t) {
      draws.push_back(static_cast<ModeId>(rng.uniform() * 24));
      t = traversal_time(draws);
    }
    times.push_back(static_cast<double>(*t));
  }
  std::nth_element(times.begin(), times.begin() + 500, times.end());
  // The coupon-collector law is right-skewed; its median sits a little
  // below the mean of about 91.
  CHECK(times[500] >= 80.0);
  CHECK(times[500] <= 95.0);
}

TEST_CASE("estimator report") {
  const auto constant = estimator_report(std::vector<double>{2.5, 2.5, 2.5});
  CHECK(constant.mean == 2.5);
  CHECK(constant.variance == 0.0);
  CHECK(constant.standard_error == 0.0);
  const auto pair = estimator_report(std::vector<double>{1.0, 3.0});
  CHECK(pair.mean == 2.0);
  CHECK(pair.variance == 2.0);
  CHECK(pair.standard_error == doctest::Approx(1.0));
  RandomStream rng(seed_state(7));
  std::vector<double> z(100);
  for (auto& v : z) v = rng.normal();
  const auto r = estimator_report(z);
  CHECK(r.variance >= 0.6);
  CHECK(r.variance <= 1.5);
  CHECK_THROWS_AS((void)estimator_report(std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("marginal density grid") {
  RandomStream rng(seed_state(8));
  std::vector<double> samples;
  for (int i = 0; i < 2000; ++i) samples.insert(samples.end(), {-3 + 0.5 * rng.normal(), 3 + 0.5 * rng.normal(), 0, 0});
  const auto grid = marginal_density_grid(samples, 4);
  REQUIRE(grid.density.size() == 81 * 81);
  const double cell = (grid.coordinate(1) - grid.coordinate(0));
  CHECK(grid.coordinate(0) == -10.0);
  CHECK(grid.coordinate(80) == 10.0);
  const double mass = std::accumulate(grid.density.begin(), grid.density.end(), 0.0) * cell * cell;
  CHECK(mass == doctest::Approx(1.0).epsilon(0.01));
  const auto peak = std::max_element(grid.density.begin(), grid.density.end()) - grid.density.begin();
  CHECK(std::abs(grid.coordinate(static_cast<std::size_t>(peak % 81)) + 3.0) <= 0.5);
  CHECK(std::abs(grid.coordinate(static_cast<std::size_t>(peak / 81)) - 3.0) <= 0.5);
  std::vector<double> w(2000, 0.0);
  w[0] = 1.0;
  const auto single = marginal_density_grid(samples, 4, w);
  std::size_t nonzero = 0;
  for (double d : single.density) nonzero += d > 0.0;
  // Truncation at four bandwidths keeps the support inside a 9 x 9 patch.
  CHECK(nonzero <= 81);
}
