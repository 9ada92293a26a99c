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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "detail/vmath.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "popmc/error.hpp"
#include "popmc/experiment.hpp"
#include "popmc/models.hpp"

using namespace popmc;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log N(y; 0, S) through a dense LU factorization.
double mvn_log_density(const Eigen::VectorXd& y, const Eigen::MatrixXd& cov) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(cov);
  const double log_det = std::log(lu.determinant());
  const double quad = y.dot(lu.solve(y));
  return -0.5 * (static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

Eigen::MatrixXd fsv_covariance(const FsvParams& p, const std::vector<double>& x) {
  Eigen::MatrixXd b(p.obs_dim, p.factor_dim);
  for (std::size_t i = 0; i < p.obs_dim; ++i) {
    for (std::size_t j = 0; j < p.factor_dim; ++j) b(i, j) = p.loadings[i * p.factor_dim + j];
  }
  Eigen::VectorXd h(p.factor_dim);
  for (std::size_t j = 0; j < p.factor_dim; ++j) h(j) = std::exp(x[j]);
  Eigen::MatrixXd cov = b * h.asDiagonal() * b.transpose();
  for (std::size_t i = 0; i < p.obs_dim; ++i) cov(i, i) += p.obs_variances[i];
  return cov;
}

MixtureModel seeded_mixture(std::uint64_t seed) {
  MixtureModel m;
  auto rng = data_stream(seed);
  m.y = simulate_mixture_data(kTrueMixtureMeans, 100, m.sigma, rng);
  return m;
}

}  // namespace

TEST_CASE("vectorizable exp agrees with std::exp") {
  for (double x = -707.0; x <= 0.0; x += 0.0137) {
    const double ref = std::exp(x);
    REQUIRE(std::abs(detail::exp_nonpositive(x) - ref) <= 2e-14 * ref);
  }
  for (float x = -86.0f; x <= 0.0f; x += 0.00731f) {
    const float ref = std::exp(x);
    REQUIRE(std::abs(detail::exp_nonpositive(x) - ref) <= 4e-7f * ref);
  }
  CHECK(detail::exp_nonpositive(0.0) == 1.0);
  CHECK(detail::exp_nonpositive(-1e6) >= 0.0);
}

TEST_CASE("toy target is a normalized two-component mixture") {
  const double at_quarter = toy_log_target(0.25);
  const double component = 0.5 * oracle::normal_pdf(0.25, -1.0, 0.5);
  CHECK(at_quarter == doctest::Approx(std::log(2.0 * component)).epsilon(1e-14));
  CHECK(oracle::normal_pdf(0.25, -1.0, 0.5) == doctest::Approx(oracle::normal_pdf(0.25, 1.5, 0.5)));
  const double expected = std::log(0.5 / std::sqrt(2.0 * std::numbers::pi * 0.25) + 0.5 * oracle::normal_pdf(-1.0, 1.5, 0.5));
  CHECK(toy_log_target(-1.0) == doctest::Approx(expected).epsilon(1e-14));
  // Simpson quadrature over [-8, 8].
  const int n = 20000;
  const double a = -8.0, b = 8.0, h = (b - a) / n;
  double integral = 0.0, second = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    integral += w * std::exp(toy_log_target(x));
    second += w * x * x * std::exp(toy_log_target(x));
  }
  CHECK(integral * h / 3.0 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(second * h / 3.0 == doctest::Approx(kToySecondMoment).epsilon(1e-10));
  CHECK(toy_log_proposal(0.0) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
  CHECK(static_cast<double>(toy_log_target(0.3f)) == doctest::Approx(toy_log_target(0.3)).epsilon(1e-6));
}

TEST_CASE("mixture data follows its generating law") {
  MixtureModel m = seeded_mixture(1);
  double mean = 0.0;
  for (double y : m.y) mean += y;
  mean /= 100.0;
  // Mixture variance: sigma^2 plus the variance of the means (11.25).
  const double sd = std::sqrt(0.55 * 0.55 + 11.25);
  CHECK(std::abs(mean - 1.5) < 4.0 * sd / 10.0);
  CHECK(seeded_mixture(1).y == m.y);
  auto rng = data_stream(2);
  for (double y : simulate_mixture_data(kTrueMixtureMeans, 200, 0.0, rng)) {
    CHECK((y == -3.0 || y == 0.0 || y == 3.0 || y == 6.0));
  }
}

TEST_CASE("mixture posterior matches a naive oracle") {
  const MixtureModel m = seeded_mixture(3);
  const std::vector<double> mu(kTrueMixtureMeans.begin(), kTrueMixtureMeans.end());
  CHECK(mixture_log_posterior(mu, m) == doctest::Approx(oracle::mixture_log_likelihood(mu, m.y, m.sigma)).epsilon(1e-12));
  RandomStream rng(seed_state(5));
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(4);
    for (auto& v : x) v = 20.0 * rng.uniform() - 10.0;
    const double ref = oracle::mixture_log_likelihood(x, m.y, m.sigma);
    const double got = mixture_log_posterior(x, m);
    REQUIRE(got == doctest::Approx(ref).epsilon(1e-11));
    const double got32 = mixture_log_posterior(x, m, Precision::f32);
    REQUIRE(std::abs(got32 - ref) <= 1e-4 * std::abs(ref) + 1e-3);
  }
}

TEST_CASE("mixture posterior handles the prior box and permutations") {
  const MixtureModel m = seeded_mixture(4);
  CHECK(mixture_log_posterior(std::vector<double>{-3, 0, 10.5, 6}, m) == kNegInf);
  CHECK(mixture_log_posterior(std::vector<double>{-10.5, 0, 3, 6}, m) == kNegInf);
  CHECK(std::isfinite(mixture_log_posterior(std::vector<double>{-10, 0, 3, 10}, m)));
  std::vector<double> mu{-2.2, 0.7, 3.9, 5.1};
  const double base = mixture_log_posterior(mu, m);
  std::sort(mu.begin(), mu.end());
  do {
    CHECK(mixture_log_posterior(mu, m) == base);
    CHECK(mixture_log_posterior(mu, m, Precision::f32) == mixture_log_posterior(std::vector<double>{-2.2, 0.7, 3.9, 5.1}, m, Precision::f32));
  } while (std::next_permutation(mu.begin(), mu.end()));
  const MixturePosterior target(m);
  CHECK(target.log_density(mu, Precision::f64) == base);
  CHECK_THROWS_AS((void)mixture_log_posterior(std::vector<double>{1, 2, 3}, m), ConfigError);
}

TEST_CASE("mixture posterior never returns NaN for finite input") {
  const MixtureModel m = seeded_mixture(6);
  for (double far : {-10.0, 10.0, 9.999}) {
    const std::vector<double> mu{far, far, far, far};
    CHECK_FALSE(std::isnan(mixture_log_posterior(mu, m)));
    CHECK_FALSE(std::isnan(mixture_log_posterior(mu, m, Precision::f32)));
  }
}

TEST_CASE("mixture model validation") {
  MixtureModel m = seeded_mixture(1);
  m.sigma = 0.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.sigma = 0.55;
  m.bound = -1.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.bound = 10.0;
  m.y.clear();
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("prior sampler stays in the hypercube") {
  const MixturePosterior target(seeded_mixture(1));
  RandomStream rng(seed_state(2));
  std::vector<double> x(4);
  for (int i = 0; i < 10000; ++i) {
    target.sample_initial(x, rng);
    for (double v : x) REQUIRE(std::abs(v) <= 10.0);
  }
}

TEST_CASE("FSV observation density matches a dense oracle") {
  const auto p = FsvParams::defaults();
  const FsvModel model(p);
  RandomStream rng(seed_state(7));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(3), y(5);
    for (auto& v : x) v = 2.0 * rng.normal();
    for (auto& v : y) v = 3.0 * rng.normal();
    const double ref = mvn_log_density(Eigen::Map<Eigen::VectorXd>(y.data(), 5), fsv_covariance(p, x));
    REQUIRE(model.log_obs_density(x, y, Precision::f64) == doctest::Approx(ref).epsilon(1e-6));
    REQUIRE(model.log_obs_density(x, y, Precision::f32) == doctest::Approx(ref).epsilon(1e-4));
  }
}

TEST_CASE("FSV density special cases") {
  auto p = FsvParams::defaults();
  const std::vector<double> zero_x(3, 0.0);
  const std::vector<double> y{0.3, -1.2, 0.8, 2.0, -0.1};
  std::vector<double> zero_b(15, 0.0);
  double expected = 0.0;
  for (double v : y) expected += std::log(oracle::normal_pdf(v, 0.0, std::sqrt(0.5)));
  CHECK(fsv_log_obs_density(zero_x, y, zero_b, p.obs_variances, 5, 3) == doctest::Approx(expected).epsilon(1e-13));

  const std::vector<double> zero_y(5, 0.0);
  const Eigen::MatrixXd cov = fsv_covariance(p, zero_x);
  const double half_log_det = 0.5 * std::log((2.0 * std::numbers::pi * cov).determinant());
  CHECK(fsv_log_obs_density(zero_x, zero_y, p.loadings, p.obs_variances, 5, 3) == doctest::Approx(-half_log_det).epsilon(1e-12));

  // Relabeling the observation coordinates leaves the density unchanged.
  const std::vector<std::size_t> order{3, 0, 4, 2, 1};
  std::vector<double> b2(15), psi2(5), y2(5);
  p.obs_variances = {0.5, 0.7, 0.3, 0.9, 0.4};
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 3; ++j) b2[i * 3 + j] = p.loadings[order[i] * 3 + j];
    psi2[i] = p.obs_variances[order[i]];
    y2[i] = y[order[i]];
  }
  const std::vector<double> x{0.4, -0.3, 1.1};
  CHECK(fsv_log_obs_density(x, y2, b2, psi2, 5, 3) ==
        doctest::Approx(fsv_log_obs_density(x, y, p.loadings, p.obs_variances, 5, 3)).epsilon(1e-13));
}

TEST_CASE("FSV parameter validation") {
  auto p = FsvParams::defaults();
  CHECK_NOTHROW(FsvModel{p});
  p.loadings[1] = 0.3;  // above the diagonal
  CHECK_THROWS_AS(FsvModel{p}, ConfigError);
  p = FsvParams::defaults();
  p.obs_variances[2] = 0.0;
  CHECK_THROWS_AS(FsvModel{p}, ConfigError);
  p = FsvParams::defaults();
  p.innovation_cov = {1, 2, 0, 2, 1, 0, 0, 0, 1};  // indefinite
  CHECK_THROWS_AS(FsvModel{p}, ConfigError);
  p = FsvParams::defaults();
  p.innovation_cov[1] = 0.3;  // not symmetric
  CHECK_THROWS_AS(FsvModel{p}, ConfigError);
  p = FsvParams::defaults();
  p.initial_state.pop_back();
  CHECK_THROWS_AS(FsvModel{p}, ConfigError);
  p = FsvParams::defaults();
  p.innovation_cov.assign(9, 0.0);
  CHECK_NOTHROW(FsvModel{p});
}

TEST_CASE("FSV simulation degenerate cases") {
  auto p = FsvParams::defaults();
  p.innovation_cov.assign(9, 0.0);
  p.ar_coefficients.assign(3, 1.0);
  const FsvModel still(p);
  RandomStream rng(seed_state(8));
  const auto path = still.simulate(50, rng);
  for (double x : path.states) CHECK(x == 0.0);

  FsvParams sq;
  sq.obs_dim = 3;
  sq.factor_dim = 3;
  sq.loadings = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  sq.obs_variances.assign(3, 1e-300);
  sq.ar_coefficients.assign(3, 0.9);
  sq.innovation_cov = {0.5, 0.2, 0.1, 0.2, 0.5, 0.2, 0.1, 0.2, 0.5};
  sq.initial_state.assign(3, 0.0);
  const FsvModel identity(sq);
  RandomStream a(seed_state(9));
  RandomStream b(seed_state(9));
  const auto observed = identity.simulate(20, a);
  // Replay: per step three normals for x, three for f, three for noise.
  std::vector<double> x(3, 0.0), nx(3);
  for (std::size_t t = 0; t < 20; ++t) {
    identity.sample_transition(x, nx, b);
    x = nx;
    for (std::size_t i = 0; i < 3; ++i) {
      const double f = std::exp(0.5 * x[i]) * b.normal();
      CHECK(observed.observations[t * 3 + i] == doctest::Approx(f).epsilon(1e-12));
    }
    for (int i = 0; i < 3; ++i) (void)b.normal();
  }
}

TEST_CASE("FSV transition noise has covariance U and stationary variance") {
  const auto p = FsvParams::defaults();
  const FsvModel model(p);
  RandomStream rng(seed_state(10));
  const int n = 100000;
  const std::vector<double> origin(3, 0.0);
  std::vector<double> next(3);
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (int i = 0; i < n; ++i) {
    fsv_transition_sample(model, origin, next, rng);
    Eigen::Vector3d v(next[0], next[1], next[2]);
    acc += v * v.transpose();
  }
  acc /= n;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double u = p.innovation_cov[static_cast<std::size_t>(i * 3 + j)];
      const double se = std::sqrt((u * u + p.innovation_cov[static_cast<std::size_t>(i * 4)] *
                                              p.innovation_cov[static_cast<std::size_t>(j * 4)]) / n);
      CHECK(std::abs(acc(i, j) - u) < 4.0 * se);
    }
  }
  std::vector<double> zero_u = p.innovation_cov;
  auto q = p;
  q.innovation_cov.assign(9, 0.0);
  const FsvModel frozen(q);
  const std::vector<double> prev{1.0, -2.0, 0.5};
  fsv_transition_sample(frozen, prev, next, rng);
  CHECK(next == std::vector<double>{0.9, -1.8, 0.45});

  RandomStream r1(seed_state(11));
  RandomStream r2(seed_state(11));
  std::vector<double> n1(3), n2(3);
  fsv_transition_sample(model, prev, n1, r1);
  fsv_transition_sample(model, prev, n2, r2);
  CHECK(n1 == n2);

  // Long-run variance U_ii / (1 - phi^2); the AR(1) autocorrelation 0.9
  // inflates the standard error of the sample variance by about
  // sqrt((1 + phi^4) / (1 - phi^4)).
  RandomStream lr(seed_state(12));
  const auto path = model.simulate(100000, lr);
  for (std::size_t k = 0; k < 3; ++k) {
    double s2 = 0.0;
    for (std::size_t t = 0; t < path.length; ++t) s2 += path.states[t * 3 + k] * path.states[t * 3 + k];
    s2 /= static_cast<double>(path.length);
    const double target = 0.5 / (1.0 - 0.81);
    const double phi4 = 0.9 * 0.9 * 0.9 * 0.9;
    const double se = target * std::sqrt(2.0 / 100000.0 * (1.0 + phi4) / (1.0 - phi4));
    CHECK(std::abs(s2 - target) < 4.0 * se);
  }
}

TEST_CASE("linear-Gaussian model") {
  CHECK_THROWS_AS(LinearGaussianModel({0.9, 0.0, 1.0, 0.0, 1.0}), ConfigError);
  const LinearGaussianModel model({0.9, 0.5, 2.0, 1.0, 0.0});
  RandomStream rng(seed_state(1));
  std::vector<double> x(1);
  model.sample_initial(x, rng);
  CHECK(x[0] == 1.0);
  const std::vector<double> y{0.5};
  CHECK(model.log_obs_density(x, y, Precision::f64) == doctest::Approx(std::log(oracle::normal_pdf(0.5, 1.0, std::sqrt(2.0)))));
}
