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

#ifndef POPMC_MODELS_HPP
#define POPMC_MODELS_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "popmc/parallel.hpp"
#include "popmc/prng.hpp"

namespace popmc {

/// Unnormalized log-density known pointwise, with a sampler for the
/// initial (prior) distribution used to seed chains and particles.
class Target {
 public:
  virtual ~Target() = default;

  [[nodiscard]] virtual std::size_t dim() const = 0;
  /// log pi*(x); -inf outside the support, never NaN for finite x.
  [[nodiscard]] virtual double log_density(std::span<const double> x, Precision precision) const = 0;
  virtual void sample_initial(std::span<double> x, RandomStream& rng) const = 0;
};

/// Markov state-space model: initial density p0, transition f, observation
/// density g.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  [[nodiscard]] virtual std::size_t state_dim() const = 0;
  [[nodiscard]] virtual std::size_t obs_dim() const = 0;
  virtual void sample_initial(std::span<double> x, RandomStream& rng) const = 0;
  virtual void sample_transition(std::span<const double> previous, std::span<double> next,
                                 RandomStream& rng) const = 0;
  [[nodiscard]] virtual double log_obs_density(std::span<const double> x, std::span<const double> y,
                                               Precision precision) const = 0;
};

// ---------------------------------------------------------------------------
// Importance-sampling toy: target 0.5 N(-1, 0.25) + 0.5 N(1.5, 0.25),
// proposal N(0, 1), test function x^2.

template <class Real>
[[nodiscard]] Real toy_log_target(Real x);
template <class Real>
[[nodiscard]] Real toy_log_proposal(Real x);

/// E[X^2] under the toy target: 0.5 (1 + 0.25) + 0.5 (2.25 + 0.25).
inline constexpr double kToySecondMoment = 1.875;

// ---------------------------------------------------------------------------
// Gaussian mixture with known common sigma and equal weights; uniform prior
// on the hypercube [-bound, bound]^k for the means.

inline constexpr std::array<double, 4> kTrueMixtureMeans{-3.0, 0.0, 3.0, 6.0};
inline constexpr std::size_t kMaxMixtureComponents = 16;

struct MixtureModel {
  std::size_t k = 4;
  double sigma = 0.55;
  double bound = 10.0;
  std::vector<double> y;

  [[nodiscard]] double weight() const noexcept { return 1.0 / static_cast<double>(k); }
  /// Throws ConfigError on k outside [1, 16], sigma <= 0, bound <= 0 or no data.
  void validate() const;
};

/// m observations: component chosen uniformly (one uniform), then
/// N(0, sigma^2) noise (one normal).
[[nodiscard]] std::vector<double> simulate_mixture_data(std::span<const double> true_mu, std::size_t m,
                                                        double sigma, RandomStream& rng);

/// sum_j log sum_i w N(y_j; mu_i, sigma^2) inside the hypercube, -inf
/// outside. Evaluated on the sorted means, so it is exactly invariant under
/// permutation of mu.
[[nodiscard]] double mixture_log_posterior(std::span<const double> mu, const MixtureModel& model,
                                           Precision precision = Precision::f64);

class MixturePosterior final : public Target {
 public:
  explicit MixturePosterior(MixtureModel model);

  [[nodiscard]] std::size_t dim() const override { return model_.k; }
  [[nodiscard]] double log_density(std::span<const double> x, Precision precision) const override;
  /// Uniform on the prior hypercube.
  void sample_initial(std::span<double> x, RandomStream& rng) const override;

  [[nodiscard]] const MixtureModel& model() const noexcept { return model_; }

 private:
  MixtureModel model_;
  std::vector<float> y_single_;
};

// ---------------------------------------------------------------------------
// Factor stochastic volatility:
//   y_t ~ N(B f_t, Psi),  f_t ~ N(0, diag(exp(x_t))),  x_t ~ N(Phi x_{t-1}, U).

inline constexpr std::size_t kMaxFsvDim = 16;

struct FsvParams {
  std::size_t obs_dim = 5;
  std::size_t factor_dim = 3;
  std::vector<double> loadings;         ///< B, obs_dim x factor_dim, row-major
  std::vector<double> obs_variances;    ///< diagonal of Psi
  std::vector<double> ar_coefficients;  ///< diagonal of Phi
  std::vector<double> innovation_cov;   ///< U, factor_dim x factor_dim, row-major
  std::vector<double> initial_state;    ///< x0

  /// M = 5, K = 3, psi = 0.5, phi = 0.9, x0 = 0 and the published B and U.
  [[nodiscard]] static FsvParams defaults();
};

/// Latent states and observations of a simulated state-space series.
struct SimulatedPath {
  std::size_t length = 0;
  std::vector<double> states;        ///< length x state_dim
  std::vector<double> observations;  ///< length x obs_dim
};

/// log N(y; 0, B diag(exp(x)) B^T + diag(psi)) through a Cholesky factor of
/// the obs_dim x obs_dim covariance; the factors f_t are integrated out.
[[nodiscard]] double fsv_log_obs_density(std::span<const double> x, std::span<const double> y,
                                         std::span<const double> loadings,
                                         std::span<const double> obs_variances, std::size_t obs_dim,
                                         std::size_t factor_dim, Precision precision = Precision::f64);

class FsvModel final : public StateSpaceModel {
 public:
  /// Validates the parameters; U may be positive semidefinite (zero pivots)
  /// but an indefinite U is a ConfigError.
  explicit FsvModel(FsvParams params);

  [[nodiscard]] std::size_t state_dim() const override { return params_.factor_dim; }
  [[nodiscard]] std::size_t obs_dim() const override { return params_.obs_dim; }
  /// x0 is known, so this copies it and draws nothing.
  void sample_initial(std::span<double> x, RandomStream& rng) const override;
  /// Phi x + chol(U) z; always consumes factor_dim normals.
  void sample_transition(std::span<const double> previous, std::span<double> next,
                         RandomStream& rng) const override;
  [[nodiscard]] double log_obs_density(std::span<const double> x, std::span<const double> y,
                                       Precision precision) const override;

  /// Per step: factor_dim normals for x_t, factor_dim for f_t, obs_dim for
  /// the observation noise.
  [[nodiscard]] SimulatedPath simulate(std::size_t length, RandomStream& rng) const;

  [[nodiscard]] const FsvParams& params() const noexcept { return params_; }
  [[nodiscard]] std::span<const double> innovation_factor() const noexcept { return chol_u_; }

 private:
  FsvParams params_;
  std::vector<double> chol_u_;
};

[[nodiscard]] SimulatedPath fsv_simulate(const FsvModel& model, std::size_t length, RandomStream& rng);
void fsv_transition_sample(const FsvModel& model, std::span<const double> previous,
                           std::span<double> next, RandomStream& rng);

// ---------------------------------------------------------------------------
// Scalar linear-Gaussian model: x_0 ~ N(m0, p0), x_t = a x_{t-1} + N(0, q),
// y_t = x_t + N(0, r). Its filter is available in closed form, which makes
// it the reference problem for particle filter checks.

struct LinearGaussianParams {
  double a = 0.9;
  double q = 1.0;
  double r = 1.0;
  double m0 = 0.0;
  double p0 = 1.0;
};

class LinearGaussianModel final : public StateSpaceModel {
 public:
  /// Throws ConfigError unless q, r > 0, p0 >= 0 and all values are finite.
  explicit LinearGaussianModel(LinearGaussianParams params);

  [[nodiscard]] std::size_t state_dim() const override { return 1; }
  [[nodiscard]] std::size_t obs_dim() const override { return 1; }
  /// One normal.
  void sample_initial(std::span<double> x, RandomStream& rng) const override;
  /// One normal.
  void sample_transition(std::span<const double> previous, std::span<double> next,
                         RandomStream& rng) const override;
  [[nodiscard]] double log_obs_density(std::span<const double> x, std::span<const double> y,
                                       Precision precision) const override;

  /// States x_1..x_T and observations y_1..y_T, starting from a draw of x_0.
  [[nodiscard]] SimulatedPath simulate(std::size_t length, RandomStream& rng) const;

  [[nodiscard]] const LinearGaussianParams& params() const noexcept { return params_; }

 private:
  LinearGaussianParams params_;
};

}  // namespace popmc

#endif
