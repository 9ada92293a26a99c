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

#include "popmc/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "detail/vmath.hpp"
#include "popmc/error.hpp"

namespace popmc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// sum_j log sum_i exp(-(y_j - mu_i)^2 * inv_two_var), without constants.
// Observations are processed in runs of 64 laid out component-major so the
// exp loop vectorizes; each s_j lies in [1, k], so products of eight of them
// cannot overflow even in float and one log serves eight observations.
template <class Real>
[[gnu::always_inline]] inline Real mixture_log_terms(const Real* mu, std::size_t k, const Real* y, std::size_t m, Real inv_two_var) {
  constexpr std::size_t kRun = 64;
  constexpr std::size_t kGroup = 8;
  Real exponent[kMaxMixtureComponents][kRun];
  Real peak[kRun];
  Real sum[kRun];
  Real total{0};
  for (std::size_t base = 0; base < m; base += kRun) {
    const std::size_t len = std::min(kRun, m - base);
    const Real* yy = y + base;
    for (std::size_t j = 0; j < len; ++j) {
      const Real d = yy[j] - mu[0];
      exponent[0][j] = -(d * d) * inv_two_var;
      peak[j] = exponent[0][j];
    }
    for (std::size_t i = 1; i < k; ++i) {
      for (std::size_t j = 0; j < len; ++j) {
        const Real d = yy[j] - mu[i];
        const Real e = -(d * d) * inv_two_var;
        exponent[i][j] = e;
        peak[j] = e > peak[j] ? e : peak[j];
      }
    }
    for (std::size_t j = 0; j < len; ++j) sum[j] = Real{0};
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < len; ++j) sum[j] += detail::exp_nonpositive(exponent[i][j] - peak[j]);
    }
    for (std::size_t j = 0; j < len; ++j) total += peak[j];
    for (std::size_t g = 0; g < len; g += kGroup) {
      Real product{1};
      for (std::size_t j = g; j < std::min(len, g + kGroup); ++j) product *= sum[j];
      total += std::log(product);
    }
  }
  return total;
}

[[gnu::target_clones("avx512f", "avx2", "default")]]
double mixture_log_terms_f64(const double* mu, std::size_t k, const double* y, std::size_t m,
                             double inv_two_var) {
  return mixture_log_terms<double>(mu, k, y, m, inv_two_var);
}

[[gnu::target_clones("avx512f", "avx2", "default")]]
float mixture_log_terms_f32(const float* mu, std::size_t k, const float* y, std::size_t m,
                            float inv_two_var) {
  return mixture_log_terms<float>(mu, k, y, m, inv_two_var);
}

template <class Real>
double mixture_log_posterior_impl(std::span<const double> mu, const MixtureModel& model, const Real* y) {
  if (mu.size() != model.k) throw ConfigError("mixture: mean vector has wrong dimension");
  std::array<Real, kMaxMixtureComponents> sorted{};
  for (std::size_t i = 0; i < model.k; ++i) {
    if (!(std::abs(mu[i]) <= model.bound)) return kNegInf;
    sorted[i] = static_cast<Real>(mu[i]);
  }
  std::sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(model.k));
  const Real variance = static_cast<Real>(model.sigma * model.sigma);
  const Real inv_two_var = Real{1} / (Real{2} * variance);
  const std::size_t m = model.y.size();
  Real terms;
  if constexpr (std::is_same_v<Real, float>) {
    terms = mixture_log_terms_f32(sorted.data(), model.k, y, m, inv_two_var);
  } else {
    terms = mixture_log_terms_f64(sorted.data(), model.k, y, m, inv_two_var);
  }
  const Real per_obs = std::log(static_cast<Real>(model.weight())) -
                       Real{0.5} * std::log(Real{2} * std::numbers::pi_v<Real> * variance);
  return static_cast<double>(terms + static_cast<Real>(m) * per_obs);
}

// In-place lower Cholesky factor of a row-major n x n matrix (upper part is
// ignored and zeroed). Zero pivots are accepted when `semidefinite` is set
// and the rest of the column is zero to within rounding.
template <class Real>
bool cholesky_lower(Real* a, std::size_t n, bool semidefinite) {
  Real scale{0};
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i * n + i]));
  const Real tol = Real{64} * std::numeric_limits<Real>::epsilon() * std::max(scale, Real{1});
  for (std::size_t j = 0; j < n; ++j) {
    Real d = a[j * n + j];
    for (std::size_t p = 0; p < j; ++p) d -= a[j * n + p] * a[j * n + p];
    for (std::size_t c = j + 1; c < n; ++c) a[j * n + c] = Real{0};
    if (d > tol || (!semidefinite && d > Real{0})) {
      const Real pivot = std::sqrt(d);
      a[j * n + j] = pivot;
      for (std::size_t i = j + 1; i < n; ++i) {
        Real s = a[i * n + j];
        for (std::size_t p = 0; p < j; ++p) s -= a[i * n + p] * a[j * n + p];
        a[i * n + j] = s / pivot;
      }
      continue;
    }
    if (!semidefinite || d < -tol) return false;
    a[j * n + j] = Real{0};
    for (std::size_t i = j + 1; i < n; ++i) {
      Real s = a[i * n + j];
      for (std::size_t p = 0; p < j; ++p) s -= a[i * n + p] * a[j * n + p];
      if (std::abs(s) > tol) return false;
      a[i * n + j] = Real{0};
    }
  }
  return true;
}

template <class Real>
double fsv_log_obs_density_impl(std::span<const double> x, std::span<const double> y,
                                std::span<const double> loadings, std::span<const double> psi,
                                std::size_t obs_dim, std::size_t factor_dim) {
  std::array<Real, kMaxFsvDim> h{};
  for (std::size_t k = 0; k < factor_dim; ++k) h[k] = std::exp(static_cast<Real>(x[k]));
  std::array<Real, kMaxFsvDim * kMaxFsvDim> cov{};
  const std::size_t n = obs_dim;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      Real s = a == b ? static_cast<Real>(psi[a]) : Real{0};
      for (std::size_t k = 0; k < factor_dim; ++k) {
        s += static_cast<Real>(loadings[a * factor_dim + k]) *
             static_cast<Real>(loadings[b * factor_dim + k]) * h[k];
      }
      cov[a * n + b] = s;
      cov[b * n + a] = s;
    }
  }
  if (!cholesky_lower(cov.data(), n, false)) {
    throw Error(ErrorKind::internal, "fsv: observation covariance is not positive definite");
  }
  Real log_det{0};
  Real quad{0};
  std::array<Real, kMaxFsvDim> v{};
  for (std::size_t a = 0; a < n; ++a) {
    Real s = static_cast<Real>(y[a]);
    for (std::size_t p = 0; p < a; ++p) s -= cov[a * n + p] * v[p];
    v[a] = s / cov[a * n + a];
    quad += v[a] * v[a];
    log_det += std::log(cov[a * n + a]);
  }
  const Real log_two_pi = std::log(Real{2} * std::numbers::pi_v<Real>);
  return static_cast<double>(Real{-0.5} * (static_cast<Real>(n) * log_two_pi + quad) - log_det);
}

void require(bool condition, const char* message) {
  if (!condition) throw ConfigError(message);
}

}  // namespace

template <class Real>
Real toy_log_target(Real x) {
  // 0.5 N(x; -1, 0.25) + 0.5 N(x; 1.5, 0.25) in log-sum-exp form.
  const Real a = -(x + Real{1}) * (x + Real{1}) / Real{0.5};
  const Real b = -(x - Real{1.5}) * (x - Real{1.5}) / Real{0.5};
  const Real peak = std::max(a, b);
  const Real log_const = std::log(Real{0.5}) - Real{0.5} * std::log(Real{2} * std::numbers::pi_v<Real> * Real{0.25});
  return log_const + peak + std::log(std::exp(a - peak) + std::exp(b - peak));
}

template <class Real>
Real toy_log_proposal(Real x) {
  return Real{-0.5} * std::log(Real{2} * std::numbers::pi_v<Real>) - Real{0.5} * x * x;
}

template float toy_log_target<float>(float);
template double toy_log_target<double>(double);
template float toy_log_proposal<float>(float);
template double toy_log_proposal<double>(double);

void MixtureModel::validate() const {
  require(k >= 1 && k <= kMaxMixtureComponents, "mixture: k must be in [1, 16]");
  require(sigma > 0.0 && std::isfinite(sigma), "mixture: sigma must be positive");
  require(bound > 0.0 && std::isfinite(bound), "mixture: bound must be positive");
  require(!y.empty(), "mixture: at least one observation is required");
}

std::vector<double> simulate_mixture_data(std::span<const double> true_mu, std::size_t m, double sigma,
                                          RandomStream& rng) {
  require(!true_mu.empty(), "mixture data: no component means");
  require(m >= 1, "mixture data: m must be at least 1");
  require(sigma >= 0.0, "mixture data: sigma must be non-negative");
  const std::size_t k = true_mu.size();
  std::vector<double> y(m);
  for (auto& value : y) {
    const auto component =
        std::min(k - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(k)));
    value = true_mu[component] + sigma * rng.normal();
  }
  return y;
}

double mixture_log_posterior(std::span<const double> mu, const MixtureModel& model, Precision precision) {
  model.validate();
  if (precision == Precision::f32) {
    const std::vector<float> y(model.y.begin(), model.y.end());
    return mixture_log_posterior_impl<float>(mu, model, y.data());
  }
  return mixture_log_posterior_impl<double>(mu, model, model.y.data());
}

MixturePosterior::MixturePosterior(MixtureModel model)
    : model_(std::move(model)), y_single_(model_.y.begin(), model_.y.end()) {
  model_.validate();
}

double MixturePosterior::log_density(std::span<const double> x, Precision precision) const {
  if (precision == Precision::f32) return mixture_log_posterior_impl<float>(x, model_, y_single_.data());
  return mixture_log_posterior_impl<double>(x, model_, model_.y.data());
}

void MixturePosterior::sample_initial(std::span<double> x, RandomStream& rng) const {
  for (auto& v : x) v = model_.bound * (2.0 * rng.uniform() - 1.0);
}

FsvParams FsvParams::defaults() {
  FsvParams p;
  p.obs_dim = 5;
  p.factor_dim = 3;
  p.loadings = {1.0, 0.0, 0.0,  //
                0.5, 1.0, 0.0,  //
                0.5, 0.5, 1.0,  //
                0.2, 0.6, 0.3,  //
                0.8, 0.7, 0.5};
  p.obs_variances.assign(5, 0.5);
  p.ar_coefficients.assign(3, 0.9);
  p.innovation_cov = {0.5, 0.2, 0.1,  //
                      0.2, 0.5, 0.2,  //
                      0.1, 0.2, 0.5};
  p.initial_state.assign(3, 0.0);
  return p;
}

double fsv_log_obs_density(std::span<const double> x, std::span<const double> y,
                           std::span<const double> loadings, std::span<const double> obs_variances,
                           std::size_t obs_dim, std::size_t factor_dim, Precision precision) {
  require(obs_dim >= 1 && obs_dim <= kMaxFsvDim && factor_dim >= 1 && factor_dim <= kMaxFsvDim,
          "fsv: dimensions must be in [1, 16]");
  require(x.size() == factor_dim && y.size() == obs_dim && loadings.size() == obs_dim * factor_dim &&
              obs_variances.size() == obs_dim,
          "fsv: argument sizes do not match the dimensions");
  if (precision == Precision::f32) {
    return fsv_log_obs_density_impl<float>(x, y, loadings, obs_variances, obs_dim, factor_dim);
  }
  return fsv_log_obs_density_impl<double>(x, y, loadings, obs_variances, obs_dim, factor_dim);
}

FsvModel::FsvModel(FsvParams params) : params_(std::move(params)) {
  const std::size_t m = params_.obs_dim;
  const std::size_t k = params_.factor_dim;
  require(m >= 1 && m <= kMaxFsvDim && k >= 1 && k <= kMaxFsvDim, "fsv: dimensions must be in [1, 16]");
  require(params_.loadings.size() == m * k, "fsv: B must be obs_dim x factor_dim");
  require(params_.obs_variances.size() == m, "fsv: Psi must have obs_dim entries");
  require(params_.ar_coefficients.size() == k, "fsv: Phi must have factor_dim entries");
  require(params_.innovation_cov.size() == k * k, "fsv: U must be factor_dim x factor_dim");
  require(params_.initial_state.size() == k, "fsv: x0 must have factor_dim entries");
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      require(params_.loadings[i * k + j] == 0.0, "fsv: B must be zero above the diagonal");
    }
    require(params_.obs_variances[i] > 0.0, "fsv: Psi entries must be positive");
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      require(params_.innovation_cov[i * k + j] == params_.innovation_cov[j * k + i],
              "fsv: U must be symmetric");
    }
  }
  chol_u_ = params_.innovation_cov;
  require(cholesky_lower(chol_u_.data(), k, true), "fsv: U is not positive semidefinite");
}

void FsvModel::sample_initial(std::span<double> x, RandomStream& /*rng*/) const {
  std::copy(params_.initial_state.begin(), params_.initial_state.end(), x.begin());
}

void FsvModel::sample_transition(std::span<const double> previous, std::span<double> next,
                                 RandomStream& rng) const {
  const std::size_t k = params_.factor_dim;
  std::array<double, kMaxFsvDim> z{};
  for (std::size_t i = 0; i < k; ++i) z[i] = rng.normal();
  for (std::size_t i = 0; i < k; ++i) {
    double s = params_.ar_coefficients[i] * previous[i];
    for (std::size_t p = 0; p <= i; ++p) s += chol_u_[i * k + p] * z[p];
    next[i] = s;
  }
}

double FsvModel::log_obs_density(std::span<const double> x, std::span<const double> y,
                                 Precision precision) const {
  return fsv_log_obs_density(x, y, params_.loadings, params_.obs_variances, params_.obs_dim,
                             params_.factor_dim, precision);
}

SimulatedPath FsvModel::simulate(std::size_t length, RandomStream& rng) const {
  require(length >= 1, "fsv: series length must be at least 1");
  const std::size_t m = params_.obs_dim;
  const std::size_t k = params_.factor_dim;
  SimulatedPath path;
  path.length = length;
  path.states.resize(length * k);
  path.observations.resize(length * m);
  std::vector<double> previous = params_.initial_state;
  std::array<double, kMaxFsvDim> factors{};
  for (std::size_t t = 0; t < length; ++t) {
    std::span<double> x(path.states.data() + t * k, k);
    sample_transition(previous, x, rng);
    for (std::size_t i = 0; i < k; ++i) factors[i] = std::exp(0.5 * x[i]) * rng.normal();
    for (std::size_t a = 0; a < m; ++a) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += params_.loadings[a * k + i] * factors[i];
      path.observations[t * m + a] = s + std::sqrt(params_.obs_variances[a]) * rng.normal();
    }
    previous.assign(x.begin(), x.end());
  }
  return path;
}

SimulatedPath fsv_simulate(const FsvModel& model, std::size_t length, RandomStream& rng) {
  return model.simulate(length, rng);
}

void fsv_transition_sample(const FsvModel& model, std::span<const double> previous, std::span<double> next,
                           RandomStream& rng) {
  model.sample_transition(previous, next, rng);
}

LinearGaussianModel::LinearGaussianModel(LinearGaussianParams params) : params_(params) {
  const auto& p = params_;
  require(std::isfinite(p.a) && std::isfinite(p.m0), "linear-gaussian: a and m0 must be finite");
  require(p.q > 0.0 && std::isfinite(p.q), "linear-gaussian: q must be positive");
  require(p.r > 0.0 && std::isfinite(p.r), "linear-gaussian: r must be positive");
  require(p.p0 >= 0.0 && std::isfinite(p.p0), "linear-gaussian: p0 must be non-negative");
}

void LinearGaussianModel::sample_initial(std::span<double> x, RandomStream& rng) const {
  x[0] = params_.m0 + std::sqrt(params_.p0) * rng.normal();
}

void LinearGaussianModel::sample_transition(std::span<const double> previous, std::span<double> next,
                                            RandomStream& rng) const {
  next[0] = params_.a * previous[0] + std::sqrt(params_.q) * rng.normal();
}

double LinearGaussianModel::log_obs_density(std::span<const double> x, std::span<const double> y,
                                            Precision precision) const {
  if (precision == Precision::f32) {
    const float d = static_cast<float>(y[0]) - static_cast<float>(x[0]);
    const auto r = static_cast<float>(params_.r);
    return static_cast<double>(-0.5f * (std::log(2.0f * std::numbers::pi_v<float> * r) + d * d / r));
  }
  const double d = y[0] - x[0];
  return -0.5 * (std::log(2.0 * std::numbers::pi * params_.r) + d * d / params_.r);
}

SimulatedPath LinearGaussianModel::simulate(std::size_t length, RandomStream& rng) const {
  require(length >= 1, "linear-gaussian: series length must be at least 1");
  SimulatedPath path;
  path.length = length;
  path.states.resize(length);
  path.observations.resize(length);
  double x = 0.0;
  sample_initial(std::span<double>(&x, 1), rng);
  for (std::size_t t = 0; t < length; ++t) {
    double next = 0.0;
    sample_transition(std::span<const double>(&x, 1), std::span<double>(&next, 1), rng);
    x = next;
    path.states[t] = x;
    path.observations[t] = x + std::sqrt(params_.r) * rng.normal();
  }
  return path;
}

}  // namespace popmc
