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

#include "popmc/popmc.h"

#include <algorithm>
#include <exception>
#include <iterator>
#include <new>
#include <string>

#include "popmc/error.hpp"
#include "popmc/experiment.hpp"
#include "popmc/models.hpp"
#include "popmc/parallel.hpp"
#include "popmc/prng.hpp"

struct popmc_config {
  popmc::ExperimentConfig config;
};

struct popmc_stream {
  popmc::RandomStream stream;
};

namespace {

thread_local std::string g_last_error;

popmc_status fail(popmc_status status, const char* what) {
  g_last_error = what;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class Body>
popmc_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return POPMC_OK;
  } catch (const popmc::Error& e) {
    return fail(static_cast<popmc_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(POPMC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(POPMC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(POPMC_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw popmc::ConfigError(message);
}

}  // namespace

extern "C" {

const char* popmc_version(void) { return "0.1.0"; }

const char* popmc_last_error(void) { return g_last_error.c_str(); }

popmc_status popmc_config_create(const char* kind, popmc_config** out) {
  return guarded([&] {
    require(kind != nullptr && out != nullptr, "popmc_config_create: null argument");
    *out = nullptr;
    *out = new popmc_config{popmc::ExperimentConfig(popmc::parse_experiment(kind))};
  });
}

void popmc_config_destroy(popmc_config* config) { delete config; }

popmc_status popmc_config_set(popmc_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "popmc_config_set: null argument");
    config->config.set(key, value);
  });
}

popmc_status popmc_config_get(const popmc_config* config, const char* key, const char** value) {
  return guarded([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "popmc_config_get: null argument");
    *value = config->config.get(key).c_str();
  });
}

size_t popmc_config_key_count(const popmc_config* config) {
  return config == nullptr ? 0 : config->config.values().size();
}

popmc_status popmc_config_key_at(const popmc_config* config, size_t index, const char** key, const char** value) {
  return guarded([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "popmc_config_key_at: null argument");
    const auto& values = config->config.values();
    require(index < values.size(), "popmc_config_key_at: index out of range");
    auto it = values.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(index));
    *key = it->first.c_str();
    *value = it->second.c_str();
  });
}

popmc_status popmc_config_load_file(popmc_config* config, const char* path) {
  return guarded([&] {
    require(config != nullptr && path != nullptr, "popmc_config_load_file: null argument");
    config->config.load_file(path);
  });
}

popmc_status popmc_run(const popmc_config* config, const char* out_dir, double* wall_clock_seconds) {
  return guarded([&] {
    require(config != nullptr && out_dir != nullptr, "popmc_run: null argument");
    const auto summary = popmc::run_experiment(config->config, out_dir);
    if (wall_clock_seconds != nullptr) *wall_clock_seconds = summary.wall_clock_seconds;
  });
}

popmc_status popmc_stream_create(const char* generator, uint64_t master_seed, uint64_t index, popmc_stream** out) {
  return guarded([&] {
    require(generator != nullptr && out != nullptr, "popmc_stream_create: null argument");
    *out = nullptr;
    const auto kind = popmc::parse_generator(generator);
    if (kind == popmc::GeneratorKind::mrg32k3a) {
      require(index < (uint64_t{1} << 24), "popmc_stream_create: index must be below 2^24");
      const auto start = popmc::skip_ahead(popmc::seed_state(master_seed), index * popmc::kDefaultBlockLength);
      *out = new popmc_stream{popmc::RandomStream(start)};
    } else {
      require(index < (uint64_t{1} << 24), "popmc_stream_create: index must be below 2^24");
      const auto seeds = popmc::xorshift_make_seeds(master_seed, index + 1);
      *out = new popmc_stream{popmc::RandomStream(seeds.back())};
    }
  });
}

void popmc_stream_destroy(popmc_stream* stream) { delete stream; }

double popmc_stream_uniform(popmc_stream* stream) { return stream == nullptr ? 0.0 : stream->stream.uniform(); }

double popmc_stream_normal(popmc_stream* stream) { return stream == nullptr ? 0.0 : stream->stream.normal(); }

popmc_status popmc_stream_skip(popmc_stream* stream, uint64_t n) {
  return guarded([&] {
    require(stream != nullptr, "popmc_stream_skip: null argument");
    require(stream->stream.kind() == popmc::GeneratorKind::mrg32k3a, "popmc_stream_skip: only mrg32k3a streams skip");
    stream->stream = popmc::RandomStream(popmc::skip_ahead(stream->stream.mrg_state(), n));
  });
}

popmc_status popmc_pairwise_sum(const double* values, size_t n, int single_precision, unsigned workers, double* out) {
  return guarded([&] {
    require(out != nullptr && (values != nullptr || n == 0), "popmc_pairwise_sum: null argument");
    require(workers >= 1, "popmc_pairwise_sum: workers must be at least 1");
    *out = popmc::pairwise_sum({values, n}, single_precision ? popmc::Precision::f32 : popmc::Precision::f64, workers);
  });
}

popmc_status popmc_normalize_log_weights(const double* log_weights, size_t n, double* weights_out,
                                         double* log_increment_out) {
  return guarded([&] {
    require(log_weights != nullptr && weights_out != nullptr, "popmc_normalize_log_weights: null argument");
    const auto w = popmc::normalize_log_weights({log_weights, n});
    std::copy(w.weights.begin(), w.weights.end(), weights_out);
    if (log_increment_out != nullptr) *log_increment_out = w.log_norm_constant_increment;
  });
}

popmc_status popmc_ess(const double* weights, size_t n, double* out) {
  return guarded([&] {
    require(weights != nullptr && out != nullptr, "popmc_ess: null argument");
    *out = popmc::ess({weights, n});
  });
}

popmc_status popmc_mixture_log_posterior(const double* mu, size_t k, const double* y, size_t m, double sigma,
                                         double bound, int single_precision, double* out) {
  return guarded([&] {
    require(mu != nullptr && y != nullptr && out != nullptr, "popmc_mixture_log_posterior: null argument");
    popmc::MixtureModel model;
    model.k = k;
    model.sigma = sigma;
    model.bound = bound;
    model.y.assign(y, y + m);
    *out = popmc::mixture_log_posterior({mu, k}, model,
                                        single_precision ? popmc::Precision::f32 : popmc::Precision::f64);
  });
}

}  // extern "C"
