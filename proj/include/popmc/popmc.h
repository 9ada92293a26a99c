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

/* C interface to popmc. Every call that can fail returns a popmc_status;
 * on failure popmc_last_error() describes the error on the calling thread.
 * Handles are opaque and owned by the caller. */

#ifndef POPMC_POPMC_H
#define POPMC_POPMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define POPMC_API __declspec(dllexport)
#else
#define POPMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match the CLI exit codes. */
typedef enum popmc_status {
  POPMC_OK = 0,
  POPMC_ERR_INTERNAL = 1,
  POPMC_ERR_CONFIG = 2,
  POPMC_ERR_NUMERIC = 3,
  POPMC_ERR_IO = 4
} popmc_status;

typedef struct popmc_config popmc_config;
typedef struct popmc_stream popmc_stream;

POPMC_API const char* popmc_version(void);

/* Message of the last failed call on this thread; "" if none. */
POPMC_API const char* popmc_last_error(void);

/* kind: istoy, popmcmc, smc-sampler, pfilter, gendata or bench. */
POPMC_API popmc_status popmc_config_create(const char* kind, popmc_config** out);
POPMC_API void popmc_config_destroy(popmc_config* config);
POPMC_API popmc_status popmc_config_set(popmc_config* config, const char* key, const char* value);
/* The returned string stays valid until the key is set again. */
POPMC_API popmc_status popmc_config_get(const popmc_config* config, const char* key, const char** value);
POPMC_API size_t popmc_config_key_count(const popmc_config* config);
/* Keys in sorted order with their current values. */
POPMC_API popmc_status popmc_config_key_at(const popmc_config* config, size_t index, const char** key,
                                           const char** value);
POPMC_API popmc_status popmc_config_load_file(popmc_config* config, const char* path);

/* Runs the experiment into out_dir. wall_clock_seconds may be NULL. */
POPMC_API popmc_status popmc_run(const popmc_config* config, const char* out_dir, double* wall_clock_seconds);

/* Stream `index` of master stream `master_seed`. generator: mrg32k3a or
 * xorshift. */
POPMC_API popmc_status popmc_stream_create(const char* generator, uint64_t master_seed, uint64_t index,
                                           popmc_stream** out);
POPMC_API void popmc_stream_destroy(popmc_stream* stream);
POPMC_API double popmc_stream_uniform(popmc_stream* stream);
POPMC_API double popmc_stream_normal(popmc_stream* stream);
/* Jumps n uniforms ahead in O(log n); mrg32k3a only. Drops a cached normal. */
POPMC_API popmc_status popmc_stream_skip(popmc_stream* stream, uint64_t n);

/* single_precision != 0 sums in float. */
POPMC_API popmc_status popmc_pairwise_sum(const double* values, size_t n, int single_precision, unsigned workers,
                                          double* out);
/* weights_out has room for n values; log_increment_out may be NULL. */
POPMC_API popmc_status popmc_normalize_log_weights(const double* log_weights, size_t n, double* weights_out,
                                                   double* log_increment_out);
POPMC_API popmc_status popmc_ess(const double* weights, size_t n, double* out);
POPMC_API popmc_status popmc_mixture_log_posterior(const double* mu, size_t k, const double* y, size_t m,
                                                   double sigma, double bound, int single_precision,
                                                   double* out);

#ifdef __cplusplus
}
#endif

#endif
