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

// Exercises the public C interface. Built as C and linked against the
// shared library only.

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "popmc/popmc.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static void test_streams(void) {
  popmc_stream* a = NULL;
  popmc_stream* b = NULL;
  EXPECT(popmc_stream_create("mrg32k3a", 12345, 0, &a) == POPMC_OK);
  EXPECT(popmc_stream_create("mrg32k3a", 12345, 0, &b) == POPMC_OK);
  for (int i = 0; i < 1000; ++i) (void)popmc_stream_uniform(a);
  EXPECT(popmc_stream_skip(b, 1000) == POPMC_OK);
  EXPECT(popmc_stream_uniform(a) == popmc_stream_uniform(b));
  popmc_stream_destroy(b);

  popmc_stream* c = NULL;
  popmc_stream* d = NULL;
  EXPECT(popmc_stream_create("mrg32k3a", 1, 1, &c) == POPMC_OK);
  EXPECT(popmc_stream_create("mrg32k3a", 1, 0, &d) == POPMC_OK);
  EXPECT(popmc_stream_skip(d, (uint64_t)1 << 40) == POPMC_OK);
  EXPECT(popmc_stream_uniform(c) == popmc_stream_uniform(d));
  popmc_stream_destroy(c);
  popmc_stream_destroy(d);

  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = popmc_stream_uniform(a);
    EXPECT(u > 0.0 && u < 1.0);
    sum += popmc_stream_normal(a);
  }
  EXPECT(fabs(sum / 10000.0) < 0.05);
  popmc_stream_destroy(a);

  popmc_stream* x = NULL;
  EXPECT(popmc_stream_create("xorshift", 3, 2, &x) == POPMC_OK);
  EXPECT(popmc_stream_skip(x, 5) == POPMC_ERR_CONFIG);
  EXPECT(strlen(popmc_last_error()) > 0);
  popmc_stream_destroy(x);

  popmc_stream* bad = NULL;
  EXPECT(popmc_stream_create("lcg", 1, 0, &bad) == POPMC_ERR_CONFIG);
  EXPECT(bad == NULL);
  EXPECT(popmc_stream_create("mrg32k3a", 1, (uint64_t)1 << 24, &bad) == POPMC_ERR_CONFIG);
  popmc_stream_destroy(NULL);
}

static void test_numerics(void) {
  const double v[5] = {1.0, 2.0, 3.0, 4.0, 5.0};
  double s = 0.0;
  EXPECT(popmc_pairwise_sum(v, 5, 0, 1, &s) == POPMC_OK);
  EXPECT(s == 15.0);
  EXPECT(popmc_pairwise_sum(v, 5, 1, 2, &s) == POPMC_OK);
  EXPECT(s == 15.0);
  EXPECT(popmc_pairwise_sum(NULL, 5, 0, 1, &s) == POPMC_ERR_CONFIG);

  const double lw[3] = {-1.0, -1.0, -1.0};
  double w[3];
  double incr = 0.0;
  EXPECT(popmc_normalize_log_weights(lw, 3, w, &incr) == POPMC_OK);
  EXPECT(fabs(w[0] - 1.0 / 3.0) < 1e-15);
  EXPECT(fabs(incr - (-1.0)) < 1e-15);  // log of the mean weight
  double e = 0.0;
  EXPECT(popmc_ess(w, 3, &e) == POPMC_OK);
  EXPECT(fabs(e - 3.0) < 1e-12);
  const double dead[2] = {-INFINITY, -INFINITY};
  EXPECT(popmc_normalize_log_weights(dead, 2, w, NULL) == POPMC_ERR_NUMERIC);

  const double mu[4] = {-3.0, 0.0, 3.0, 6.0};
  const double y[3] = {-3.0, 0.1, 5.9};
  double lp = 0.0;
  EXPECT(popmc_mixture_log_posterior(mu, 4, y, 3, 0.55, 10.0, 0, &lp) == POPMC_OK);
  double ref = 0.0;
  for (int j = 0; j < 3; ++j) {
    double dens = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double z = (y[j] - mu[i]) / 0.55;
      dens += 0.25 * exp(-0.5 * z * z) / (0.55 * sqrt(2.0 * 3.14159265358979323846));
    }
    ref += log(dens);
  }
  EXPECT(fabs(lp - ref) < 1e-12 * fabs(ref));
  const double outside[4] = {-3.0, 0.0, 3.0, 10.5};
  EXPECT(popmc_mixture_log_posterior(outside, 4, y, 3, 0.55, 10.0, 0, &lp) == POPMC_OK);
  EXPECT(isinf(lp) && lp < 0);
}

static void test_config(void) {
  popmc_config* cfg = NULL;
  EXPECT(popmc_config_create("nope", &cfg) == POPMC_ERR_CONFIG);
  EXPECT(popmc_config_create("istoy", &cfg) == POPMC_OK);
  const char* value = NULL;
  EXPECT(popmc_config_get(cfg, "particles", &value) == POPMC_OK);
  EXPECT(strcmp(value, "16777216") == 0);
  EXPECT(popmc_config_set(cfg, "particles", "65536") == POPMC_OK);
  EXPECT(popmc_config_get(cfg, "particles", &value) == POPMC_OK);
  EXPECT(strcmp(value, "65536") == 0);
  EXPECT(popmc_config_set(cfg, "bogus", "1") == POPMC_ERR_CONFIG);
  EXPECT(strstr(popmc_last_error(), "bogus") != NULL);

  const size_t n = popmc_config_key_count(cfg);
  EXPECT(n >= 6);
  const char* prev = "";
  for (size_t i = 0; i < n; ++i) {
    const char* key = NULL;
    EXPECT(popmc_config_key_at(cfg, i, &key, &value) == POPMC_OK);
    EXPECT(strcmp(prev, key) < 0);
    prev = key;
  }
  const char* key = NULL;
  EXPECT(popmc_config_key_at(cfg, n, &key, &value) == POPMC_ERR_CONFIG);

  const char* dir = getenv("POPMC_CAPI_OUT");
  double secs = -1.0;
  EXPECT(popmc_run(cfg, dir ? dir : "capi_out", &secs) == POPMC_OK);
  EXPECT(secs >= 0.0);
  EXPECT(popmc_config_set(cfg, "precision", "quad") == POPMC_OK);
  EXPECT(popmc_run(cfg, dir ? dir : "capi_out", NULL) == POPMC_ERR_CONFIG);
  EXPECT(popmc_config_load_file(cfg, "/nonexistent/popmc.cfg") == POPMC_ERR_IO);
  popmc_config_destroy(cfg);
  popmc_config_destroy(NULL);
}

int main(void) {
  EXPECT(strlen(popmc_version()) > 0);
  test_streams();
  test_numerics();
  test_config();
  if (failures != 0) {
    fprintf(stderr, "%d C interface check(s) failed\n", failures);
    return 1;
  }
  printf("C interface checks passed\n");
  return 0;
}
