// Copyright 2026 The renyiplay Authors
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

#ifndef RENYIPLAY_RENYIPLAY_H
#define RENYIPLAY_RENYIPLAY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RP_API __declspec(dllexport)
#else
#define RP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rp_status {
  RP_OK = 0,
  RP_ERR_CHECK = 1,   /* a check ran and failed (gradcheck) */
  RP_ERR_CONFIG = 2,
  RP_ERR_INPUT = 3,
  RP_ERR_NUMERIC = 4,
  RP_ERR_DOMAIN = 5,
  RP_ERR_STATE = 6,
  RP_ERR_IO = 7,
  RP_ERR_INTERNAL = 8
} rp_status;

typedef struct rp_policy rp_policy;

/* Message for the last failing call on this thread; never NULL. */
RP_API const char* rp_last_error(void);
RP_API const char* rp_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
RP_API void rp_string_free(char* s);

/* space_json: {"vocab_size", "response_len", "prompts" | "num_prompts", "prompt_probs"}.
 * init: 0 = zeros, 1 = gaussian(stddev, seed). */
RP_API rp_status rp_policy_create(const char* space_json, int init, double stddev, uint64_t seed, rp_policy** out);
RP_API rp_status rp_policy_from_json(const char* checkpoint_json, rp_policy** out);
RP_API rp_status rp_policy_load(const char* path, rp_policy** out);
RP_API rp_status rp_policy_save(const rp_policy* policy, const char* path);
RP_API rp_status rp_policy_to_json(const rp_policy* policy, char** out);
RP_API void rp_policy_destroy(rp_policy* policy);

RP_API rp_status rp_policy_shape(const rp_policy* policy, int* vocab_size, int* response_len, size_t* num_prompts,
                                 size_t* parameter_count);
RP_API rp_status rp_policy_log_prob(const rp_policy* policy, size_t prompt, const int* response, size_t len,
                                    double* out);
/* Writes V^L probabilities in lexicographic order; *written receives V^L. */
RP_API rp_status rp_policy_enumerate(const rp_policy* policy, size_t prompt, double* out, size_t capacity,
                                     size_t* written);
/* n responses of length L, row-major into out (capacity >= n * L). */
RP_API rp_status rp_policy_sample(const rp_policy* policy, size_t prompt, uint64_t seed, size_t n, int* out,
                                  size_t capacity);

/* kind: "renyi", "kl", "chi2", "bhattacharyya", "hellinger_sq". alpha is
 * only read for "renyi". */
RP_API rp_status rp_divergence(const char* kind, const double* p, const double* q, size_t n, double alpha,
                               double* out);

/* Parses and validates a config with KEY=VALUE overrides applied; returns
 * the canonical effective config. */
RP_API rp_status rp_config_resolve(const char* config_json, const char* const* overrides, size_t n_overrides,
                                   char** effective_json);

RP_API rp_status rp_annotator_create(const char* config_json, rp_policy** out);

/* DivergenceTable of policy against the config's annotator at the config's eval_alphas. */
RP_API rp_status rp_evaluate(const char* config_json, const rp_policy* policy, char** table_json);

/* Writes the run artifacts under out_dir. On RP_ERR_NUMERIC a diagnostic.json is left in out_dir. */
RP_API rp_status rp_run(const char* config_json, const char* out_dir, int force, char** report_json);
RP_API rp_status rp_sweep(const char* config_json, const char* out_dir, int force, char** report_json);

/* *passed is 1 when every cell is within tolerance. corrupt != 0 perturbs the
 * analytic gradient (negative control). */
RP_API rp_status rp_gradcheck(const char* config_json, int corrupt, char** report_json, int* passed);

#ifdef __cplusplus
}
#endif

#endif  /* RENYIPLAY_RENYIPLAY_H */
