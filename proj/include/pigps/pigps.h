// Copyright 2026 The PI-GPS Authors.
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


/* C interface to the PI-GPS library.
 *
 * Every function returns a pigps_status. On failure the message is
 * available from pigps_last_error() until the next call on the same thread.
 * Handles are opaque and owned by the caller; release them with the
 * matching *_free function. Strings returned through char** are released
 * with pigps_string_free. */

#ifndef PIGPS_PIGPS_H_
#define PIGPS_PIGPS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PIGPS_API __declspec(dllexport)
#else
#define PIGPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pigps_status {
  PIGPS_OK = 0,
  PIGPS_INVALID_ARGUMENT = 1,
  PIGPS_CONFIG = 2,
  PIGPS_IO = 3,
  PIGPS_NUMERIC = 4,
  PIGPS_INTERNAL = 5
} pigps_status;

typedef struct pigps_experiment pigps_experiment;
typedef struct pigps_policy pigps_policy;

PIGPS_API const char* pigps_version(void);
PIGPS_API const char* pigps_last_error(void);
PIGPS_API void pigps_string_free(char* text);

/* Experiments. Overrides are "dotted.key=value"; the whole configuration is
 * revalidated after each one. */
PIGPS_API pigps_status pigps_experiment_load(const char* path, pigps_experiment** out);
PIGPS_API pigps_status pigps_experiment_from_string(const char* text, pigps_experiment** out);
PIGPS_API pigps_status pigps_experiment_override(pigps_experiment* experiment,
                                                 const char* assignment);
/* Replaces the seed list with the single given seed. */
PIGPS_API pigps_status pigps_experiment_set_seed(pigps_experiment* experiment, uint64_t seed);
PIGPS_API pigps_status pigps_experiment_set_output(pigps_experiment* experiment,
                                                   const char* dir);
PIGPS_API pigps_status pigps_experiment_to_string(const pigps_experiment* experiment,
                                                  char** out);
/* Runs every seed into the configured output directory. */
PIGPS_API pigps_status pigps_experiment_run(const pigps_experiment* experiment);
PIGPS_API void pigps_experiment_free(pigps_experiment* experiment);

/* Policy checkpoints (global network or local linear-Gaussian). */
PIGPS_API pigps_status pigps_policy_load(const char* path, pigps_policy** out);
PIGPS_API pigps_status pigps_policy_dims(const pigps_policy* policy, int* state_dim,
                                         int* action_dim, int* horizon);
PIGPS_API pigps_status pigps_policy_mean_action(const pigps_policy* policy, int t,
                                                const double* state, size_t state_len,
                                                double* action, size_t action_len);
/* Noiseless evaluation under the experiment's task and evaluation protocol. */
PIGPS_API pigps_status pigps_policy_evaluate(const pigps_policy* policy,
                                             const pigps_experiment* experiment,
                                             double* success_rate, double* mean_cost);
PIGPS_API void pigps_policy_free(pigps_policy* policy);

/* Builds a comparison report (JSON text) over finished run directories. */
PIGPS_API pigps_status pigps_compare(const char* const* dirs, size_t count, char** report);

#ifdef __cplusplus
}
#endif

#endif /* PIGPS_PIGPS_H_ */
