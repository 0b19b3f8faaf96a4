// Copyright 2026 The TCGP Authors.
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

#ifndef TCGP_TCGP_H_
#define TCGP_TCGP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TCGP_API __declspec(dllexport)
#else
#define TCGP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values 1-7 mirror the C++ error kinds. */
typedef enum tcgp_status {
  TCGP_OK = 0,
  TCGP_ERR_INPUT = 1,
  TCGP_ERR_VALIDATION = 2,
  TCGP_ERR_NUMERICAL = 3,
  TCGP_ERR_IO = 4,
  TCGP_ERR_UNSUPPORTED = 5,
  TCGP_ERR_BENCHMARK = 6,
  TCGP_ERR_RUNTIME = 7,
  TCGP_ERR_ARGUMENT = 8
} tcgp_status;

typedef struct tcgp_config tcgp_config;
typedef struct tcgp_result tcgp_result;
typedef struct tcgp_posterior tcgp_posterior;

TCGP_API const char* tcgp_version(void);

/* Message for the last failing call on this thread. Never NULL. */
TCGP_API const char* tcgp_last_error_message(void);

/* Frees strings returned through char** out-parameters. */
TCGP_API void tcgp_string_free(char* s);

/* Configs. environment is "fl", "movie" or "gp_sampled". */
TCGP_API tcgp_status tcgp_config_default(const char* environment,
                                         tcgp_config** out);
TCGP_API tcgp_status tcgp_config_load(const char* path, tcgp_config** out);
TCGP_API tcgp_status tcgp_config_parse(const char* json, tcgp_config** out);
TCGP_API void tcgp_config_free(tcgp_config* config);
TCGP_API tcgp_status tcgp_config_to_json(const tcgp_config* config,
                                         char** out);

/* Setters validate the whole config and leave it unchanged on failure. */
TCGP_API tcgp_status tcgp_config_set_zeta(tcgp_config* config, double zeta);
TCGP_API tcgp_status tcgp_config_set_master_seed(tcgp_config* config,
                                                 uint64_t seed);
TCGP_API tcgp_status tcgp_config_set_n_trials(tcgp_config* config, int n);
TCGP_API tcgp_status tcgp_config_set_output_dir(tcgp_config* config,
                                                const char* dir);
TCGP_API tcgp_status tcgp_config_get_zeta(const tcgp_config* config,
                                          double* out);
TCGP_API tcgp_status tcgp_config_get_output_dir(const tcgp_config* config,
                                                char** out);

/* Runs every trial. Fails only if all trials fail. */
TCGP_API tcgp_status tcgp_run(const tcgp_config* config, tcgp_result** out);
TCGP_API void tcgp_result_free(tcgp_result* result);

/* Writes per_round.csv, aggregate.csv, run_meta.json and, when tracing,
   trace.json into dir (created if missing). */
TCGP_API tcgp_status tcgp_result_write(const tcgp_result* result,
                                       const char* dir);
TCGP_API tcgp_status tcgp_result_trial_count(const tcgp_result* result,
                                             int* out);
TCGP_API tcgp_status tcgp_result_failed_trials(const tcgp_result* result,
                                               int* out);
/* Final cumulative regrets of one trial (index into the trial list). */
TCGP_API tcgp_status tcgp_result_final_regret(const tcgp_result* result,
                                              int trial, double* group,
                                              double* super_arm,
                                              double* total);
/* Short JSON summary: per-trial final regrets and means. */
TCGP_API tcgp_status tcgp_result_summary_json(const tcgp_result* result,
                                              char** out);

/* Replays a trace.json. all_hold is 1 when every trial satisfies both the
   regret bound and the information-gain lower check. */
TCGP_API tcgp_status tcgp_check_bounds_file(const char* trace_path,
                                            int* all_hold,
                                            char** report_json);

/* Ingests MovieLens-style CSVs and returns ingestion counts as JSON. */
TCGP_API tcgp_status tcgp_ingest(const char* ratings_path,
                                 const char* movies_path, uint64_t seed,
                                 char** stats_json);

TCGP_API tcgp_status tcgp_sweep_dir_name(int index, double zeta, char** out);

/* Posterior over two outputs. x is n*d row-major, y is n*2 row-major.
   kernel_json may be NULL for the default kernel. sparse_points = 0 asks for
   the exact posterior. */
TCGP_API tcgp_status tcgp_posterior_fit(const double* x, const double* y,
                                        size_t n, size_t d,
                                        const char* kernel_json,
                                        double noise_sigma, int sparse_points,
                                        uint64_t seed, tcgp_posterior** out);
TCGP_API void tcgp_posterior_free(tcgp_posterior* posterior);
TCGP_API tcgp_status tcgp_posterior_predict(const tcgp_posterior* posterior,
                                            const double* x, size_t d,
                                            double mean[2], double std[2]);

#ifdef __cplusplus
}
#endif

#endif /* TCGP_TCGP_H_ */
