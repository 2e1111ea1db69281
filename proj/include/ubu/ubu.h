/*
   Copyright 2026 The ubu-sampling Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

/* C interface to libubu. All handles are opaque; every call returns a
   ubu_status and, on failure, leaves a message retrievable with
   ubu_last_error() on the calling thread. Strings returned through `const
   char**` are owned by the handle they came from and live as long as it. */

#ifndef UBU_UBU_H
#define UBU_UBU_H

#include <stddef.h>
#include <stdint.h>

#if defined(UBU_BUILDING_LIBRARY)
#define UBU_API __attribute__((visibility("default")))
#else
#define UBU_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ubu_status {
    UBU_OK = 0,
    UBU_ERR_INVALID_ARGUMENT = 1,
    UBU_ERR_CONFIG = 2,
    UBU_ERR_DIVERGED = 3,
    UBU_ERR_IO = 4,
    UBU_ERR_DIMENSION = 5,
    UBU_ERR_STATE = 6,
    UBU_ERR_INTERNAL = 7
} ubu_status;

typedef struct ubu_model ubu_model;
typedef struct ubu_sampler ubu_sampler;
typedef struct ubu_config ubu_config;
typedef struct ubu_result ubu_result;

typedef struct ubu_constants {
    double m, M1, M2, M3, sigma;
    double min_hessian_eig;
    int convex;
} ubu_constants;

/* Progress / warning sink for long runs. May be called from the calling
   thread only. */
typedef void (*ubu_log_fn)(const char* message, void* user);

UBU_API const char* ubu_version(void);
UBU_API int ubu_csv_schema_version(void);
/* Message of the last failed call on this thread ("" if none). */
UBU_API const char* ubu_last_error(void);
UBU_API const char* ubu_status_name(ubu_status status);

/* ---- models ---------------------------------------------------------- */

/* id: bench1d, bench2d, bench1d-fs:N, bench2d-fs:N, bench10d-fs:N, quadratic[:d[:m]] */
UBU_API ubu_status ubu_model_create(const char* id, uint64_t seed, ubu_model** out);
UBU_API void ubu_model_destroy(ubu_model* model);
UBU_API ubu_status ubu_model_id(const ubu_model* model, const char** out);
UBU_API ubu_status ubu_model_dim(const ubu_model* model, size_t* out);
UBU_API ubu_status ubu_model_components(const ubu_model* model, size_t* out);
UBU_API ubu_status ubu_model_test_dim(const ubu_model* model, size_t* out);
UBU_API ubu_status ubu_model_noise_sigma(const ubu_model* model, double* out);
UBU_API ubu_status ubu_model_value(const ubu_model* model, const double* x, double* out);
UBU_API ubu_status ubu_model_gradient(const ubu_model* model, const double* x, double* grad);
/* 0-based component index */
UBU_API ubu_status ubu_model_component_gradient(const ubu_model* model, size_t i, const double* x, double* grad);
UBU_API ubu_status ubu_model_test_function(const ubu_model* model, const double* x, double* out);
UBU_API ubu_status ubu_model_constants(const ubu_model* model, ubu_constants* out);

/* ---- single trajectories --------------------------------------------- */

/* estimator: full, sg, minibatch:p, svrg:p[:q], saga[:p]. The streams are
   keyed by (seed, experiment, replica); the state starts at X = 0 with
   V ~ N(0, I / M2). */
UBU_API ubu_status ubu_sampler_create(const ubu_model* model, const char* estimator, double h, double M2,
                                      uint64_t seed, uint32_t experiment, uint32_t replica, ubu_sampler** out);
UBU_API void ubu_sampler_destroy(ubu_sampler* sampler);
/* Advances n steps. On divergence returns UBU_ERR_DIVERGED and the sampler
   refuses further steps. */
UBU_API ubu_status ubu_sampler_step(ubu_sampler* sampler, uint64_t n);
/* Time average of the test function over the next K steps (observed before
   each step); out has ubu_model_test_dim entries. */
UBU_API ubu_status ubu_sampler_time_average(ubu_sampler* sampler, uint64_t K, double* out);
UBU_API ubu_status ubu_sampler_get_state(const ubu_sampler* sampler, double* x, double* v);
UBU_API ubu_status ubu_sampler_set_state(ubu_sampler* sampler, const double* x, const double* v);
UBU_API ubu_status ubu_sampler_work(const ubu_sampler* sampler, uint64_t* out);
UBU_API ubu_status ubu_sampler_steps(const ubu_sampler* sampler, uint64_t* out);

/* ---- experiments ------------------------------------------------------ */

UBU_API ubu_status ubu_config_load(const char* path, ubu_config** out);
/* base_dir resolves relative fixture paths; may be NULL. */
UBU_API ubu_status ubu_config_parse(const char* json, const char* base_dir, ubu_config** out);
UBU_API void ubu_config_destroy(ubu_config* config);
UBU_API ubu_status ubu_config_set_seed(ubu_config* config, uint64_t seed);
UBU_API ubu_status ubu_config_set_output(ubu_config* config, const char* path);
UBU_API ubu_status ubu_config_output(const ubu_config* config, const char** out);
UBU_API ubu_status ubu_config_name(const ubu_config* config, const char** out);
UBU_API ubu_status ubu_config_to_json(const ubu_config* config, const char** out);

/* command: bias-sweep, compare, ratio, coefficient, select, reference.
   workers = 0 uses all hardware threads; the values never depend on it. */
UBU_API ubu_status ubu_run(const ubu_config* config, const char* command, unsigned workers, ubu_log_fn log,
                           void* user, ubu_result** out);
UBU_API void ubu_result_destroy(ubu_result* result);
UBU_API ubu_status ubu_result_table_count(const ubu_result* result, size_t* out);
/* Suffix appended to the output stem for table i ("" for single tables). */
UBU_API ubu_status ubu_result_table_suffix(const ubu_result* result, size_t i, const char** out);
UBU_API ubu_status ubu_result_table_csv(const ubu_result* result, size_t i, const char** out);
UBU_API ubu_status ubu_result_warning_count(const ubu_result* result, size_t* out);
UBU_API ubu_status ubu_result_warning(const ubu_result* result, size_t i, const char** out);
/* Non-zero when some cell had more than half of its replicas diverge. */
UBU_API ubu_status ubu_result_divergence_dominated(const ubu_result* result, int* out);
UBU_API ubu_status ubu_result_cells(const ubu_result* result, uint64_t* cells, uint64_t* dominated);
UBU_API ubu_status ubu_result_reference(const ubu_result* result, const char** method, const char** settings);
/* Reference fixture text (reference command only; "" otherwise). */
UBU_API ubu_status ubu_result_fixture(const ubu_result* result, const char** out);

#ifdef __cplusplus
}
#endif

#endif /* UBU_UBU_H */
