/*
 * Copyright 2026 The masala Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MASALA_MASALA_H_
#define MASALA_MASALA_H_

/*
 * C interface to the masala explanation engine.
 *
 * Every fallible call returns a masala_status; on failure a one-line message
 * is available from masala_last_error() on the calling thread until the next
 * failing call. Handles are opaque, owned by the caller, and released with the
 * matching *_free function. Strings returned through char** out-parameters are
 * heap-allocated and released with masala_string_free.
 *
 * Dataset values passed in and out of this API are in original feature units.
 */

#include <stddef.h>

#if defined(_WIN32)
#  define MASALA_API __declspec(dllexport)
#else
#  define MASALA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum masala_status {
  MASALA_OK = 0,
  MASALA_ERR_INVALID_ARGUMENT = 1,
  MASALA_ERR_IO = 2,
  MASALA_ERR_PARSE = 3,
  MASALA_ERR_ORACLE = 4,
  MASALA_ERR_FINGERPRINT = 5,
  MASALA_ERR_NOT_CONVERGED = 6,
  MASALA_ERR_INTERNAL = 7
} masala_status;

typedef struct masala_dataset masala_dataset;
typedef struct masala_oracle masala_oracle;
typedef struct masala_model masala_model;
typedef struct masala_explanation masala_explanation;
typedef struct masala_report masala_report;

MASALA_API const char* masala_version(void);
MASALA_API const char* masala_last_error(void);
MASALA_API const char* masala_status_name(masala_status status);
MASALA_API void masala_string_free(char* s);

/* Datasets. prediction_column may be NULL when the file has none. */
MASALA_API masala_status masala_dataset_load(const char* path, const char* prediction_column,
                                             masala_dataset** out);
MASALA_API masala_status masala_dataset_parse(const char* csv_text,
                                              const char* prediction_column,
                                              masala_dataset** out);
MASALA_API void masala_dataset_free(masala_dataset* dataset);
MASALA_API size_t masala_dataset_rows(const masala_dataset* dataset);
MASALA_API size_t masala_dataset_cols(const masala_dataset* dataset);
MASALA_API size_t masala_dataset_dropped_rows(const masala_dataset* dataset);
MASALA_API int masala_dataset_has_predictions(const masala_dataset* dataset);
/* Borrowed pointer, valid while the dataset lives. NULL when out of range. */
MASALA_API const char* masala_dataset_feature_name(const masala_dataset* dataset, size_t feature);
/* Writes 16 hex digits plus a terminator; buf must hold 17 bytes. */
MASALA_API masala_status masala_dataset_fingerprint(const masala_dataset* dataset, char* buf,
                                                    size_t buf_size);
MASALA_API masala_status masala_dataset_row(const masala_dataset* dataset, size_t row,
                                            double* values, size_t count);

/* Oracles. The precomputed oracle answers only for rows of its dataset; the
 * command oracle runs `/bin/sh -c command` once per query batch. */
MASALA_API masala_status masala_oracle_precomputed(const masala_dataset* dataset,
                                                   masala_oracle** out);
MASALA_API masala_status masala_oracle_command(const masala_dataset* dataset, const char* command,
                                               double timeout_seconds, masala_oracle** out);
MASALA_API void masala_oracle_free(masala_oracle* oracle);
/* rows is row-major, n_rows x n_cols; out receives n_rows predictions. */
MASALA_API masala_status masala_oracle_predict(const masala_oracle* oracle, const double* rows,
                                               size_t n_rows, size_t n_cols, double* out);

/* Clustering models. config_json may be NULL for defaults. */
MASALA_API masala_status masala_model_build(const masala_dataset* dataset, const char* config_json,
                                            masala_model** out);
MASALA_API masala_status masala_model_load(const char* path, const masala_dataset* dataset,
                                           masala_model** out);
MASALA_API masala_status masala_model_parse(const char* json, const masala_dataset* dataset,
                                            masala_model** out);
MASALA_API masala_status masala_model_save(const masala_model* model, const char* path);
MASALA_API masala_status masala_model_to_json(const masala_model* model, char** out);
MASALA_API void masala_model_free(masala_model* model);
MASALA_API size_t masala_model_num_features(const masala_model* model);
MASALA_API const char* masala_model_feature_name(const masala_model* model, size_t feature);
MASALA_API size_t masala_model_num_clusters(const masala_model* model, size_t feature);
MASALA_API double masala_model_cost(const masala_model* model, size_t feature);
/* Reads the fingerprint recorded in a model file without a dataset. */
MASALA_API masala_status masala_model_file_fingerprint(const char* path, char* buf,
                                                       size_t buf_size);
/* Debug dump of one feature's pairwise dissimilarity matrix as CSV. */
MASALA_API masala_status masala_dissimilarity_csv(const masala_dataset* dataset, size_t feature,
                                                  const char* config_json, char** out);

/* Explanations. */
MASALA_API masala_status masala_explain_row(const masala_model* model,
                                            const masala_dataset* dataset,
                                            const masala_oracle* oracle, size_t row,
                                            masala_explanation** out);
MASALA_API masala_status masala_explain_values(const masala_model* model,
                                               const masala_dataset* dataset,
                                               const masala_oracle* oracle, const double* values,
                                               size_t count, masala_explanation** out);
MASALA_API void masala_explanation_free(masala_explanation* explanation);
MASALA_API masala_status masala_explanation_to_json(const masala_explanation* explanation,
                                                    char** out);
MASALA_API size_t masala_explanation_num_features(const masala_explanation* explanation);
/* original_units != 0 selects coefficients in the dataset's own units. */
MASALA_API double masala_explanation_coefficient(const masala_explanation* explanation,
                                                 size_t feature, int original_units);
MASALA_API double masala_explanation_intercept(const masala_explanation* explanation,
                                               int original_units);
MASALA_API double masala_explanation_base_prediction(const masala_explanation* explanation);
MASALA_API double masala_explanation_surrogate_prediction(const masala_explanation* explanation);
MASALA_API double masala_explanation_fidelity(const masala_explanation* explanation);
MASALA_API size_t masala_explanation_locality_size(const masala_explanation* explanation);
MASALA_API size_t masala_explanation_fallback_level(const masala_explanation* explanation);

/* Evaluation. methods_json is an array such as
 *   [{"method": "masala"}, {"method": "lime", "kernel_widths": [0.1, 0.5]}]
 * live_oracle may be NULL when only masala/global are requested. */
MASALA_API masala_status masala_evaluate(const masala_dataset* dataset,
                                         const masala_oracle* live_oracle,
                                         const char* methods_json, const char* config_json,
                                         masala_report** out);
MASALA_API void masala_report_free(masala_report* report);
MASALA_API masala_status masala_report_json(const masala_report* report, char** out);
MASALA_API masala_status masala_report_text(const masala_report* report, char** out);
MASALA_API masala_status masala_report_instances_csv(const masala_report* report, char** out);
MASALA_API size_t masala_report_num_rows(const masala_report* report);
MASALA_API size_t masala_report_num_failures(const masala_report* report);

/* Plots. feature is a name or zero-based index; target_row < 0 means none.
 * Either output pointer may be NULL. */
MASALA_API masala_status masala_plot(const masala_model* model, const masala_dataset* dataset,
                                     const char* feature, long long target_row, char** svg_out,
                                     char** document_json_out);
MASALA_API masala_status masala_plot_render(const char* document_json, char** svg_out);

#ifdef __cplusplus
}
#endif

#endif  // MASALA_MASALA_H_
