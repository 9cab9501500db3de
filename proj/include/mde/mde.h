/*
 * Copyright 2026 The mdeval Authors.
 *
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

/*
 * C interface to libmde.
 *
 * Objects are opaque handles released with their matching *_free function.
 * Every fallible call returns an mde_status; on failure a one-line message is
 * available from mde_last_error() until the next failing call on the same
 * thread. Strings returned through char** are heap copies to be released with
 * mde_string_free. Strings returned as const char* are owned by the handle
 * they came from.
 */

#ifndef MDE_MDE_H_
#define MDE_MDE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MDE_API __declspec(dllexport)
#else
#define MDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mde_status {
  MDE_OK = 0,
  MDE_ERR_INVALID_ARGUMENT = 1,
  MDE_ERR_IO = 2,
  MDE_ERR_MALFORMED_HEADER = 3,
  MDE_ERR_NON_FINITE = 4,
  MDE_ERR_LABEL_OUT_OF_RANGE = 5,
  MDE_ERR_TRUNCATED = 6,
  MDE_ERR_MISSING_LABELS = 7,
  MDE_ERR_MISSING_INPUT = 8,
  MDE_ERR_SHAPE_MISMATCH = 9,
  MDE_ERR_DEGENERATE = 10,
  MDE_ERR_NUMERIC = 11,
  MDE_ERR_CONFIG = 12,
  MDE_ERR_INTERNAL = 100
} mde_status;

typedef enum mde_experiment_kind {
  MDE_EXPERIMENT_AUTOEVAL = 0,
  MDE_EXPERIMENT_STRESS_NOISE = 1,
  MDE_EXPERIMENT_STRESS_IMBALANCE = 2
} mde_experiment_kind;

typedef struct mde_store mde_store;
typedef struct mde_result mde_result;
typedef struct mde_report mde_report;

typedef struct mde_model {
  double w;
  double b;
  size_t n;
  double r2;
} mde_model;

MDE_API const char* mde_version(void);
MDE_API const char* mde_last_error(void);
MDE_API const char* mde_status_name(mde_status status);
MDE_API void mde_string_free(char* s);

/* Logit stores. `labels` may be NULL. */
MDE_API mde_status mde_store_create(size_t n_samples, size_t n_classes,
                                    const double* logits,
                                    const uint32_t* labels,
                                    const char* dataset_id, mde_store** out);
/* ".csv" paths use the CSV format, anything else the binary format. */
MDE_API mde_status mde_store_load(const char* path, mde_store** out);
MDE_API mde_status mde_store_save(const mde_store* store, const char* path);
MDE_API void mde_store_free(mde_store* store);
MDE_API size_t mde_store_n_samples(const mde_store* store);
MDE_API size_t mde_store_n_classes(const mde_store* store);
MDE_API int mde_store_has_labels(const mde_store* store);
MDE_API const char* mde_store_dataset_id(const mde_store* store);
MDE_API const double* mde_store_logits(const mde_store* store);
MDE_API mde_status mde_store_accuracy(const mde_store* store, double* out);

/* Measures, by name: mde, avg_energy, conf, entropy, atc, nuclear, frechet,
 * cot, agree, projnorm. `aux` is the labeled source for atc and cot, the
 * source for frechet and the partner model's logits for agree; NULL
 * otherwise. `approximate` may be NULL. */
MDE_API size_t mde_measure_count(void);
MDE_API const char* mde_measure_name(size_t index);
MDE_API int mde_measure_needs_aux(const char* name);
MDE_API mde_status mde_compute_measure(const char* name,
                                       const mde_store* target,
                                       const mde_store* aux,
                                       double temperature, double* value,
                                       int* approximate);
MDE_API mde_status mde_energy(const mde_store* store, double temperature,
                              double* out_energies);

/* Regression and correlation. Accuracies are fractions; mde_mae returns
 * percentage points. */
MDE_API mde_status mde_fit_linear(const double* x, const double* y, size_t n,
                                  mde_model* out);
MDE_API double mde_predict_raw(const mde_model* model, double measure);
MDE_API double mde_predict_accuracy(const mde_model* model, double measure);
MDE_API mde_status mde_model_to_json(const mde_model* model, char** out);
MDE_API mde_status mde_model_from_json(const char* json, mde_model* out);
MDE_API mde_status mde_pearson(const double* x, const double* y, size_t n,
                               double* out);
MDE_API mde_status mde_spearman(const double* x, const double* y, size_t n,
                                double* out);
MDE_API mde_status mde_r_squared(const double* pred, const double* truth,
                                 size_t n, double* out);
MDE_API mde_status mde_mae(const double* pred, const double* truth, size_t n,
                           double* out);

/* Synthetic experiments. `seed` and `temperature` override the config when
 * non-NULL. */
MDE_API mde_status mde_config_canonical(char** out_json);
MDE_API mde_status mde_config_normalize(const char* config_json,
                                        char** out_json);
MDE_API mde_status mde_experiment_run(const char* config_json,
                                      mde_experiment_kind kind,
                                      const uint64_t* seed,
                                      const double* temperature,
                                      mde_result** out);
MDE_API void mde_result_free(mde_result* result);
MDE_API const char* mde_result_json(const mde_result* result);
MDE_API const char* mde_result_csv(const mde_result* result);
MDE_API const char* mde_result_manifest(const mde_result* result);
/* Logits of every dataset in the result, in manifest order. */
MDE_API size_t mde_result_store_count(const mde_result* result);
MDE_API const mde_store* mde_result_store(const mde_result* result,
                                          size_t index);

/* One SVG scatter plot per measure of a serialized result. */
MDE_API mde_status mde_report_render(const char* result_json,
                                     mde_report** out);
MDE_API void mde_report_free(mde_report* report);
MDE_API size_t mde_report_count(const mde_report* report);
MDE_API const char* mde_report_measure(const mde_report* report, size_t index);
MDE_API const char* mde_report_svg(const mde_report* report, size_t index);

#ifdef __cplusplus
}
#endif

#endif /* MDE_MDE_H_ */
