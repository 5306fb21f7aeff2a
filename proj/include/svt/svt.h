/* C interface to the survey transfer library.
 *
 * Objects are opaque handles released with their *_free function. Every
 * fallible call returns an svt_status; on failure svt_last_error() describes
 * the problem (per thread, valid until the next call on that thread).
 * Strings returned through char** are heap copies released with svt_string_free.
 */
#ifndef SVT_SVT_H
#define SVT_SVT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SVT_API
#elif defined(__GNUC__)
#define SVT_API __attribute__((visibility("default")))
#else
#define SVT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum svt_status {
    SVT_OK = 0,
    /* input and validation errors */
    SVT_E_INVALID_ARGUMENT = 10,
    SVT_E_IO = 11,
    SVT_E_SCHEMA = 12,
    SVT_E_PARSE = 13,
    SVT_E_RANGE = 14,
    SVT_E_UNMAPPED_LEVEL = 15,
    SVT_E_DEGENERATE_COLUMN = 16,
    SVT_E_SCHEMA_CONFLICT = 17,
    SVT_E_EMPTY_DATASET = 18,
    SVT_E_INFEASIBLE = 19,
    SVT_E_UNSUPPORTED_TASK = 20,
    /* runtime and numeric errors */
    SVT_E_INSUFFICIENT_DATA = 30,
    SVT_E_SINGULAR = 31,
    SVT_E_NUMERIC = 32,
    SVT_E_NO_TRAINABLE_PARAMETERS = 33,
    SVT_E_INTEGRITY = 34,
    SVT_E_UNSUPPORTED_VERSION = 35,
    SVT_E_INTERNAL = 99
} svt_status;

SVT_API const char* svt_version(void);
SVT_API const char* svt_last_error(void);
SVT_API const char* svt_status_name(svt_status status);
/* 1 for input/validation errors, 0 otherwise. */
SVT_API int svt_status_is_validation(svt_status status);
SVT_API void svt_string_free(char* s);

typedef struct svt_schema svt_schema;
typedef struct svt_dataset svt_dataset;
typedef struct svt_spec svt_spec;
typedef struct svt_ols svt_ols;
typedef struct svt_config svt_config;
typedef struct svt_model svt_model;
typedef struct svt_history svt_history;
typedef struct svt_result svt_result;

/* ---- schema ---- */
SVT_API svt_status svt_schema_canonical(svt_schema** out);
SVT_API svt_status svt_schema_load(const char* path, svt_schema** out);
SVT_API svt_status svt_schema_to_json(const svt_schema* schema, char** out);
SVT_API void svt_schema_free(svt_schema* schema);

/* ---- datasets ----
 * load_csv reads the file, recodes text levels, min-max normalizes raw-scale
 * columns and deletes rows with any missing value. When `reference` is given,
 * its normalization bounds are reused so both datasets share one scale. The
 * label is the file name without directories or extension. */
SVT_API svt_status svt_dataset_load_csv(const char* path, const svt_schema* schema, const svt_dataset* reference,
                                        svt_dataset** out);
SVT_API svt_status svt_dataset_write_csv(const svt_dataset* ds, const char* path);
SVT_API size_t svt_dataset_rows(const svt_dataset* ds);
/* Rows removed by case-wise deletion while loading. */
SVT_API size_t svt_dataset_deleted_rows(const svt_dataset* ds);
SVT_API svt_status svt_dataset_describe(const svt_dataset* ds, char** text, char** json);
SVT_API void svt_dataset_free(svt_dataset* ds);

/* ---- generative specs ---- */
SVT_API svt_status svt_spec_load(const char* path, svt_spec** out);
/* "ces2020" or "anes2020" */
SVT_API svt_status svt_spec_preset(const char* name, svt_spec** out);
/* From a descriptive-statistics JSON record (count, mean, std and quartiles per column). */
SVT_API svt_status svt_spec_calibrate(const char* stats_json_path, double temperature, uint64_t seed, svt_spec** out);
SVT_API svt_status svt_spec_set_seed(svt_spec* spec, uint64_t seed);
SVT_API svt_status svt_spec_to_json(const svt_spec* spec, char** out);
SVT_API svt_status svt_spec_generate(const svt_spec* spec, size_t n, svt_dataset** out);
SVT_API svt_status svt_spec_oracle(const svt_spec* spec, const char* outcome, size_t mc_samples, char** json);
SVT_API void svt_spec_free(svt_spec* spec);

/* ---- OLS ---- */
SVT_API svt_status svt_ols_fit(const svt_dataset* ds, const char* outcome, svt_ols** out);
SVT_API svt_status svt_ols_load(const char* path, svt_ols** out);
SVT_API svt_status svt_ols_to_json(const svt_ols* fit, char** out);
SVT_API svt_status svt_ols_summary(const svt_ols* fit, char** out);
/* Applies a fitted model to `target` and refits its predictions. */
SVT_API svt_status svt_ols_transfer(const svt_ols* fit, const svt_dataset* target, const char* outcome, char** text,
                            char** json);
SVT_API void svt_ols_free(svt_ols* fit);

/* ---- transfer configuration ---- */
SVT_API svt_status svt_config_default(svt_config** out);
SVT_API svt_status svt_config_load(const char* path, svt_config** out);
SVT_API svt_status svt_config_set_seed(svt_config* config, uint64_t seed);
SVT_API svt_status svt_config_to_json(const svt_config* config, char** out);
/* Splits with the config's seed; either output may be NULL. */
SVT_API svt_status svt_config_split(const svt_config* config, const svt_dataset* target, svt_dataset** train,
                            svt_dataset** test);
SVT_API void svt_config_free(svt_config* config);

/* ---- models ---- */
SVT_API svt_status svt_model_pretrain(const svt_config* config, const svt_dataset* source, svt_model** model,
                              svt_history** history);
SVT_API svt_status svt_model_finetune(const svt_config* config, const svt_model* pretrained, const svt_dataset* target_train,
                              svt_model** model, svt_history** history);
SVT_API svt_status svt_model_evaluate(const svt_config* config, const svt_model* model, const svt_dataset* test, char** text,
                              char** json);
SVT_API svt_status svt_model_impute(const svt_model* model, const svt_dataset* target, const char* outcome,
                            svt_dataset** out);
SVT_API svt_status svt_model_save(const svt_model* model, const char* path);
SVT_API svt_status svt_model_load(const char* path, svt_model** out);
SVT_API svt_status svt_model_hash(const svt_model* model, char** out);
SVT_API void svt_model_free(svt_model* model);

SVT_API svt_status svt_history_to_json(const svt_history* history, char** out);
SVT_API svt_status svt_history_load(const char* path, svt_history** out);
SVT_API void svt_history_free(svt_history* history);

/* ---- experiments ---- */
SVT_API svt_status svt_experiment_run(const svt_config* config, const svt_dataset* source, const svt_dataset* target,
                              svt_result** out);
/* Same result assembled from separately trained stages. */
SVT_API svt_status svt_experiment_collate(const svt_config* config, const svt_dataset* source, const svt_dataset* target,
                                  const svt_model* pretrained, const svt_history* pretrain_history,
                                  const svt_model* finetuned, const svt_history* finetune_history,
                                  svt_result** out);
/* Deterministic payload only. */
SVT_API svt_status svt_result_payload_json(const svt_result* result, char** out);
/* Payload, its SHA-256 and timestamps. */
SVT_API svt_status svt_result_report_json(const svt_result* result, char** out);
SVT_API svt_status svt_result_text(const svt_result* result, char** out);
SVT_API void svt_result_free(svt_result* result);

/* ---- utilities ---- */
SVT_API svt_status svt_file_sha256(const char* path, char** out);

#ifdef __cplusplus
}
#endif

#endif
