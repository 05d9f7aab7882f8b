/* C interface to the greenlearn library: dataset generation, training,
 * feature extraction and benchmarks behind opaque handles.
 *
 * Every function returning gl_status leaves a message for gl_last_error()
 * (thread-local) when it fails. Handles are owned by the caller and released
 * with the matching *_free function; freeing NULL is a no-op. */
#ifndef GREENLEARN_H
#define GREENLEARN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GL_API __declspec(dllexport)
#else
#define GL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gl_status {
  GL_OK = 0,
  GL_ERROR_USAGE = 1,   /* invalid arguments, unknown ids or keys */
  GL_ERROR_NUMERIC = 2, /* solver or training failure */
  GL_ERROR_IO = 3,      /* unreadable, malformed or unwritable files */
  GL_ERROR_INTERNAL = 4
} gl_status;

typedef struct gl_config gl_config;
typedef struct gl_dataset gl_dataset;
typedef struct gl_model gl_model;

GL_API const char* gl_version(void);
GL_API const char* gl_last_error(void);

/* Operator catalog. Index-based; the strings live as long as the library. */
GL_API size_t gl_catalog_size(void);
GL_API const char* gl_catalog_id(size_t index);
GL_API const char* gl_catalog_description(size_t index);

/* Configuration: defaults, INI files, and single-key overrides such as
 * ("train", "lbfgs_max_iters", "2000"). */
GL_API gl_status gl_config_new(gl_config** out);
GL_API gl_status gl_config_load(const char* path, gl_config** out);
GL_API gl_status gl_config_set(gl_config* config, const char* section, const char* key, const char* value);
/* Copies the operator id into buf (NUL-terminated); fails when it does not fit. */
GL_API gl_status gl_config_operator(const gl_config* config, char* buf, size_t size);
GL_API void gl_config_free(gl_config* config);

/* Datasets. gl_generate applies the configured noise and mask. */
GL_API gl_status gl_generate(const gl_config* config, gl_dataset** out);
GL_API gl_status gl_dataset_read(const char* dir, gl_dataset** out);
GL_API gl_status gl_dataset_import(const char* dir, gl_dataset** out);
GL_API gl_status gl_dataset_write(const gl_dataset* dataset, const char* dir);
GL_API gl_status gl_dataset_transform(const gl_dataset* dataset, const gl_config* config, gl_dataset** out);
GL_API gl_status gl_dataset_shape(const gl_dataset* dataset, size_t* samples, size_t* forcing_points,
                                  size_t* response_points, int* forcing_components, int* response_components);
GL_API void gl_dataset_free(gl_dataset* dataset);

/* Training. The callback runs after every logged iteration; returning 0
 * stops training and leaves a resumable model. */
typedef int (*gl_progress_fn)(void* user, int row, size_t iteration, const char* phase, double loss,
                              double gradient_norm, double wall_time);
GL_API gl_status gl_train(const gl_dataset* dataset, const gl_config* config, const gl_model* resume,
                          gl_progress_fn progress, void* user, gl_model** out);
GL_API gl_status gl_model_read(const char* dir, gl_model** out);
GL_API gl_status gl_model_write(const gl_model* model, const char* dir);
GL_API gl_status gl_model_final_loss(const gl_model* model, int row, double* loss);
/* Relative L2 error in percent against the closed-form kernel on an n x n grid. */
GL_API gl_status gl_model_kernel_error(const gl_model* model, size_t n, double* percent);
/* Mean relative prediction error (fraction) on a dataset with matching grids. */
GL_API gl_status gl_model_prediction_error(const gl_model* model, const gl_dataset* dataset, double* error);
GL_API void gl_model_free(gl_model* model);

/* Writes the feature report and exported grids into dir. When report is not
 * NULL it receives the report text, released with gl_string_free. */
GL_API gl_status gl_extract(const gl_model* model, const gl_config* config, const char* dir, char** report);

/* Runs the configured benchmark suite and writes the results table (CSV). */
typedef void (*gl_benchmark_fn)(void* user, const char* cell, uint64_t seed, double relative_error, double runtime);
GL_API gl_status gl_benchmark(const gl_config* config, const char* csv_path, gl_benchmark_fn progress, void* user);

/* Verifies the inventory of a dataset or checkpoint directory and returns a
 * readable summary of its manifest. */
GL_API gl_status gl_render_manifest(const char* dir, char** text);

GL_API void gl_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* GREENLEARN_H */
