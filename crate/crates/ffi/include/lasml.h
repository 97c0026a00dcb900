#ifndef LASML_H
#define LASML_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call. Zero means success.
 */
typedef enum LasmlStatus {
  LASML_STATUS_OK = 0,
  LASML_STATUS_NULL_POINTER = 1,
  LASML_STATUS_INVALID_STRING = 2,
  LASML_STATUS_PARSE_ERROR = 3,
  LASML_STATUS_DOMAIN_ERROR = 4,
  LASML_STATUS_CONFIG_ERROR = 5,
  LASML_STATUS_STATE_ERROR = 6,
  LASML_STATUS_IO_ERROR = 7,
  LASML_STATUS_FORMAT_ERROR = 8,
  LASML_STATUS_SIZE_ERROR = 9,
  LASML_STATUS_COMPUTE_ERROR = 10,
  LASML_STATUS_BUFFER_TOO_SMALL = 11,
  LASML_STATUS_PANIC = 12,
} LasmlStatus;

/**
 * Opaque dataset handle.
 */
typedef struct LasmlDataset LasmlDataset;

/**
 * Opaque trained-model handle.
 */
typedef struct LasmlModel LasmlModel;

/**
 * Process parameters of one candidate.
 */
typedef struct LasmlParams {
  double frequency_hz;
  double amplitude_mm;
  uint32_t passes;
  double laser_distance_mm;
} LasmlParams;

/**
 * Predicted channel geometry in µm. Standard deviations are zero for
 * single-network and non-network models.
 */
typedef struct LasmlGeometry {
  double depth_um;
  double top_width_um;
  double bottom_width_um;
  double depth_std_um;
  double top_width_std_um;
  double bottom_width_std_um;
} LasmlGeometry;

/**
 * Target geometry with a symmetric tolerance per output, all in µm.
 */
typedef struct LasmlTarget {
  double depth_um;
  double top_width_um;
  double bottom_width_um;
  double tolerance_um[3];
} LasmlTarget;

/**
 * One ranked design candidate.
 */
typedef struct LasmlDesignRow {
  size_t candidate_index;
  double score;
  struct LasmlParams params;
  struct LasmlGeometry predicted;
} LasmlDesignRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *lasml_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call on the same thread.
 */
const char *lasml_last_error_message(void);

/**
 * The bundled synthetic dataset.
 *
 * # Safety
 * `out` must be a valid pointer to write a handle into.
 */
enum LasmlStatus lasml_dataset_bundled(struct LasmlDataset **out);

/**
 * Parses a dataset from CSV text.
 *
 * # Safety
 * `csv` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LasmlStatus lasml_dataset_parse_csv(const char *csv, struct LasmlDataset **out);

/**
 * Reads a dataset CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LasmlStatus lasml_dataset_load(const char *path, struct LasmlDataset **out);

/**
 * Number of rows in a dataset.
 *
 * # Safety
 * `dataset` must be a live handle and `out_len` a valid pointer.
 */
enum LasmlStatus lasml_dataset_len(const struct LasmlDataset *dataset, size_t *out_len);

/**
 * Releases a dataset handle. NULL is ignored.
 *
 * # Safety
 * `dataset` must come from this library and not be used afterwards.
 */
void lasml_dataset_free(struct LasmlDataset *dataset);

/**
 * Fits a model on all three outputs. `family` is one of linear, poly2,
 * poly3, poly4, gbt or mlp.
 *
 * # Safety
 * `dataset` must be a live handle, `family` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum LasmlStatus lasml_model_train(const struct LasmlDataset *dataset,
                                   const char *family,
                                   uint64_t seed,
                                   struct LasmlModel **out);

/**
 * Loads a model file written by the CLI, the service or `lasml_model_save`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LasmlStatus lasml_model_load(const char *path, struct LasmlModel **out);

/**
 * Writes a model file.
 *
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum LasmlStatus lasml_model_save(const struct LasmlModel *model, const char *path);

/**
 * Releases a model handle. NULL is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void lasml_model_free(struct LasmlModel *model);

/**
 * Predicts geometry for `n` parameter rows into `out[0..n]`.
 *
 * # Safety
 * `model` must be a live handle; `params` and `out` must each point to `n`
 * elements.
 */
enum LasmlStatus lasml_model_predict(const struct LasmlModel *model,
                                     const struct LasmlParams *params,
                                     size_t n,
                                     struct LasmlGeometry *out);

/**
 * Ranks grid candidates for a target. `grid_counts` holds four per-parameter
 * counts; `top_k` of zero uses the default. Up to `capacity` rows go to
 * `out` and the number written to `out_len`.
 *
 * # Safety
 * `model` must be a live handle, `target` valid, `grid_counts` four
 * elements, `out` `capacity` elements and `out_len` a valid pointer.
 */
enum LasmlStatus lasml_design_grid(const struct LasmlModel *model,
                                   const struct LasmlTarget *target,
                                   const size_t *grid_counts,
                                   size_t top_k,
                                   struct LasmlDesignRow *out,
                                   size_t capacity,
                                   size_t *out_len);

/**
 * Mean squared error of `n` predictions.
 *
 * # Safety
 * `y` and `y_hat` must point to `n` elements and `out` must be valid.
 */
enum LasmlStatus lasml_mse(const double *y, const double *y_hat, size_t n, double *out);

/**
 * Coefficient of determination of `n` predictions.
 *
 * # Safety
 * `y` and `y_hat` must point to `n` elements and `out` must be valid.
 */
enum LasmlStatus lasml_r2(const double *y, const double *y_hat, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LASML_H */
