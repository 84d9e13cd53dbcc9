#ifndef OSLX_H
#define OSLX_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define OSLX_MODE_RESTRICTED 0

#define OSLX_MODE_ZERO_EXTENSION 1

#define OSLX_MODE_DYADIC 2

#define OSLX_FAMILY_ALL 0

#define OSLX_FAMILY_DYADIC 1

typedef enum OslxStatus {
  OSLX_STATUS_OK = 0,
  OSLX_STATUS_NULL_POINTER = 1,
  OSLX_STATUS_INVALID_ARGUMENT = 2,
  OSLX_STATUS_INVALID_GRID = 3,
  OSLX_STATUS_PARSE = 4,
  OSLX_STATUS_NON_POSITIVE_WEIGHT = 5,
  OSLX_STATUS_DEGENERATE_INPUT = 6,
  OSLX_STATUS_DOMAIN = 7,
  OSLX_STATUS_IO = 8,
  OSLX_STATUS_PANIC = 9,
} OslxStatus;

/**
 * A grid function. Owned by the caller once returned; release with
 * [`oslx_grid_free`].
 */
typedef struct OslxGrid OslxGrid;

/**
 * A positive grid function. Release with [`oslx_weight_free`].
 */
typedef struct OslxWeight OslxWeight;

typedef struct OslxWeightConstants {
  double a1;
  double a_infty;
} OslxWeightConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *oslx_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *oslx_last_error_message(void);

/**
 * Copies `len` values (row-major, `len == n^dim`) into a new grid.
 *
 * # Safety
 * `values` must point to `len` readable doubles and `out` to a writable
 * handle slot.
 */
enum OslxStatus oslx_grid_new(size_t dim,
                              size_t n,
                              const double *values,
                              size_t len,
                              struct OslxGrid **out);

/**
 * Reads a CSV or binary grid file; binary files are recognized by their magic.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum OslxStatus oslx_grid_read(const char *path, struct OslxGrid **out);

/**
 * # Safety
 * `grid` must be NULL or a handle from this library not yet freed.
 */
void oslx_grid_free(struct OslxGrid *grid);

/**
 * Dimension of the grid, 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live handle.
 */
size_t oslx_grid_dim(const struct OslxGrid *grid);

/**
 * Cells per axis, 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live handle.
 */
size_t oslx_grid_resolution(const struct OslxGrid *grid);

/**
 * Number of cells, 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live handle.
 */
size_t oslx_grid_len(const struct OslxGrid *grid);

/**
 * Copies the values into `out`, which must hold exactly `len` doubles.
 *
 * # Safety
 * `grid` must be a live handle and `out` must point to `len` writable doubles.
 */
enum OslxStatus oslx_grid_values(const struct OslxGrid *grid, double *out, size_t len);

/**
 * Validates `grid` as a weight. With `floor > 0` entries below it are raised
 * to it; otherwise nonpositive entries are an error.
 *
 * # Safety
 * `grid` must be a live handle and `out` a writable handle slot.
 */
enum OslxStatus oslx_weight_new(const struct OslxGrid *grid, double floor, struct OslxWeight **out);

/**
 * # Safety
 * `weight` must be NULL or a handle from this library not yet freed.
 */
void oslx_weight_free(struct OslxWeight *weight);

/**
 * Hardy-Littlewood maximal function of `grid` as a new grid.
 *
 * # Safety
 * `grid` must be a live handle and `out` a writable handle slot.
 */
enum OslxStatus oslx_maximal(const struct OslxGrid *grid, uint32_t mode_id, struct OslxGrid **out);

/**
 * Sharp maximal function of `grid` as a new grid.
 *
 * # Safety
 * `grid` must be a live handle and `out` a writable handle slot.
 */
enum OslxStatus oslx_sharp_maximal(const struct OslxGrid *grid,
                                   uint32_t mode_id,
                                   struct OslxGrid **out);

/**
 * BMO seminorm over the cubes of `family_id`.
 *
 * # Safety
 * `grid` must be a live handle and `out` a writable double.
 */
enum OslxStatus oslx_bmo(const struct OslxGrid *grid, uint32_t family_id, double *out);

/**
 * BLO seminorm over the cubes of `family_id`.
 *
 * # Safety
 * `grid` must be a live handle and `out` a writable double.
 */
enum OslxStatus oslx_blo(const struct OslxGrid *grid, uint32_t family_id, double *out);

/**
 * A1 and Fujii-Wilson constants of `weight`.
 *
 * # Safety
 * `weight` must be a live handle and `out` writable.
 */
enum OslxStatus oslx_weight_constants(const struct OslxWeight *weight,
                                      uint32_t mode_id,
                                      uint32_t family_id,
                                      struct OslxWeightConstants *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OSLX_H */
