/* C interface to the sdscreen structure-discrepancy toolkit. */

#ifndef SDSCREEN_H
#define SDSCREEN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum SdsStatus {
  SDS_STATUS_OK = 0,
  SDS_STATUS_NULL_POINTER = 1,
  SDS_STATUS_INVALID_ARGUMENT = 2,
  SDS_STATUS_DIMENSION_MISMATCH = 3,
  SDS_STATUS_IMAGE_TOO_SMALL = 4,
  SDS_STATUS_VALUE_OUT_OF_RANGE = 5,
  SDS_STATUS_DECODE_FAILED = 6,
  SDS_STATUS_IO_FAILED = 7,
  SDS_STATUS_INVALID_UTF8 = 8,
  SDS_STATUS_EMPTY_INPUT = 9,
  SDS_STATUS_BUFFER_TOO_SMALL = 10,
  SDS_STATUS_PANIC = 11,
} SdsStatus;

/**
 * Aggregation selector for [`sds_map_aggregate`].
 */
typedef enum SdsAggregation {
  SDS_AGGREGATION_MAX = 0,
  SDS_AGGREGATION_MEAN = 1,
  SDS_AGGREGATION_P99 = 2,
} SdsAggregation;

/**
 * Opaque measure configuration handle.
 */
typedef struct SdsConfig SdsConfig;

/**
 * Opaque grayscale image handle (intensities in [0, 1]).
 */
typedef struct SdsImage SdsImage;

/**
 * Opaque per-pixel discrepancy map handle.
 */
typedef struct SdsMap SdsMap;

/**
 * Flat result record for one scored pair.
 */
typedef struct SdsPairScore {
  double sd_max;
  double sd_mean;
  double sd_p99;
  double l1;
  double l2;
  double ssim;
  size_t width;
  size_t height;
} SdsPairScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sds_version(void);

/**
 * Static description of a status code.
 */
const char *sds_status_message(enum SdsStatus status);

/**
 * New configuration with the stock defaults (M=0.2, P=0.1, K=32,
 * unclamped, scale 100, natural log, max aggregation).
 */
struct SdsConfig *sds_config_new(void);

/**
 * Releases a configuration handle; NULL is a no-op.
 *
 * # Safety
 * `cfg` must be NULL or a pointer returned by [`sds_config_new`] that has
 * not been freed yet.
 */
void sds_config_free(struct SdsConfig *cfg);

/**
 * Writes the 16-character config digest (plus NUL) into `buf`.
 *
 * # Safety
 * `cfg` must be live; `buf` must point to at least `len` writable bytes.
 */
enum SdsStatus sds_config_digest(const struct SdsConfig *cfg, char *buf, size_t len);

/**
 * Builds an image from a row-major `f64` buffer of intensities in [0, 1].
 *
 * # Safety
 * `data` must point to `width * height` readable doubles; `out` must be a
 * valid destination for one pointer.
 */
enum SdsStatus sds_image_from_gray(const double *data,
                                   size_t width,
                                   size_t height,
                                   struct SdsImage **out);

/**
 * Builds a grayscale image from interleaved 8-bit RGB using the same
 * luminance weights as the pipeline.
 *
 * # Safety
 * `data` must point to `width * height * 3` readable bytes; `out` must be a
 * valid destination for one pointer.
 */
enum SdsStatus sds_image_from_rgb8(const uint8_t *data,
                                   size_t width,
                                   size_t height,
                                   struct SdsImage **out);

/**
 * Decodes a PNG or TIFF tile from disk (8/16-bit gray or RGB) and converts
 * it to grayscale.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid destination
 * for one pointer.
 */
enum SdsStatus sds_image_load(const char *path, struct SdsImage **out);

/**
 * # Safety
 * `img` must be NULL or a live image handle.
 */
size_t sds_image_width(const struct SdsImage *img);

/**
 * # Safety
 * `img` must be NULL or a live image handle.
 */
size_t sds_image_height(const struct SdsImage *img);

/**
 * Releases an image handle; NULL is a no-op.
 *
 * # Safety
 * `img` must be NULL or a live image handle not freed before.
 */
void sds_image_free(struct SdsImage *img);

/**
 * Scores one pair: the three discrepancy aggregations plus the L1/L2/SSIM
 * baselines. A NULL `cfg` means the stock defaults.
 *
 * # Safety
 * `original` and `processed` must be live image handles; `cfg` NULL or a
 * live config handle; `out` a valid destination for one record.
 */
enum SdsStatus sds_score_pair(const struct SdsImage *original,
                              const struct SdsImage *processed,
                              const struct SdsConfig *cfg,
                              struct SdsPairScore *out);

/**
 * Computes the per-pixel discrepancy map. A NULL `cfg` means defaults.
 *
 * # Safety
 * `original` and `processed` must be live image handles; `cfg` NULL or a
 * live config handle; `out` a valid destination for one pointer.
 */
enum SdsStatus sds_map_compute(const struct SdsImage *original,
                               const struct SdsImage *processed,
                               const struct SdsConfig *cfg,
                               struct SdsMap **out);

/**
 * # Safety
 * `map` must be NULL or a live map handle.
 */
size_t sds_map_width(const struct SdsMap *map);

/**
 * # Safety
 * `map` must be NULL or a live map handle.
 */
size_t sds_map_height(const struct SdsMap *map);

/**
 * Row-major borrow of the map values (`width * height` doubles); valid
 * until the map is freed. NULL for a NULL map.
 *
 * # Safety
 * `map` must be NULL or a live map handle.
 */
const double *sds_map_data(const struct SdsMap *map);

/**
 * Collapses the map to one scalar.
 *
 * # Safety
 * `map` must be a live map handle; `out` a valid destination for a double.
 */
enum SdsStatus sds_map_aggregate(const struct SdsMap *map, enum SdsAggregation mode, double *out);

/**
 * Releases a map handle; NULL is a no-op.
 *
 * # Safety
 * `map` must be NULL or a live map handle not freed before.
 */
void sds_map_free(struct SdsMap *map);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDSCREEN_H */
