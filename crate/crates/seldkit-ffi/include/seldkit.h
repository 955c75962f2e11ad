#ifndef SELDKIT_H
#define SELDKIT_H

/* Generated by cbindgen from seldkit-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum SeldStatus {
  /**
   * The call succeeded.
   */
  SELD_STATUS_OK = 0,
  /**
   * A pointer was null, a buffer too small, or a value out of range.
   */
  SELD_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input data could not be read, parsed, or validated.
   */
  SELD_STATUS_DATA_ERROR = 2,
  /**
   * An internal panic was caught at the boundary.
   */
  SELD_STATUS_PANIC = 3,
} SeldStatus;

/**
 * Opaque handle to a 4-channel first-order Ambisonics buffer.
 */
typedef struct SeldFoa SeldFoa;

/**
 * SELD metric set as plain numbers.
 *
 * `localization_error_deg` is negative when no prediction was matched to a
 * reference (the mean would be undefined); all other fields are always
 * populated.
 */
typedef struct SeldScores {
  double error_rate;
  double f_score;
  double localization_error_deg;
  double localization_recall;
  double seld_score;
} SeldScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static, nul-terminated string.
 */
const char *seld_version(void);

/**
 * Message describing the most recent failure on this thread, or null when
 * the last call succeeded. The pointer stays valid until the next seldkit
 * call on the same thread.
 */
const char *seld_last_error(void);

/**
 * Encodes a mono signal into an FOA buffer at the given direction.
 *
 * On success `*out` receives a new handle owned by the caller.
 *
 * # Safety
 * `mono` must point to `len` readable doubles and `out` must be a valid
 * destination for one pointer.
 */
enum SeldStatus seld_foa_encode(const double *mono,
                                size_t len,
                                uint32_t sample_rate_hz,
                                double azimuth_deg,
                                double elevation_deg,
                                struct SeldFoa **out);

/**
 * Reads a 4-channel WAV file as an FOA buffer.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid destination for
 * one pointer.
 */
enum SeldStatus seld_foa_read_wav(const char *path, struct SeldFoa **out);

/**
 * Writes an FOA buffer to a 4-channel float WAV file.
 *
 * # Safety
 * `foa` must be a live handle and `path` a nul-terminated string.
 */
enum SeldStatus seld_foa_write_wav(const struct SeldFoa *foa, const char *path);

/**
 * Number of samples per channel, or 0 for a null handle.
 */
size_t seld_foa_len(const struct SeldFoa *foa);

/**
 * Sample rate in Hz, or 0 for a null handle.
 */
uint32_t seld_foa_sample_rate(const struct SeldFoa *foa);

/**
 * Copies one ACN-ordered channel (0 = W, 1 = Y, 2 = Z, 3 = X) into `out`.
 *
 * `capacity` must be at least `seld_foa_len(foa)`.
 *
 * # Safety
 * `out` must point to `capacity` writable doubles.
 */
enum SeldStatus seld_foa_channel(const struct SeldFoa *foa,
                                 uint32_t acn,
                                 double *out,
                                 size_t capacity);

/**
 * Rotates the scene in place by a quarter-turn multiple (90, 180, or 270
 * degrees counterclockwise) using the exact channel-swap rotation.
 *
 * # Safety
 * `foa` must be a live handle.
 */
enum SeldStatus seld_foa_rotate(struct SeldFoa *foa, int degrees);

/**
 * Releases a handle returned by one of the constructors. Null is a no-op.
 *
 * # Safety
 * `foa` must be null or a handle not yet freed.
 */
void seld_foa_free(struct SeldFoa *foa);

/**
 * Renders the exact W±Y stereo downmix into caller buffers of at least
 * `seld_foa_len(foa)` samples each.
 *
 * # Safety
 * `left` and `right` must each point to `capacity` writable doubles.
 */
enum SeldStatus seld_render_stereo(const struct SeldFoa *foa,
                                   double *left,
                                   double *right,
                                   size_t capacity);

/**
 * Renders the parametric spherical-head binaural downmix (default renderer
 * settings) into caller buffers of at least `seld_foa_len(foa)` samples.
 *
 * # Safety
 * `left` and `right` must each point to `capacity` writable doubles.
 */
enum SeldStatus seld_render_binaural(const struct SeldFoa *foa,
                                     double *left,
                                     double *right,
                                     size_t capacity);

/**
 * Evaluates a prediction CSV against a reference CSV (DCASE metadata
 * format) and fills `out` with the SELD metric set.
 *
 * # Safety
 * Both paths must be nul-terminated strings and `out` must point to one
 * writable `SeldScores`.
 */
enum SeldStatus seld_evaluate_files(const char *predictions_csv,
                                    const char *references_csv,
                                    double tolerance_deg,
                                    struct SeldScores *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SELDKIT_H */
