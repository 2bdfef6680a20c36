#ifndef PHONOSTAT_H
#define PHONOSTAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  /**
   * Full covariance unless there are fewer than twice as many samples as dimensions.
   */
  PHONOSTAT_COVARIANCE_POLICY_AUTO = 0,
  PHONOSTAT_COVARIANCE_POLICY_FULL = 1,
  PHONOSTAT_COVARIANCE_POLICY_DIAGONAL = 2,
} PhonostatCovariancePolicy;

typedef enum {
  PHONOSTAT_STATUS_OK = 0,
  PHONOSTAT_STATUS_NULL_POINTER = 1,
  PHONOSTAT_STATUS_INVALID_ARGUMENT = 2,
  PHONOSTAT_STATUS_PARSE = 3,
  PHONOSTAT_STATUS_NUMERIC = 4,
  PHONOSTAT_STATUS_BUFFER_TOO_SMALL = 5,
  PHONOSTAT_STATUS_PANIC = 6,
} PhonostatStatus;

/**
 * Opaque frame matrix decoded from a PFE1 buffer.
 */
typedef struct PhonostatFrames PhonostatFrames;

/**
 * Opaque fitted Gaussian.
 */
typedef struct PhonostatGaussian PhonostatGaussian;

/**
 * Opaque parsed TextGrid.
 */
typedef struct PhonostatTextGrid PhonostatTextGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *phonostat_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *phonostat_version(void);

/**
 * Fits a Gaussian to `n_samples` row-major rows of length `dim`.
 *
 * # Safety
 * `samples` must point to `n_samples * dim` doubles and `out` must be writable.
 */
PhonostatStatus phonostat_gaussian_fit(const double *samples,
                                       size_t n_samples,
                                       size_t dim,
                                       PhonostatCovariancePolicy policy,
                                       double shrinkage,
                                       double ridge,
                                       PhonostatGaussian **out);

/**
 * Builds a Gaussian from a mean of length `dim` and a row-major `dim x dim`
 * covariance.
 *
 * # Safety
 * `mean` must hold `dim` doubles, `covariance` `dim * dim`, and `out` must be writable.
 */
PhonostatStatus phonostat_gaussian_from_parts(const double *mean,
                                              const double *covariance,
                                              size_t dim,
                                              size_t n_samples,
                                              PhonostatGaussian **out);

/**
 * Dimension of `g`, or 0 when `g` is null.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t phonostat_gaussian_dim(const PhonostatGaussian *g);

/**
 * 1 when `g` was fitted with a diagonal covariance, 0 otherwise.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
int32_t phonostat_gaussian_is_diagonal(const PhonostatGaussian *g);

/**
 * # Safety
 * `g` must be null or a handle not yet freed.
 */
void phonostat_gaussian_free(PhonostatGaussian *g);

/**
 * KL(p || q).
 *
 * # Safety
 * `p` and `q` must be live handles and `out` writable.
 */
PhonostatStatus phonostat_kld(const PhonostatGaussian *p, const PhonostatGaussian *q, double *out);

/**
 * Both directed divergences and their mean. Any of the outputs may be null.
 *
 * # Safety
 * `real` and `synthetic` must be live handles; non-null outputs must be writable.
 */
PhonostatStatus phonostat_symmetric_kld(const PhonostatGaussian *real,
                                        const PhonostatGaussian *synthetic,
                                        double *out_d_rs,
                                        double *out_d_sr,
                                        double *out_d_sym);

/**
 * Pearson r and its two-tailed p-value.
 *
 * # Safety
 * `xs` and `ys` must hold `n` doubles each; outputs must be writable.
 */
PhonostatStatus phonostat_pearson(const double *xs,
                                  const double *ys,
                                  size_t n,
                                  double *out_r,
                                  double *out_p);

/**
 * Decodes a PFE1 buffer.
 *
 * # Safety
 * `bytes` must hold `len` bytes and `out` must be writable.
 */
PhonostatStatus phonostat_pfe1_decode(const uint8_t *bytes, size_t len, PhonostatFrames **out);

/**
 * Encodes `n_frames x dim` row-major frames as PFE1. With `buf` null or too
 * small, only `*written` is set to the required size and
 * `BufferTooSmall` is returned (`Ok` when `buf` is null).
 *
 * # Safety
 * `data` must hold `n_frames * dim` doubles; `buf`, when non-null, must hold
 * `buf_len` bytes; `written` must be writable.
 */
PhonostatStatus phonostat_pfe1_encode(const double *data,
                                      size_t n_frames,
                                      size_t dim,
                                      double hop_s,
                                      double win_s,
                                      double start_offset_s,
                                      uint8_t *buf,
                                      size_t buf_len,
                                      size_t *written);

/**
 * Writes the shape and timing of `frames`. Any output may be null.
 *
 * # Safety
 * `frames` must be a live handle; non-null outputs must be writable.
 */
PhonostatStatus phonostat_frames_shape(const PhonostatFrames *frames,
                                       size_t *n_frames,
                                       size_t *dim,
                                       double *hop_s,
                                       double *win_s,
                                       double *start_offset_s);

/**
 * Row-major frame values, `n_frames * dim` doubles owned by `frames`.
 *
 * # Safety
 * `frames` must be null or a live handle.
 */
const double *phonostat_frames_data(const PhonostatFrames *frames);

/**
 * # Safety
 * `frames` must be null or a handle not yet freed.
 */
void phonostat_frames_free(PhonostatFrames *frames);

/**
 * Parses a long-format TextGrid from a NUL-terminated UTF-8 string.
 *
 * # Safety
 * `text` must be a valid C string and `out` writable.
 */
PhonostatStatus phonostat_textgrid_parse(const char *text, PhonostatTextGrid **out);

/**
 * Counts non-silence phones on `tier`. Labels in the default silence set
 * are skipped; unknown labels are an error.
 *
 * # Safety
 * `tg` must be a live handle, `tier` a valid C string and `out` writable.
 */
PhonostatStatus phonostat_textgrid_phone_count(const PhonostatTextGrid *tg,
                                               const char *tier,
                                               size_t *out);

/**
 * # Safety
 * `tg` must be null or a handle not yet freed.
 */
void phonostat_textgrid_free(PhonostatTextGrid *tg);

/**
 * Maps an ARPAbet label with optional stress digit to its index in the
 * alphabetical 39-phoneme inventory.
 *
 * # Safety
 * `label` must be a valid C string and `out_index` writable.
 */
PhonostatStatus phonostat_phoneme_index(const char *label, uint32_t *out_index);

/**
 * Name of phoneme `index`, or null when out of range. Static storage.
 */
const char *phonostat_phoneme_name(uint32_t index);

/**
 * 1 for vowels, 0 for consonants, -1 when out of range.
 */
int32_t phonostat_phoneme_is_vowel(uint32_t index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHONOSTAT_H */
