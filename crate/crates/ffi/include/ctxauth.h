#ifndef CTXAUTH_H
#define CTXAUTH_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum CtxStatus {
  CTX_STATUS_OK = 0,
  CTX_STATUS_NULL_POINTER = 1,
  CTX_STATUS_INVALID_ARGUMENT = 2,
  CTX_STATUS_IO = 3,
  CTX_STATUS_SERIALIZATION = 4,
  CTX_STATUS_SCHEMA_MISMATCH = 5,
  CTX_STATUS_MISSING_ALGORITHM = 6,
  CTX_STATUS_DIMENSION_MISMATCH = 7,
  CTX_STATUS_FEATURE_EXTRACTION = 8,
  CTX_STATUS_EVALUATION = 9,
  CTX_STATUS_INTERNAL = 10,
} CtxStatus;

/**
 * Classifier selector, in the same order the library reports them.
 */
typedef enum CtxAlgorithm {
  CTX_ALGORITHM_LOG_REG = 0,
  CTX_ALGORITHM_MLP = 1,
  CTX_ALGORITHM_KNN = 2,
  CTX_ALGORITHM_SVM = 3,
  CTX_ALGORITHM_RF = 4,
} CtxAlgorithm;

/**
 * Opaque handle to an enrolled user profile.
 */
typedef struct CtxProfile CtxProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ctx_version(void);

/**
 * Length of every raw feature vector.
 */
size_t ctx_feature_dim(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes). Returns the full message length in bytes, so
 * a caller can size the buffer with a first call passing `len = 0`.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null when `len` is 0.
 */
size_t ctx_last_error_message(char *buf, size_t len);

/**
 * Loads a profile JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer. On
 * success `*out` owns a handle that must be freed with [`ctx_profile_free`].
 */
enum CtxStatus ctx_profile_load(const char *path, struct CtxProfile **out);

/**
 * Parses a profile from an in-memory JSON document.
 *
 * # Safety
 * Same contract as [`ctx_profile_load`].
 */
enum CtxStatus ctx_profile_from_json(const char *json, struct CtxProfile **out);

/**
 * Releases a profile handle. Null is ignored.
 *
 * # Safety
 * `profile` must come from this library and not be used afterwards.
 */
void ctx_profile_free(struct CtxProfile *profile);

/**
 * Number of contexts that carry trained models.
 *
 * # Safety
 * `profile` must be a live handle or null (returns 0).
 */
size_t ctx_profile_context_count(const struct CtxProfile *profile);

/**
 * Scores one raw feature vector of [`ctx_feature_dim`] components. Writes the
 * routed context id and the genuine-class score in `[0, 1]`.
 *
 * # Safety
 * `features` must be valid for `len` doubles; the out pointers must be valid.
 */
enum CtxStatus ctx_profile_score(const struct CtxProfile *profile,
                                 enum CtxAlgorithm algorithm,
                                 const double *features,
                                 size_t len,
                                 size_t *out_context,
                                 double *out_score);

/**
 * Extracts features from one window of preprocessed samples and scores it.
 *
 * The window starts at `t_ms[0]` and spans the profile's window length;
 * samples past that are ignored. `screen_on` holds 0/1 bytes.
 *
 * # Safety
 * Each array must be valid for `n` elements; the out pointers must be valid.
 */
enum CtxStatus ctx_profile_score_window(const struct CtxProfile *profile,
                                        enum CtxAlgorithm algorithm,
                                        const uint64_t *t_ms,
                                        const double *x,
                                        const double *y,
                                        const double *z,
                                        const uint8_t *screen_on,
                                        size_t n,
                                        size_t *out_context,
                                        double *out_score);

/**
 * Equal error rate of two score lists, with the operating threshold.
 *
 * # Safety
 * Arrays must be valid for their lengths; the out pointers must be valid.
 */
enum CtxStatus ctx_compute_eer(const double *genuine,
                               size_t n_genuine,
                               const double *impostor,
                               size_t n_impostor,
                               double *out_eer,
                               double *out_threshold);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CTXAUTH_H */
