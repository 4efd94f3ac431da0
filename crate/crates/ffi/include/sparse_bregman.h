#ifndef SPARSE_BREGMAN_H
#define SPARSE_BREGMAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SbStatus {
  SB_STATUS_OK = 0,
  SB_STATUS_NULL_POINTER = 1,
  SB_STATUS_DOMAIN_ERROR = 2,
  SB_STATUS_UNSUPPORTED_GENERATOR = 3,
  SB_STATUS_BRACKET_ERROR = 4,
  SB_STATUS_CONVERGENCE_ERROR = 5,
  SB_STATUS_GENERATOR_ERROR = 6,
  SB_STATUS_INPUT_ERROR = 7,
  SB_STATUS_TIE_ERROR = 8,
  SB_STATUS_RANGE_ERROR = 9,
  SB_STATUS_SIZE_ERROR = 10,
  SB_STATUS_MULTIPLE_CROSSINGS = 11,
  SB_STATUS_PANIC = 12,
} SbStatus;

typedef enum SbMode {
  SB_MODE_PRIMAL = 0,
  SB_MODE_DUAL = 1,
} SbMode;

typedef enum SbSearch {
  SB_SEARCH_BINARY = 0,
  SB_SEARCH_EXPONENTIAL = 1,
  SB_SEARCH_LINEAR = 2,
} SbSearch;

// Opaque decode configuration.
typedef struct SbConfig SbConfig;

// Opaque decode result.
typedef struct SbResult SbResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *sb_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sb_version(void);

// Creates a configuration. `generator_name` is a real number, `shannon`, `inf` or
// `-inf`. Defaults: no k cap, binary search, temperature 1.
//
// # Safety
// `generator_name` must be a valid C string and `out` a valid pointer.
enum SbStatus sb_config_new(enum SbMode mode,
                            const char *generator_name,
                            double lambda,
                            struct SbConfig **out);

// # Safety
// `cfg` must come from [`sb_config_new`] and not be used afterwards.
void sb_config_free(struct SbConfig *cfg);

// Caps `k*` at `k_max`; 0 removes the cap.
//
// # Safety
// `cfg` must be a live configuration handle.
enum SbStatus sb_config_set_k_max(struct SbConfig *cfg, size_t k_max);

// # Safety
// `cfg` must be a live configuration handle.
enum SbStatus sb_config_set_search(struct SbConfig *cfg, enum SbSearch search);

// # Safety
// `cfg` must be a live configuration handle.
enum SbStatus sb_config_set_temperature(struct SbConfig *cfg, double temperature);

// Sets the relative tolerance of the multiplier solves.
//
// # Safety
// `cfg` must be a live configuration handle.
enum SbStatus sb_config_set_tol(struct SbConfig *cfg, double tol);

// Decodes a probability vector of length `len`.
//
// # Safety
// `probs` must point to `len` readable doubles; `out` must be writable.
enum SbStatus sb_decode(const struct SbConfig *cfg,
                        const double *probs,
                        size_t len,
                        struct SbResult **out);

// Softmax at the configured temperature, then decode.
//
// # Safety
// `logits` must point to `len` readable doubles; `out` must be writable.
enum SbStatus sb_decode_logits(const struct SbConfig *cfg,
                               const double *logits,
                               size_t len,
                               struct SbResult **out);

// # Safety
// `res` must come from a decode call and not be used afterwards.
void sb_result_free(struct SbResult *res);

// # Safety
// `res` must be a live result handle.
size_t sb_result_k_star(const struct SbResult *res);

// # Safety
// `res` must be a live result handle.
double sb_result_nu(const struct SbResult *res);

// # Safety
// `res` must be a live result handle.
double sb_result_cost(const struct SbResult *res);

// Length of the dense probability vector.
//
// # Safety
// `res` must be a live result handle.
size_t sb_result_len(const struct SbResult *res);

// Dense sparse distribution, [`sb_result_len`] entries, owned by `res`.
//
// # Safety
// `res` must be a live result handle.
const double *sb_result_probs(const struct SbResult *res);

// Ascending support indices, [`sb_result_k_star`] entries, owned by `res`.
//
// # Safety
// `res` must be a live result handle.
const size_t *sb_result_support(const struct SbResult *res);

// Renormalizes the sub-probability vector `x` into `out` (both `len`
// entries) and stores the multiplier in `nu_out` when it is not null.
//
// # Safety
// `generator_name` must be a C string; `x` readable and `out` writable for
// `len` doubles.
enum SbStatus sb_renormalize(enum SbMode mode,
                             const char *generator_name,
                             const double *x,
                             size_t len,
                             double *out,
                             double *nu_out);

// Writes `cost(k)` for `k = lo..=hi` into `out`, which must hold
// `hi - lo + 1` doubles.
//
// # Safety
// `probs` readable for `len` doubles; `out` writable for `hi - lo + 1`.
enum SbStatus sb_cost_curve(const struct SbConfig *cfg,
                            const double *probs,
                            size_t len,
                            size_t lo,
                            size_t hi,
                            double *out);

// Replaces `logits` by log-probabilities on the decoded support and `-inf`
// elsewhere, writing `len` values to `out`.
//
// # Safety
// `logits` readable and `out` writable for `len` doubles.
enum SbStatus sb_logits_process(const struct SbConfig *cfg,
                                const double *logits,
                                size_t len,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSE_BREGMAN_H */
