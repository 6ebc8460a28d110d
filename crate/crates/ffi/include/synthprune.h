#ifndef SYNTHPRUNE_H
#define SYNTHPRUNE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  SP_STATUS_PARSE = 3,
  SP_STATUS_BUFFER_TOO_SMALL = 4,
  SP_STATUS_PANIC = 5,
} SpStatus;

/**
 * Opaque connection-mask handle.
 */
typedef struct SpMask SpMask;

/**
 * Opaque network handle.
 */
typedef struct SpNetwork SpNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sp_version(void);

/**
 * Fully connected network with Glorot-uniform weights and zero biases.
 *
 * # Safety
 * `widths` must point to `n_widths` values and `out` must be writable.
 */
enum SpStatus sp_network_init_dense(const size_t *widths,
                                    size_t n_widths,
                                    uint64_t seed,
                                    struct SpNetwork **out_net);

/**
 * Parse a network from its text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum SpStatus sp_network_from_text(const char *text, struct SpNetwork **out_net);

/**
 * Serialise a network. Free the result with [`sp_string_free`].
 *
 * # Safety
 * `net` must be a live handle and `out` writable.
 */
enum SpStatus sp_network_to_text(const struct SpNetwork *net, char **out_text);

/**
 * Replace the network's mask with a copy of `mask`; weights of newly
 * disabled connections become 0.
 *
 * # Safety
 * Both handles must be live.
 */
enum SpStatus sp_network_set_mask(struct SpNetwork *net, const struct SpMask *mask);

/**
 * Copy of the network's mask.
 *
 * # Safety
 * `net` must be a live handle and `out` writable.
 */
enum SpStatus sp_network_mask(const struct SpNetwork *net, struct SpMask **out_mask);

/**
 * Output scores for `rows` samples laid out row-major in `inputs`.
 *
 * # Safety
 * `inputs` must hold `rows * input_width` values; `scores` must hold
 * `capacity` values; `out_len` must be writable.
 */
enum SpStatus sp_network_forward(const struct SpNetwork *net,
                                 const double *inputs,
                                 size_t rows,
                                 double *scores,
                                 size_t capacity,
                                 size_t *out_len);

/**
 * Fraction of disabled connections.
 *
 * # Safety
 * `net` must be a live handle and `out` writable.
 */
enum SpStatus sp_network_sparsity(const struct SpNetwork *net, double *out_sparsity);

/**
 * New network without connections that lie on no input-to-output path.
 * Outputs are unchanged. `removed` receives the number of connections
 * dropped and may be null.
 *
 * # Safety
 * `net` must be a live handle and `out` writable.
 */
enum SpStatus sp_network_dag_prune(const struct SpNetwork *net,
                                   struct SpNetwork **out_net,
                                   size_t *removed);

/**
 * # Safety
 * `net` must be null or a handle not yet freed.
 */
void sp_network_free(struct SpNetwork *net);

/**
 * Random-walk starting mask.
 *
 * # Safety
 * `widths` must point to `n_widths` values and `out` must be writable.
 */
enum SpStatus sp_mask_walk_init(const size_t *widths,
                                size_t n_widths,
                                uint64_t seed,
                                struct SpMask **out_mask);

/**
 * Parse a mask from its text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum SpStatus sp_mask_from_text(const char *text, struct SpMask **out_mask);

/**
 * Serialise a mask. Free the result with [`sp_string_free`].
 *
 * # Safety
 * `mask` must be a live handle and `out` writable.
 */
enum SpStatus sp_mask_to_text(const struct SpMask *mask, char **out_text);

/**
 * # Safety
 * `mask` must be a live handle and `out` writable.
 */
enum SpStatus sp_mask_enabled_count(const struct SpMask *mask, size_t *out_count);

/**
 * # Safety
 * `mask` must be a live handle and `out` writable.
 */
enum SpStatus sp_mask_sparsity(const struct SpMask *mask, double *out_sparsity);

/**
 * Jaccard similarity of two masks over the same architecture.
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum SpStatus sp_mask_similarity(const struct SpMask *a, const struct SpMask *b, double *out_value);

/**
 * Mask without connections on no input-to-output path. `removed` may be
 * null.
 *
 * # Safety
 * `mask` must be a live handle and `out` writable.
 */
enum SpStatus sp_mask_dag_prune(const struct SpMask *mask,
                                struct SpMask **out_mask,
                                size_t *removed);

/**
 * # Safety
 * `mask` must be null or a handle not yet freed.
 */
void sp_mask_free(struct SpMask *mask);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void sp_string_free(char *s);

/**
 * Normalised Gaussian terminus probabilities over `width` positions,
 * centred on `beta`.
 *
 * # Safety
 * `probabilities` must hold `capacity` values and `out_len` be writable.
 */
enum SpStatus sp_gaussian_distribution(size_t beta,
                                       size_t width,
                                       double *probabilities,
                                       size_t capacity,
                                       size_t *out_len);

/**
 * Area under the ROC curve; labels are 0 or 1.
 *
 * # Safety
 * `scores` and `labels` must each hold `n` values; `out` must be writable.
 */
enum SpStatus sp_roc_auc(const double *scores, const double *labels, size_t n, double *out_auc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYNTHPRUNE_H */
