/* C interface to hplab: weighted-sequence analysis and experiment runner. */

#ifndef HPLAB_H
#define HPLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define HPLAB_OK 0

// A required pointer argument was NULL.
#define HPLAB_ERR_NULL_ARG 1

// A string argument was not valid UTF-8.
#define HPLAB_ERR_UTF8 2

// A JSON document failed to parse or did not match the expected shape.
#define HPLAB_ERR_JSON 3

// Arguments were outside the supported domain (unknown id, bad parameter).
#define HPLAB_ERR_DOMAIN 4

// The computation itself failed (see the error message).
#define HPLAB_ERR_RUNTIME 5

// An internal panic was caught at the boundary.
#define HPLAB_ERR_PANIC 6

// Opaque weight-sequence handle.
typedef struct HplabWeight HplabWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Latest error description for this thread (empty until a call fails).
// The pointer stays valid until the next failing call on the same thread.
const char *hplab_last_error(void);

// Create a weight sequence from its id and a JSON parameter object.
//
// `params_json` may be NULL for families without parameters; ids and
// parameter keys match the experiment configuration format (for example
// `"poly_shift"` with `{"exponent": 2.0}`).
//
// # Safety
// `id`/`params_json` must be NULL or NUL-terminated; `out` must be a valid
// pointer. A non-NULL result in `*out` must be released with
// [`hplab_weight_free`].
int hplab_weight_new(const char *id, const char *params_json, struct HplabWeight **out);

// Release a weight handle (NULL is a no-op).
//
// # Safety
// `w` must be NULL or a pointer produced by [`hplab_weight_new`] that has
// not been freed yet.
void hplab_weight_free(struct HplabWeight *w);

// log β_n of the weight.
//
// # Safety
// `w` must be a live handle; `out` must be a valid pointer.
int hplab_weight_log_beta(const struct HplabWeight *w, size_t n, double *out);

// B_n = Σ_k 1/(β_k β_{n−k}), the reciprocal self-convolution.
//
// # Safety
// `w` must be a live handle; `out` must be a valid pointer.
int hplab_weight_bn(const struct HplabWeight *w, size_t n, double *out);

// sup_{n ≤ n_max} β_n B_n together with the index attaining it.
//
// `argmax_out` may be NULL when the index is not needed.
//
// # Safety
// `w` must be a live handle; `sup_out` must be valid; `argmax_out` must be
// NULL or valid.
int hplab_weight_bnbeta_sup(const struct HplabWeight *w,
                            size_t n_max,
                            double *sup_out,
                            size_t *argmax_out);

// ∫ over the symbol window of |ĉ_m(T_a^n)|^s da, by adaptive quadrature.
//
// `err_out` may be NULL. Fails with `HPLAB_ERR_RUNTIME` when the requested
// tolerance was not certified within the evaluation budget implied by
// `nodes`.
//
// # Safety
// `value_out` must be valid; `err_out` must be NULL or valid.
int hplab_osc_integral(size_t n,
                       size_t m,
                       double s,
                       size_t nodes,
                       double *value_out,
                       double *err_out);

// JSON array of the available experiment ids, in suite order.
//
// # Safety
// `out` must be a valid pointer; the returned string must be released with
// [`hplab_string_free`].
int hplab_experiment_list(char **out);

// Run one experiment and return its full record as a JSON document.
//
// `config_json` may be NULL (shipped defaults) or a configuration document
// `{"experiment"?, "seed"?, "params"?}`; a mismatched `experiment` field is
// rejected. The record contains parameters, rows, scalars, criteria, and
// the overall pass flag.
//
// # Safety
// `id` must be NUL-terminated; `config_json` NULL or NUL-terminated;
// `record_json_out` valid. The returned string must be released with
// [`hplab_string_free`].
int hplab_experiment_run(const char *id, const char *config_json, char **record_json_out);

// Release a string returned by this library (NULL is a no-op).
//
// # Safety
// `s` must be NULL or a pointer returned by an hplab function that has not
// been freed yet.
void hplab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HPLAB_H */
