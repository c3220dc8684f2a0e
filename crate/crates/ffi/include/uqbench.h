#ifndef UQBENCH_H
#define UQBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stddef.h>
#include <stdint.h>

/*
 Result of every call.
 */
typedef enum UqStatus {
  UQ_STATUS_OK = 0,
  UQ_STATUS_NULL_POINTER = 1,
  UQ_STATUS_INVALID_ARGUMENT = 2,
  UQ_STATUS_DIMENSION_MISMATCH = 3,
  UQ_STATUS_UNSUPPORTED = 4,
  UQ_STATUS_FIT_FAILED = 5,
  UQ_STATUS_NUMERICAL = 6,
  UQ_STATUS_PARSE = 7,
  UQ_STATUS_BUFFER_TOO_SMALL = 8,
  UQ_STATUS_PANIC = 9,
} UqStatus;

/*
 Correlation family of a Gaussian process.
 */
typedef enum UqKernel {
  UQ_KERNEL_SQUARED_EXPONENTIAL = 0,
  UQ_KERNEL_MATERN52 = 1,
} UqKernel;

/*
 An experimental design.
 */
typedef struct UqDesign UqDesign;

/*
 A fitted Gaussian process emulator.
 */
typedef struct UqGpModel UqGpModel;

/*
 A fitted polynomial chaos expansion.
 */
typedef struct UqPceModel UqPceModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the most recent failure on this thread, or NULL.
 The pointer stays valid until the next failing call on this thread.
 */
const char *uq_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *uq_version(void);

/*
 Release a string returned by a `*_to_json` function.

 # Safety
 `s` must come from this library or be NULL.
 */
void uq_string_free(char *s);

/*
 Sobol design of `m` points in `n` dimensions; seed 0 is unscrambled.

 # Safety
 `out` must be a valid pointer to a handle slot.
 */
enum UqStatus uq_design_sobol(size_t m, size_t n, uint64_t seed, struct UqDesign **out);

/*
 Latin hypercube of `m` points in `n` dimensions.

 # Safety
 `out` must be a valid pointer to a handle slot.
 */
enum UqStatus uq_design_lhs(size_t m, size_t n, uint64_t seed, struct UqDesign **out);

/*
 Tensor Gauss-Legendre grid with `orders[j]` nodes along input `j`.

 # Safety
 `orders` must hold `n` values; `out` must be a valid handle slot.
 */
enum UqStatus uq_design_tensor_grid(const size_t *orders, size_t n, struct UqDesign **out);

/*
 Design from `m` row-major points of dimension `n`. `weights` may be
 NULL; otherwise it holds `m` quadrature weights.

 # Safety
 `points` must hold `m * n` values and `weights` `m` values or be NULL.
 */
enum UqStatus uq_design_from_points(const double *points,
                                    size_t m,
                                    size_t n,
                                    const double *weights,
                                    struct UqDesign **out);

/*
 Number of points.

 # Safety
 `design` must be a live handle; `len` a valid pointer.
 */
enum UqStatus uq_design_len(const struct UqDesign *design, size_t *len);

/*
 Number of inputs.

 # Safety
 `design` must be a live handle; `dim` a valid pointer.
 */
enum UqStatus uq_design_dim(const struct UqDesign *design, size_t *dim);

/*
 Copy the row-major points into `buffer`, which holds `capacity` values.

 # Safety
 `buffer` must hold `capacity` writable values.
 */
enum UqStatus uq_design_points(const struct UqDesign *design, double *buffer, size_t capacity);

/*
 Release a design. NULL is ignored.

 # Safety
 `design` must come from this library and not be used afterwards.
 */
void uq_design_free(struct UqDesign *design);

/*
 Least-squares chaos of total order `p` on `design` with outputs `y`.

 # Safety
 `y` must hold `len` values; `out` must be a valid handle slot.
 */
enum UqStatus uq_pce_fit_regression(const struct UqDesign *design,
                                    const double *y,
                                    size_t len,
                                    uint32_t p,
                                    struct UqPceModel **out);

/*
 Spectral projection onto the tensor-product chaos of order `p`.
 The design must be a weighted tensor grid.

 # Safety
 `y` must hold `len` values; `out` must be a valid handle slot.
 */
enum UqStatus uq_pce_fit_projection(const struct UqDesign *design,
                                    const double *y,
                                    size_t len,
                                    uint32_t p,
                                    struct UqPceModel **out);

/*
 Prediction at one point of dimension `n`.

 # Safety
 `z` must hold `n` values; `value` must be valid.
 */
enum UqStatus uq_pce_predict(const struct UqPceModel *model,
                             const double *z,
                             size_t n,
                             double *value);

/*
 Mean and variance of the expansion under uniform inputs.

 # Safety
 `mean` and `variance` must be valid pointers.
 */
enum UqStatus uq_pce_moments(const struct UqPceModel *model, double *mean, double *variance);

/*
 Number of coefficients, and with a non-NULL `buffer` of at least that
 capacity, the coefficients themselves.

 # Safety
 `count` must be valid; `buffer` must hold `capacity` values or be NULL.
 */
enum UqStatus uq_pce_coefficients(const struct UqPceModel *model,
                                  double *buffer,
                                  size_t capacity,
                                  size_t *count);

/*
 Serialise to JSON; free the result with `uq_string_free`.

 # Safety
 `json` must be a valid pointer.
 */
enum UqStatus uq_pce_to_json(const struct UqPceModel *model, char **json);

/*
 Load a model written by `uq_pce_to_json` or the `uqbench fit` command.

 # Safety
 `json` must be NUL-terminated; `out` a valid handle slot.
 */
enum UqStatus uq_pce_from_json(const char *json, struct UqPceModel **out);

/*
 Release a chaos model. NULL is ignored.

 # Safety
 `model` must come from this library and not be used afterwards.
 */
void uq_pce_free(struct UqPceModel *model);

/*
 Fit a Gaussian process with a stepwise-selected mean and maximum
 likelihood correlation lengths.

 # Safety
 `y` must hold `len` values; `out` must be a valid handle slot.
 */
enum UqStatus uq_gp_fit(const struct UqDesign *design,
                        const double *y,
                        size_t len,
                        enum UqKernel kernel,
                        uint64_t seed,
                        struct UqGpModel **out);

/*
 Posterior mean and variance at one point of dimension `n`.

 # Safety
 `z` must hold `n` values; `mean` and `variance` must be valid.
 */
enum UqStatus uq_gp_predict(const struct UqGpModel *model,
                            const double *z,
                            size_t n,
                            double *mean,
                            double *variance);

/*
 Fitted correlation lengths, one per input.

 # Safety
 `buffer` must hold `capacity` writable values.
 */
enum UqStatus uq_gp_lengths(const struct UqGpModel *model, double *buffer, size_t capacity);

/*
 Serialise to JSON; free the result with `uq_string_free`.

 # Safety
 `json` must be a valid pointer.
 */
enum UqStatus uq_gp_to_json(const struct UqGpModel *model, char **json);

/*
 Load a model written by `uq_gp_to_json` or the `uqbench fit` command.

 # Safety
 `json` must be NUL-terminated; `out` a valid handle slot.
 */
enum UqStatus uq_gp_from_json(const char *json, struct UqGpModel **out);

/*
 Release a Gaussian process. NULL is ignored.

 # Safety
 `model` must come from this library and not be used afterwards.
 */
void uq_gp_free(struct UqGpModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UQBENCH_H */
