#ifndef METIVIER_H
#define METIVIER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes. `Ok` is zero; the rest name the failing condition.
 */
typedef enum MtvStatus {
  MTV_STATUS_OK = 0,
  MTV_STATUS_NULL_POINTER = 1,
  MTV_STATUS_INVALID_ARGUMENT = 2,
  MTV_STATUS_DIMENSION_MISMATCH = 3,
  MTV_STATUS_NOT_SKEW_SYMMETRIC = 4,
  MTV_STATUS_DEPENDENT_STRUCTURE_MATRICES = 5,
  MTV_STATUS_SINGULAR_PENCIL = 6,
  MTV_STATUS_NON_CONVERGENCE = 7,
  MTV_STATUS_RANGE_EXCEEDED = 8,
  MTV_STATUS_OUT_OF_DOMAIN = 9,
  MTV_STATUS_UNSUPPORTED_DIMENSION = 10,
  MTV_STATUS_NON_FINITE_VALUE = 11,
  MTV_STATUS_GRID_MISMATCH = 12,
  MTV_STATUS_MALFORMED_FILE = 13,
  MTV_STATUS_VERSION_MISMATCH = 14,
  MTV_STATUS_TRUNCATION_DOMINATES = 15,
  MTV_STATUS_NYQUIST_VIOLATION = 16,
  MTV_STATUS_NOT_HOMOGENEOUS = 17,
  MTV_STATUS_GRID_TOO_COARSE = 18,
  MTV_STATUS_NO_USABLE_RADIUS = 19,
  MTV_STATUS_INADMISSIBLE_RADII = 20,
  MTV_STATUS_IO = 21,
  MTV_STATUS_JSON = 22,
  MTV_STATUS_BUFFER_TOO_SMALL = 23,
  MTV_STATUS_PANIC = 99,
} MtvStatus;

/*
 Opaque sampled field on a polar grid.
 */
typedef struct MtvField MtvField;

/*
 Opaque Métivier structure.
 */
typedef struct MtvStructure MtvStructure;

/*
 Polar grid description: `n` coordinates (1 or 2), each with `radial[j]`
 Gauss–Legendre radii on `[0, r_max]` and `angular[j]` angles.
 */
typedef struct MtvGrid {
  uintptr_t n;
  double r_max;
  uintptr_t radial[2];
  uintptr_t angular[2];
} MtvGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; valid until the next failure.
 */
const char *mtv_last_error(void);

/*
 Looks up a built-in structure (`heisenberg:<n>`, `quaternionic`,
 `product-counterexample`, `anisotropic`) or reads a structure JSON file.

 # Safety
 `name` must be a NUL-terminated string; `out` must be writable.
 */
enum MtvStatus mtv_structure_new(const char *name, struct MtvStructure **out_structure);

/*
 # Safety
 `s` must come from `mtv_structure_new` or be null.
 */
void mtv_structure_free(struct MtvStructure *s);

/*
 Writes `n` and `m` of a structure.

 # Safety
 Pointers must be valid.
 */
enum MtvStatus mtv_structure_dims(const struct MtvStructure *s, uintptr_t *out_n, uintptr_t *out_m);

/*
 Symplectic spectrum at `lambda` (length `m`): writes `μ` (length `n`) and
 `A_λ` row-major (`2n × 2n`).

 # Safety
 `mu` must hold `n` doubles and `a` must hold `4n²` doubles.
 */
enum MtvStatus mtv_symplectic_spectrum(const struct MtvStructure *s,
                                       const double *lambda,
                                       uintptr_t m,
                                       double *mu,
                                       double *a);

/*
 `θ_{k,λ'}(z)` with `z` given as `n` interleaved complex numbers.

 # Safety
 `lambda_prime` and `z` must hold `n` and `2n` doubles.
 */
enum MtvStatus mtv_theta(uintptr_t k,
                         const double *lambda_prime,
                         uintptr_t n,
                         const double *z,
                         double *out_value);

/*
 Creates a field from `len` interleaved complex samples in grid order.

 # Safety
 `values` must hold `2 * len` doubles.
 */
enum MtvStatus mtv_field_from_values(const struct MtvGrid *grid,
                                     const double *values,
                                     uintptr_t len,
                                     struct MtvField **out_field);

/*
 Samples `θ_{k,λ'}` on a grid; `lambda_prime` has `grid.n` entries.

 # Safety
 Pointers must be valid.
 */
enum MtvStatus mtv_field_theta(const struct MtvGrid *grid,
                               uintptr_t k,
                               const double *lambda_prime,
                               struct MtvField **out_field);

/*
 Reads a field file.

 # Safety
 `path` must be a NUL-terminated string.
 */
enum MtvStatus mtv_field_read(const char *path, struct MtvField **out_field);

/*
 Writes a field file; `base64` selects the text encoding.

 # Safety
 Pointers must be valid.
 */
enum MtvStatus mtv_field_write(const struct MtvField *f, const char *path, bool base64);

/*
 Number of complex samples.

 # Safety
 `f` must be a live handle or null (returns 0).
 */
uintptr_t mtv_field_len(const struct MtvField *f);

/*
 Copies the samples as interleaved pairs into `buf` of `cap` doubles.

 # Safety
 `buf` must hold `cap` doubles.
 */
enum MtvStatus mtv_field_values(const struct MtvField *f, double *buf, uintptr_t cap);

/*
 # Safety
 `f` must come from this library or be null.
 */
void mtv_field_free(struct MtvField *f);

/*
 `λ'`-twisted spherical mean over `|w| = radius` with a sphere rule of the
 given order.

 # Safety
 Pointers must be valid; `lambda_prime` has the field's `n` entries.
 */
enum MtvStatus mtv_twisted_mean(const struct MtvField *f,
                                const double *lambda_prime,
                                double radius,
                                uintptr_t order,
                                struct MtvField **out_field);

/*
 Recovers a field from its mean against `Σ w_i μ_{r_i}` through degree
 `k_max`. `out_unrecoverable` receives the number of degrees that could
 not be recovered.

 # Safety
 `radii` and `weights` hold `count` doubles; other pointers must be valid.
 */
enum MtvStatus mtv_reconstruct(const struct MtvField *mean,
                               const double *radii,
                               const double *weights,
                               uintptr_t count,
                               const double *lambda_prime,
                               uintptr_t k_max,
                               struct MtvField **out_field,
                               uintptr_t *out_unrecoverable);

/*
 Two-radii admissibility within `(k_max, n_max)` at tolerance `tol`.
 Writes 1 to `out_admissible` when no conflict is found, else 0.

 # Safety
 `lambda_prime` holds `n` doubles.
 */
enum MtvStatus mtv_two_radii_check(double r1,
                                   double r2,
                                   uintptr_t n,
                                   const double *lambda_prime,
                                   uintptr_t k_max,
                                   uintptr_t n_max,
                                   double tol,
                                   int32_t *out_admissible);

/*
 `θ_{l,λ'}` sampled on `grid`, annihilated by the mean over
 `|w| = *out_radius`; `out_residual` is the observed mean size.

 # Safety
 Pointers must be valid.
 */
enum MtvStatus mtv_counterexample(uintptr_t l,
                                  const struct MtvGrid *grid,
                                  const double *lambda_prime,
                                  struct MtvField **out_field,
                                  double *out_radius,
                                  double *out_residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* METIVIER_H */
