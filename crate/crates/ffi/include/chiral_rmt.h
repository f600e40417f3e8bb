#ifndef CHIRAL_RMT_H
#define CHIRAL_RMT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum ChiralStatus {
  CHIRAL_STATUS_OK = 0,
  CHIRAL_STATUS_NULL_POINTER = 1,
  CHIRAL_STATUS_INVALID_ARGUMENT = 2,
  CHIRAL_STATUS_DOMAIN = 3,
  CHIRAL_STATUS_NON_CONVERGENCE = 4,
  CHIRAL_STATUS_SINGULARITY = 5,
  CHIRAL_STATUS_DEGENERATE_ENDPOINT = 6,
  CHIRAL_STATUS_DEGENERATE_MASS = 7,
  CHIRAL_STATUS_BUFFER_TOO_SMALL = 8,
  CHIRAL_STATUS_PANIC = 9,
} ChiralStatus;

// Kernel tables for fixed N and μ.
typedef struct ChiralKernelSet ChiralKernelSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *chiral_version(void);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `cap`) and returns the full message length.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t chiral_last_error(char *buf, size_t cap);

// Builds the kernel tables for N × N matrices at coupling `mu` in (0, 1).
//
// # Safety
// `out` must be valid for a pointer write.
enum ChiralStatus chiral_kernel_set_new(size_t n, double mu, struct ChiralKernelSet **out);

// Releases a handle; null is ignored.
//
// # Safety
// `h` must come from `chiral_kernel_set_new` and not be used afterwards.
void chiral_kernel_set_free(struct ChiralKernelSet *h);

// Level density ρ_N at `len` points.
//
// # Safety
// `lambda` and `out` must be valid for `len` doubles.
enum ChiralStatus chiral_level_density(const struct ChiralKernelSet *h,
                                       const double *lambda,
                                       size_t len,
                                       double *out);

// K_N, G_N and W_N at (λ₁, λ₂). Any of the out pointers may be null.
//
// # Safety
// Non-null out pointers must be valid for a double write.
enum ChiralStatus chiral_kernels(const struct ChiralKernelSet *h,
                                 double l1,
                                 double l2,
                                 double *k,
                                 double *g,
                                 double *w);

// k-point correlation function at `k` points.
//
// # Safety
// `points` must be valid for `k` doubles and `out` for one.
enum ChiralStatus chiral_correlation(const struct ChiralKernelSet *h,
                                     const double *points,
                                     size_t k,
                                     double *out);

// Ascending coefficients in λ² of q_j (`tilde == 0`) or q̃_j. `len`
// receives the coefficient count; when it exceeds `cap` nothing is copied
// and `BufferTooSmall` is returned.
//
// # Safety
// `coeffs` must be valid for `cap` doubles, `len` for one write.
enum ChiralStatus chiral_polynomial(size_t j,
                                    double mu,
                                    int32_t tilde,
                                    double *coeffs,
                                    size_t cap,
                                    size_t *len);

// Group integral for A = B = diag(a) at coupling ξ.
//
// # Safety
// `a` must be valid for `n` doubles and `out` for one.
enum ChiralStatus chiral_group_integral(const double *a, size_t n, double xi, double *out);

// Monte Carlo histogram of singular values with `bins` bins on [lo, hi),
// normalized to one over the range. Deterministic in (`seed`, `n`, `mu`,
// `samples`) regardless of threading.
//
// # Safety
// `density` and `std_error` must each be valid for `bins` doubles.
enum ChiralStatus chiral_mc_density(size_t n,
                                    double mu,
                                    size_t samples,
                                    uint64_t seed,
                                    size_t bins,
                                    double lo,
                                    double hi,
                                    double *density,
                                    double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHIRAL_RMT_H */
