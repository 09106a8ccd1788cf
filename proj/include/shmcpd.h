/*
 * shmcpd: sequential structural damage detection and localization.
 *
 * C interface over the C++ core. Objects are opaque handles created by
 * shm_*_create and released by the matching shm_*_destroy. Every fallible
 * call returns an shm_status; on failure shm_last_error() describes the
 * problem (per thread, valid until the next failing call on that thread).
 *
 * Matrices are dense, row-major, dim x dim. Steps and chunk indices are
 * 1-based. "No value" for an integer step is reported as -1.
 */
#ifndef SHMCPD_H
#define SHMCPD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SHMCPD_BUILDING)
#    define SHM_API __declspec(dllexport)
#  else
#    define SHM_API __declspec(dllimport)
#  endif
#else
#  define SHM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum shm_status {
  SHM_OK = 0,
  SHM_ERR_INVALID_ARGUMENT = 1,
  SHM_ERR_ZERO_VARIANCE = 2,
  SHM_ERR_SINGULAR_DESIGN = 3,
  SHM_ERR_NOT_POSITIVE_DEFINITE = 4,
  SHM_ERR_DIMENSION_MISMATCH = 5,
  SHM_ERR_DEGENERATE_DELAY = 6,
  SHM_ERR_EMPTY_STREAM = 7,
  SHM_ERR_ESTIMATES_UNREADY = 8,
  SHM_ERR_INSUFFICIENT_TRAINING = 9,
  SHM_ERR_EIGEN_FAILURE = 10,
  SHM_ERR_CONFIG = 11,
  SHM_ERR_IO = 12,
  SHM_ERR_PARSE = 13,
  SHM_ERR_INTERNAL = 99
} shm_status;

SHM_API const char *shm_version(void);
SHM_API const char *shm_status_name(shm_status status);
SHM_API const char *shm_last_error(void);

/* Strings returned through char** are owned by the caller. */
SHM_API void shm_string_free(char *s);

/* ---- Damage-sensitive features ----------------------------------------- */

/* out must hold n values. */
SHM_API shm_status shm_normalize_chunk(const double *chunk, size_t n, double *out);

/* coefficients must hold `order` values; residual_variance may be NULL. */
SHM_API shm_status shm_fit_ar(const double *normalized, size_t n, int order, double *coefficients,
                              double *residual_variance);

/* `samples` holds n_chunks consecutive raw chunks of chunk_len samples.
 * aic (optional, may be NULL) receives p_max averaged AIC values. */
SHM_API shm_status shm_select_order(const double *samples, size_t n_chunks, size_t chunk_len, int p_max,
                                    int *order, double *aic);

/* Features of one raw stream: out_values receives n_steps * dim values where
 * n_steps = n / chunk_len (trailing partial chunk dropped). subset may be NULL
 * (all coefficients). Call with out_values == NULL to query n_steps and dim. */
SHM_API shm_status shm_extract_dsf(const double *stream, size_t n, size_t chunk_len, int order, const int *subset,
                                   size_t subset_len, double *out_values, size_t out_capacity, size_t *n_steps,
                                   size_t *dim);

/* ---- Gaussian feature distributions ------------------------------------ */

typedef struct shm_gaussian shm_gaussian;

SHM_API shm_status shm_gaussian_create(const double *mean, const double *cov, size_t dim, shm_gaussian **out);
/* Sample mean and unbiased covariance (ridge regularized) of n row vectors;
 * needs n >= dim + 1. */
SHM_API shm_status shm_gaussian_fit(const double *rows, size_t n, size_t dim, shm_gaussian **out);
SHM_API void shm_gaussian_destroy(shm_gaussian *g);
SHM_API size_t shm_gaussian_dim(const shm_gaussian *g);
/* mean: dim values, cov: dim*dim values; either may be NULL. */
SHM_API shm_status shm_gaussian_params(const shm_gaussian *g, double *mean, double *cov);
SHM_API shm_status shm_gaussian_log_density(const shm_gaussian *g, const double *x, size_t dim, double *out);
SHM_API shm_status shm_kl_gaussian(const shm_gaussian *f, const shm_gaussian *g, double *out);

/* ---- Detection ----------------------------------------------------------- */

typedef struct shm_detector shm_detector;

/* Known pre- (g) and post-change (f) distributions. The handles are copied. */
SHM_API shm_status shm_detector_create_known(const shm_gaussian *g, const shm_gaussian *f, double rho,
                                             double alpha, shm_detector **out);
/* Known g; f is estimated online. Detection is suppressed for the first
 * max(dim + 1, warmup) steps. */
SHM_API shm_status shm_detector_create_adaptive(const shm_gaussian *g, double rho, double alpha, int64_t warmup,
                                                shm_detector **out);
SHM_API void shm_detector_destroy(shm_detector *d);

/* Feeds one feature vector; posterior and ccdf may be NULL. */
SHM_API shm_status shm_detector_update(shm_detector *d, const double *x, size_t dim, double *posterior,
                                       double *ccdf);
SHM_API int64_t shm_detector_step(const shm_detector *d);
SHM_API double shm_detector_posterior(const shm_detector *d);
/* Latched detection step, -1 if not detected. */
SHM_API int64_t shm_detector_detection_time(const shm_detector *d);
/* Adaptive detectors: current post-change estimate; SHM_ERR_ESTIMATES_UNREADY
 * during the warm-up. Known detectors return a copy of f. */
SHM_API shm_status shm_detector_post(const shm_detector *d, shm_gaussian **out);

/* |ln alpha| / (-ln(1 - rho) + kl) */
SHM_API shm_status shm_expected_delay(double alpha, double rho, double kl, double *out);

/* ---- Shear-frame simulator ---------------------------------------------- */

/* out_hz receives `stories` natural frequencies, ascending. */
SHM_API shm_status shm_modal_frequencies(const double *masses, const double *stiffnesses, size_t stories,
                                         double *out_hz);

/* ---- Pipeline ------------------------------------------------------------ */

/* Simulates the scenario described by scenario_json into out_dir.
 * meta_json (optional) receives the metadata document. */
SHM_API shm_status shm_gen(const char *scenario_json, const char *out_dir, char **meta_json);

/* Runs detection and localization as configured by config_json. exit_code
 * receives 0 (no damage) or 2 (damage detected). summary_json (optional)
 * receives the detection summary. */
SHM_API shm_status shm_run(const char *config_json, int *exit_code, char **summary_json);

/* Reads a run directory, writes ccdf_plot.csv into it and returns a text table. */
SHM_API shm_status shm_report(const char *run_dir, char **table);

#ifdef __cplusplus
}
#endif

#endif /* SHMCPD_H */
