#ifndef SIGNALMARKET_H
#define SIGNALMARKET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SmStatus {
  SM_STATUS_OK = 0,
  /**
   * A required pointer was null or a string was not UTF-8.
   */
  SM_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Bad configuration or input data.
   */
  SM_STATUS_INPUT = 2,
  /**
   * The computation failed numerically.
   */
  SM_STATUS_NUMERICAL = 3,
  /**
   * An internal panic was caught at the boundary.
   */
  SM_STATUS_INTERNAL = 4,
} SmStatus;

/**
 * TF-IDF model fitted on a corpus, with the bundled English stopwords.
 */
typedef struct SmCorpus SmCorpus;

/**
 * A generated synthetic market.
 */
typedef struct SmDataset SmDataset;

/**
 * Model parameters.
 */
typedef struct SmParams SmParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Owned by the library.
 */
const char *sm_last_error(void);

/**
 * Library version as a static string.
 */
const char *sm_version(void);

/**
 * Parameters of the published simulation figures.
 *
 * # Safety
 * `out_params` must be valid for writes.
 */
enum SmStatus sm_params_default(struct SmParams **out_params);

/**
 * Validated parameters.
 *
 * # Safety
 * `out_params` must be valid for writes.
 */
enum SmStatus sm_params_new(double mu0,
                            double tau2,
                            double sigma2,
                            double p,
                            double a,
                            size_t n,
                            struct SmParams **out_params);

/**
 * # Safety
 * `params` must come from `sm_params_*` and not be used afterwards. Null is ignored.
 */
void sm_params_free(struct SmParams *params);

/**
 * Posterior probability that a letter of quality `h` was AI-assisted.
 *
 * # Safety
 * `params` must be a live handle and `out_value` valid for writes.
 */
enum SmStatus sm_access_posterior(const struct SmParams *params, double h, double *out_value);

/**
 * Expected productivity given letter quality `h`.
 *
 * # Safety
 * As [`sm_access_posterior`].
 */
enum SmStatus sm_expected_productivity(const struct SmParams *params, double h, double *out_value);

/**
 * Derivative of expected productivity in `h`.
 *
 * # Safety
 * As [`sm_access_posterior`].
 */
enum SmStatus sm_expected_productivity_slope(const struct SmParams *params,
                                             double h,
                                             double *out_value);

/**
 * Hiring probability against the outside option alone.
 *
 * # Safety
 * As [`sm_access_posterior`].
 */
enum SmStatus sm_hire_prob_binary(const struct SmParams *params, double h, double *out_value);

/**
 * Multinomial hiring probabilities of `len` applicants; `len` must equal the
 * parameters' applicant count. Writes `len` values to `out_probs`.
 *
 * # Safety
 * `h` and `out_probs` must point to `len` readable / writable doubles.
 */
enum SmStatus sm_hire_prob_conditional(const struct SmParams *params,
                                       const double *h,
                                       size_t len,
                                       double *out_probs);

/**
 * Fits TF-IDF on `len` documents (job posts and letters together).
 *
 * # Safety
 * `texts` must point to `len` NUL-terminated strings.
 */
enum SmStatus sm_corpus_new(const char *const *texts, size_t len, struct SmCorpus **out_corpus);

/**
 * Tailoring score of a letter against a job post, in [0, 1].
 *
 * # Safety
 * `corpus` must be live; the strings NUL-terminated; `out_score` writable.
 */
enum SmStatus sm_corpus_tailoring(const struct SmCorpus *corpus,
                                  const char *job_text,
                                  const char *letter_text,
                                  double *out_score);

/**
 * # Safety
 * `corpus` must come from `sm_corpus_new` and not be used afterwards. Null is ignored.
 */
void sm_corpus_free(struct SmCorpus *corpus);

/**
 * Generates a market from a named scenario (`default`, `null`,
 * `belief-switch`, ...). Zero sizes keep the scenario defaults.
 *
 * # Safety
 * `scenario` must be NUL-terminated; `out_dataset` writable.
 */
enum SmStatus sm_dataset_generate(const char *scenario,
                                  uint64_t seed,
                                  size_t n_workers,
                                  size_t n_jobs,
                                  struct SmDataset **out_dataset);

/**
 * Number of bids in the dataset; 0 for a null handle.
 *
 * # Safety
 * `dataset` must be live or null.
 */
size_t sm_dataset_n_bids(const struct SmDataset *dataset);

/**
 * Writes the bids as CSV to `path`.
 *
 * # Safety
 * `dataset` must be live; `path` NUL-terminated.
 */
enum SmStatus sm_dataset_write_bids(const struct SmDataset *dataset, const char *path);

/**
 * Intention-to-treat estimate on tailoring with the default controls and
 * worker clustering.
 *
 * # Safety
 * `dataset` must be live; `out_coef` and `out_se` writable.
 */
enum SmStatus sm_dataset_itt(const struct SmDataset *dataset, double *out_coef, double *out_se);

/**
 * # Safety
 * `dataset` must come from `sm_dataset_generate` and not be used afterwards. Null is ignored.
 */
void sm_dataset_free(struct SmDataset *dataset);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIGNALMARKET_H */
