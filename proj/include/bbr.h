/*
 * bbr — inconclusive-aware error-rate analysis for forensic black box studies.
 *
 * C API of the shared library. All functions return a bbr_status; on any
 * failure bbr_last_error() gives a thread-local description. Objects are
 * opaque handles released with the matching *_free function. Strings
 * returned through char** out-parameters are owned by the caller and freed
 * with bbr_string_free.
 */
#ifndef BBR_H
#define BBR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BBR_API __declspec(dllexport)
#else
#define BBR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bbr_status {
  BBR_OK = 0,
  BBR_ERR_IO = 1,
  BBR_ERR_MISSING_COLUMN = 2,
  BBR_ERR_UNMAPPED_LABEL = 3,
  BBR_ERR_INCONSISTENT_GROUND_TRUTH = 4,
  BBR_ERR_EMPTY_DATASET = 5,
  BBR_ERR_ALL_RESPONSES_REMOVED = 6,
  BBR_ERR_MISSING_BASIS = 7,
  BBR_ERR_UNDEFINED_RATIO = 8,
  BBR_ERR_DOMAIN = 9,
  BBR_ERR_INVALID_ARGUMENT = 10,
  BBR_ERR_MISSING_PREREQUISITE = 11,
  BBR_ERR_NUMERIC = 12,
  BBR_ERR_INTERNAL = 13
} bbr_status;

typedef struct bbr_mapping bbr_mapping;
typedef struct bbr_dataset bbr_dataset;
typedef struct bbr_draws bbr_draws;

/* ---- library ---------------------------------------------------------- */

BBR_API const char* bbr_version(void);

/* Thread-local message for the most recent failure on this thread. */
BBR_API const char* bbr_last_error(void);

BBR_API void bbr_string_free(char* s);

/* ---- conclusion mappings ---------------------------------------------- */

/* name: "ulery2011", "monson2022", or "canonical" (identity mapping used by
 * simulated studies). */
BBR_API bbr_status bbr_mapping_builtin(const char* name, bbr_mapping** out);
BBR_API bbr_status bbr_mapping_read(const char* path, bbr_mapping** out);
BBR_API void bbr_mapping_free(bbr_mapping* mapping);

/* ---- datasets ---------------------------------------------------------- */

/* Parse + validate a response CSV. Emits the validation log to stderr when
 * verbose is nonzero. */
BBR_API bbr_status bbr_dataset_read_csv(const char* path, const bbr_mapping* mapping,
                                        int verbose, bbr_dataset** out);

/* Keep the first response per (examiner, item) pair. */
BBR_API bbr_status bbr_dataset_deduplicate(const bbr_dataset* dataset, bbr_dataset** out);

/* pool_unsuitable: 1 = relabel Unsuitable as Inconclusive, 0 = drop them.
 * ground_truth_filter: -1 = keep both, 0 = SS only, 1 = DS only. */
BBR_API bbr_status bbr_dataset_apply_policy(const bbr_dataset* dataset,
                                            int pool_unsuitable, int ground_truth_filter,
                                            bbr_dataset** out);

/* Subset to the examiners of one elimination-basis group. group: 0 = made
 * individual eliminations, 1 = did not. auxiliary may be NULL. */
BBR_API bbr_status bbr_dataset_filter_group(const bbr_dataset* dataset,
                                            const bbr_dataset* auxiliary, int group,
                                            bbr_dataset** out);

BBR_API bbr_status bbr_dataset_counts(const bbr_dataset* dataset, uint64_t* n_examiners,
                                      uint64_t* n_items, uint64_t* n_responses);

/* JSON object: roster sizes plus responses per ground-truth x category cell
 * and the accumulated validation log. */
BBR_API bbr_status bbr_dataset_summary_json(const bbr_dataset* dataset, char** out);

/* JSON object: examiner id -> "MadeIndividualElims" | "NoIndividualElims". */
BBR_API bbr_status bbr_groups_json(const bbr_dataset* dataset,
                                   const bbr_dataset* auxiliary, char** out);

BBR_API void bbr_dataset_free(bbr_dataset* dataset);

/* ---- error rates ------------------------------------------------------- */

/* cells out: a,b,c,d,e,f per the summary table. */
BBR_API bbr_status bbr_contingency(const bbr_dataset* dataset, uint64_t cells[6]);

/* All four inconclusive-handling options for this dataset, CSV / JSON. */
BBR_API bbr_status bbr_rates_csv(const bbr_dataset* dataset, const char* group_label,
                                 char** out);
BBR_API bbr_status bbr_rates_json(const bbr_dataset* dataset, const char* group_label,
                                  char** out);

/* Conclusive-vs-not 2x2 with P(SS | not conclusive), JSON. */
BBR_API bbr_status bbr_conclusive_json(const bbr_dataset* dataset, char** out);

BBR_API bbr_status bbr_failure_rate(double inc_correct, double inc_incorrect,
                                    double ratio, double* out);

/* ---- variance decomposition -------------------------------------------- */

/* JSON row object with examiner/item proportions, variances under both the
 * n-1 and n conventions, and the ratio (null when undefined). The labels
 * are echoed into the row for table assembly. */
BBR_API bbr_status bbr_decompose_json(const bbr_dataset* dataset,
                                      const char* ground_truth_label,
                                      const char* group_label, char** out);

/* Serialize a JSON array of row objects (as produced by the corresponding
 * *_json call) into the canonical CSV table. */
BBR_API bbr_status bbr_decomp_rows_csv(const char* rows_json, char** out);
BBR_API bbr_status bbr_ppc_rows_csv(const char* rows_json, char** out);
BBR_API bbr_status bbr_failure_rows_csv(const char* rows_json, char** out);

/* ---- model fitting ------------------------------------------------------ */

/* config_json keys (all optional): chains, iterations, warmup, seed,
 * target_accept, hyperprior_scale, center_items, threads, progress,
 * hyper_updates_per_sweep. */
BBR_API bbr_status bbr_fit(const bbr_dataset* dataset, const char* config_json,
                           bbr_draws** out);

BBR_API bbr_status bbr_draws_summary_json(const bbr_draws* draws, double level,
                                          char** out);
BBR_API bbr_status bbr_draws_summary_csv(const bbr_draws* draws, double level, char** out);
BBR_API bbr_status bbr_draws_diagnostics_json(const bbr_draws* draws, char** out);

BBR_API bbr_status bbr_draws_save_csv(const bbr_draws* draws, const char* path);
BBR_API bbr_status bbr_draws_load_csv(const char* path, bbr_draws** out);
BBR_API bbr_status bbr_draws_save_cache(const bbr_draws* draws, const char* path);
BBR_API bbr_status bbr_draws_load_cache(const char* path, bbr_draws** out);
BBR_API void bbr_draws_free(bbr_draws* draws);

/* ---- posterior analysis ------------------------------------------------- */

/* basis: 0 = scale parameters, 1 = variances. JSON {point, lower, upper, basis}. */
BBR_API bbr_status bbr_model_ratio_json(const bbr_draws* draws, int basis, char** out);

/* Posterior predictive check of the empirical ratio over the dataset's
 * actual assignment. JSON {predicted, lower, upper, observed, ...}. */
BBR_API bbr_status bbr_predictive_ratio_json(const bbr_draws* draws,
                                             const bbr_dataset* dataset, int n_sims,
                                             uint64_t seed,
                                             const char* ground_truth_label,
                                             const char* group_label, char** out);

/* Failure-rate row for one ground truth (0 = SS, 1 = DS): combines the
 * rates dataset's contingency table with the observed ratio of the
 * decomposition dataset and the model ratio of the draws. */
BBR_API bbr_status bbr_failure_row_json(const bbr_dataset* rates_dataset,
                                        const bbr_dataset* decomp_dataset,
                                        const bbr_draws* draws, int ground_truth,
                                        const char* group_label, int basis, char** out);

/* ---- simulation --------------------------------------------------------- */

/* params_json: the documented parameter layout (examiner_ids, theta,
 * item_ids, item_ground_truth, zeta, hypers, optional assignment). Returns
 * a response CSV ingestible with the "canonical" mapping. */
BBR_API bbr_status bbr_simulate_csv(const char* params_json, uint64_t seed, char** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BBR_H */
