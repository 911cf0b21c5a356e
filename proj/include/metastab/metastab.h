/* metastab: MAML and distributed MAML on strongly convex synthetic tasks,
 * with stability, generalization and distribution-shift measurements.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Functions return ms_status; on failure
 * ms_last_error() describes the problem for the calling thread. Strings
 * returned through char** are released with ms_string_free. */
#ifndef METASTAB_METASTAB_H
#define METASTAB_METASTAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(METASTAB_BUILDING_LIBRARY)
#define MS_API __attribute__((visibility("default")))
#else
#define MS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ms_status {
  MS_OK = 0,
  MS_ERR_INVALID_ARGUMENT = 1,
  MS_ERR_INVALID_DIMENSION = 2,
  MS_ERR_INVALID_SIZE = 3,
  MS_ERR_INVALID_PERTURBATION = 4,
  MS_ERR_DIMENSION_MISMATCH = 5,
  MS_ERR_EMPTY_BATCH = 6,
  MS_ERR_INVALID_WEIGHTS = 7,
  MS_ERR_DIVERGENCE = 8,
  MS_ERR_NON_CONVERGENCE = 9,
  MS_ERR_PREMISE = 10,
  MS_ERR_NOT_RECORDED = 11,
  MS_ERR_UNSUPPORTED = 12,
  MS_ERR_IO = 13,
  MS_ERR_PARSE = 14,
  MS_ERR_INTERNAL = 15
} ms_status;

MS_API const char* ms_version(void);
MS_API const char* ms_status_name(ms_status status);
/* Message of the last failure on this thread; empty after a success. */
MS_API const char* ms_last_error(void);
/* Coordinates of the last divergence on this thread; -1 where not applicable. */
MS_API void ms_last_divergence(long* round, long* user, long* local_step);
MS_API void ms_string_free(char* s);
/* Git-style blob id of arbitrary bytes; `size` must be at least 41. */
MS_API ms_status ms_content_hash(const char* data, size_t len, char* buffer, size_t size);

/* ---- task collections ---- */

typedef struct ms_collection ms_collection;

typedef struct ms_family_params {
  int dim;
  double feature_cov_scale;
  double noise_var;
  uint64_t seed;
} ms_family_params;

MS_API void ms_family_params_default(ms_family_params* params);
MS_API ms_status ms_collection_generate(const ms_family_params* family, size_t m, size_t n, ms_collection** out);
/* Loaded collections carry samples only; operations that need the task laws
 * report MS_ERR_UNSUPPORTED on them. */
MS_API ms_status ms_collection_load(const char* path, ms_collection** out);
MS_API ms_status ms_collection_save(const ms_collection* collection, const char* path);
/* 40 hex characters plus terminator; `size` must be at least 41. */
MS_API ms_status ms_collection_hash(const ms_collection* collection, char* buffer, size_t size);
MS_API ms_status ms_collection_shape(const ms_collection* collection, size_t* dim, size_t* n, size_t* m);
MS_API int ms_collection_has_laws(const ms_collection* collection);
MS_API void ms_collection_free(ms_collection* collection);

/* ---- loss constants ---- */

typedef struct ms_constants {
  double mu;
  double smooth;
  double grad_bound;
  double hess_lip;
  double value_bound;
} ms_constants;

/* Regularized quadratic loss over the ball of `radius`. Uses the task laws
 * when present and the stored samples otherwise. */
MS_API ms_status ms_constants_compute(const ms_collection* collection, double reg, double radius, int probes,
                                      uint64_t seed, ms_constants* out);
MS_API double ms_admissible_alpha(const ms_constants* constants);
/* Smoothness of the adapted objective; its inverse is the default stepsize cap. */
MS_API double ms_meta_smoothness(const ms_constants* constants, double alpha);
MS_API double ms_stepsize(size_t t, double beta_cap, double mu);

/* ---- training ---- */

typedef struct ms_train_params {
  size_t k;
  size_t b;
  size_t r;
  size_t t_max;
  double alpha;
  double beta_cap;
  double reg;
  /* Ball radius around the origin; INFINITY disables projection. */
  double radius;
  uint64_t seed;
  int record_loss;
  size_t trace_subsets;
  /* Federated only. */
  size_t tau;
  int verbose_trace;
} ms_train_params;

typedef struct ms_output ms_output;

MS_API void ms_train_params_default(ms_train_params* params);
MS_API ms_status ms_train(const ms_collection* collection, const ms_train_params* params, ms_output** out);
MS_API ms_status ms_fed_train(const ms_collection* collection, const ms_train_params* params, ms_output** out);
MS_API size_t ms_output_dim(const ms_output* output);
/* Either pointer may be NULL; each non-NULL one receives `dim` values. */
MS_API ms_status ms_output_iterates(const ms_output* output, double* last, double* averaged, size_t dim);
MS_API ms_status ms_output_hash(const ms_output* output, char* buffer, size_t size);
/* Iterates as text (last, then averaged), one line each. */
MS_API ms_status ms_output_text(const ms_output* output, char** text);
/* CSV `t,beta_t,fhat,u_t,v_t`. */
MS_API ms_status ms_output_trace_csv(const ms_output* output, char** csv);
/* CSV `round,user,local_step,beta_t,norm`; federated runs with verbose_trace only. */
MS_API ms_status ms_output_local_trace_csv(const ms_output* output, char** csv);
/* One CSV row `test,gen,train,emp_min,pop_min,se_test,se_gen` for the averaged iterate. */
MS_API ms_status ms_output_error_report(const ms_output* output, const ms_collection* collection,
                                        const ms_train_params* params, size_t mc_population, char** csv_row);
/* CSV `user,loss,se` of post-adaptation population losses, last row `mean`. */
MS_API ms_status ms_output_personalization(const ms_output* output, const ms_collection* collection,
                                           const ms_train_params* params, size_t mc_population, char** csv);
MS_API void ms_output_free(ms_output* output);

/* ---- reports: stability, shift, figure sweeps ---- */

typedef struct ms_report ms_report;

typedef struct ms_stability_params {
  ms_family_params family;
  ms_train_params train;
  /* Grid of (m, n) pairs; r = 0 in `train` selects every task each round. */
  const size_t* grid_m;
  const size_t* grid_n;
  size_t grid_len;
  size_t trials;
  size_t probes;
  double envelope_widen;
  double leading_const;
  /* Replaced inner points per trial; negative means K. */
  long perturb_k;
  int constant_probes;
  /* Recorded in the report summary; NULL for none. */
  const char* input_hash;
} ms_stability_params;

/* CLONE makes every seen task a copy of the unseen one. */
typedef enum ms_unseen_mode { MS_UNSEEN_SIMILAR = 0, MS_UNSEEN_DISSIMILAR = 1, MS_UNSEEN_CLONE = 2 } ms_unseen_mode;

typedef struct ms_shift_params {
  ms_family_params family;
  size_t m;
  size_t n;
  size_t k;
  double alpha;
  double reg;
  double radius;
  ms_unseen_mode unseen;
  size_t tv_samples;
  /* Optional mixture weights over the m seen tasks (NULL for none). */
  const double* weights;
  double leading_const;
  int constant_probes;
  uint64_t seed;
} ms_shift_params;

typedef struct ms_figures_params {
  ms_family_params family;
  const size_t* ms;
  size_t ms_len;
  const size_t* ns;
  size_t ns_len;
  /* Bit set: 1 recurring, 2 new_similar, 4 new_dissimilar. */
  unsigned figures;
  size_t reps;
  double reg;
  double alpha;
  size_t k;
  size_t b;
  size_t r;
  size_t t_max;
  double beta_cap;
  double radius;
  size_t mc_population;
  size_t population_multiplier;
  uint64_t seed;
} ms_figures_params;

MS_API void ms_stability_params_default(ms_stability_params* params);
MS_API void ms_shift_params_default(ms_shift_params* params);
MS_API void ms_figures_params_default(ms_figures_params* params);

MS_API ms_status ms_stability_run(const ms_stability_params* params, ms_report** out);
MS_API ms_status ms_shift_run(const ms_shift_params* params, ms_report** out);
MS_API ms_status ms_figures_run(const ms_figures_params* params, ms_report** out);

/* Named CSV sections: "main" for every report, "trends" for figure sweeps. */
MS_API ms_status ms_report_csv(const ms_report* report, const char* section, char** csv);
/* Named scalar summaries, e.g. "gamma_hat", "fitted_slope", "d_bound". */
MS_API ms_status ms_report_value(const ms_report* report, const char* key, double* value);
/* Resolved constants used by the run. */
MS_API ms_status ms_report_constants(const ms_report* report, ms_constants* out);
MS_API void ms_report_free(ms_report* report);

#ifdef __cplusplus
}
#endif

#endif /* METASTAB_METASTAB_H */
