/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the lrntf unmixing library.
 *
 * Every object is an opaque handle owned by the caller and released with the
 * matching *_free function (NULL is accepted). Functions return an lrntf_status;
 * on failure lrntf_last_error() holds a message for the calling thread.
 * Cube data is row-major over (row, col, band).
 */
#ifndef LRNTF_H
#define LRNTF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LRNTF_API __declspec(dllexport)
#elif defined(__GNUC__)
#define LRNTF_API __attribute__((visibility("default")))
#else
#define LRNTF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lrntf_status {
  LRNTF_OK = 0,
  LRNTF_ERR_CONFIG = 1,
  LRNTF_ERR_IO = 2,
  LRNTF_ERR_SOLVER = 3,
  LRNTF_ERR_SHAPE = 4,
  LRNTF_ERR_INDEX = 5,
  LRNTF_ERR_DOMAIN = 6,
  LRNTF_ERR_PARSE = 7,
  LRNTF_ERR_VALIDATION = 8,
  LRNTF_ERR_INTERNAL = 9
} lrntf_status;

LRNTF_API const char *lrntf_last_error(void);
LRNTF_API const char *lrntf_status_name(lrntf_status status);
LRNTF_API const char *lrntf_version(void);

typedef struct lrntf_cube lrntf_cube;
typedef struct lrntf_endmembers lrntf_endmembers;
typedef struct lrntf_scene lrntf_scene;
typedef struct lrntf_result lrntf_result;
typedef struct lrntf_rank_profile lrntf_rank_profile;

/* ---- cubes ---- */

LRNTF_API lrntf_status lrntf_cube_create(int64_t n_row, int64_t n_col, int64_t depth, lrntf_cube **out);
/* Copies n_row * n_col * depth values. */
LRNTF_API lrntf_status lrntf_cube_from_data(int64_t n_row, int64_t n_col, int64_t depth, const double *data,
                                            lrntf_cube **out);
LRNTF_API void lrntf_cube_free(lrntf_cube *cube);
LRNTF_API lrntf_status lrntf_cube_dims(const lrntf_cube *cube, int64_t *n_row, int64_t *n_col, int64_t *depth);
/* Borrowed pointer, valid until the cube is freed. */
LRNTF_API double *lrntf_cube_data(lrntf_cube *cube);
LRNTF_API lrntf_status lrntf_cube_read(const char *path, lrntf_cube **out);
LRNTF_API lrntf_status lrntf_cube_write(const lrntf_cube *cube, const char *path);
/* Slice k as an 8-bit PGM. lo >= hi means min/max of the slice. */
LRNTF_API lrntf_status lrntf_cube_write_gray_map(const lrntf_cube *cube, int64_t k, double lo, double hi,
                                                 const char *path);

/* ---- endmembers ---- */

LRNTF_API lrntf_status lrntf_endmembers_load(const char *csv_path, lrntf_endmembers **out);
/* First r columns of a spectral library CSV. */
LRNTF_API lrntf_status lrntf_endmembers_load_first(const char *csv_path, int64_t r, lrntf_endmembers **out);
/* Column-major bands x count matrix. */
LRNTF_API lrntf_status lrntf_endmembers_from_data(int64_t bands, int64_t count, const double *col_major,
                                                  lrntf_endmembers **out);
LRNTF_API void lrntf_endmembers_free(lrntf_endmembers *ems);
LRNTF_API lrntf_status lrntf_endmembers_dims(const lrntf_endmembers *ems, int64_t *bands, int64_t *count,
                                             int64_t *interactions);
LRNTF_API lrntf_status lrntf_endmembers_write(const lrntf_endmembers *ems, const char *csv_path);

/* ---- synthetic scenes ---- */

typedef enum lrntf_mix { LRNTF_MIX_GBM = 0, LRNTF_MIX_PPNM = 1, LRNTF_MIX_HALF = 2 } lrntf_mix;

typedef struct lrntf_synth_params {
  int64_t s;
  int64_t size; /* 0 means s * s */
  int64_t k;
  double purity_cap;
  lrntf_mix mix;
  double ppnm_b;
  double snr_db; /* INFINITY disables noise */
  uint64_t seed;
} lrntf_synth_params;

LRNTF_API void lrntf_synth_params_init(lrntf_synth_params *p);
LRNTF_API lrntf_status lrntf_scene_generate(const lrntf_synth_params *p, const lrntf_endmembers *ems,
                                            lrntf_scene **out);
LRNTF_API void lrntf_scene_free(lrntf_scene *scene);

typedef enum lrntf_scene_part {
  LRNTF_SCENE_ABUNDANCES = 0,
  LRNTF_SCENE_INTERACTIONS = 1,
  LRNTF_SCENE_GAMMA = 2,
  LRNTF_SCENE_CLEAN = 3,
  LRNTF_SCENE_NOISY = 4
} lrntf_scene_part;

/* Returns a new cube (a copy) owned by the caller. */
LRNTF_API lrntf_status lrntf_scene_get(const lrntf_scene *scene, lrntf_scene_part part, lrntf_cube **out);

/* ---- unmixing ---- */

LRNTF_API lrntf_status lrntf_fcls(const lrntf_cube *y, const lrntf_endmembers *ems, lrntf_cube **abundances);

typedef enum lrntf_projection { LRNTF_PROJ_ABS = 0, LRNTF_PROJ_CLAMP = 1 } lrntf_projection;
typedef enum lrntf_schedule { LRNTF_SCHED_PER_SLICE = 0, LRNTF_SCHED_PER_SWEEP = 1 } lrntf_schedule;

typedef struct lrntf_solver_params {
  double lambda1;
  double lambda2;
  double mu;
  int max_iter;
  double tol;
  int record_trace;
  lrntf_projection projection;
  lrntf_schedule schedule;
} lrntf_solver_params;

LRNTF_API void lrntf_solver_params_init(lrntf_solver_params *p);

/* init_b and truth may be NULL. init_b NULL starts the interactions at zero. */
LRNTF_API lrntf_status lrntf_solve(const lrntf_cube *y, const lrntf_endmembers *ems, const lrntf_solver_params *p,
                                   const lrntf_cube *init_a, const lrntf_cube *init_b, const lrntf_cube *truth,
                                   lrntf_result **out);
LRNTF_API void lrntf_result_free(lrntf_result *result);
LRNTF_API lrntf_status lrntf_result_abundances(const lrntf_result *result, lrntf_cube **out);
LRNTF_API lrntf_status lrntf_result_interactions(const lrntf_result *result, lrntf_cube **out);
LRNTF_API int lrntf_result_iterations(const lrntf_result *result);
LRNTF_API int lrntf_result_converged(const lrntf_result *result);
/* Copies up to cap RE values; returns the full trace length. */
LRNTF_API size_t lrntf_result_re_trace(const lrntf_result *result, double *buf, size_t cap);
LRNTF_API lrntf_status lrntf_result_write_trace(const lrntf_result *result, const char *csv_path);

/* ---- metrics ---- */

LRNTF_API lrntf_status lrntf_forward(const lrntf_cube *a, const lrntf_cube *b, const lrntf_endmembers *ems,
                                     lrntf_cube **y_hat);
LRNTF_API lrntf_status lrntf_rmse(const lrntf_cube *a_true, const lrntf_cube *a_est, double *out);
LRNTF_API lrntf_status lrntf_re(const lrntf_cube *y, const lrntf_cube *y_hat, double *out);
LRNTF_API lrntf_status lrntf_asam(const lrntf_cube *y, const lrntf_cube *y_hat, double *out);

/* Rank profile of slice k. */
LRNTF_API lrntf_status lrntf_rank_profile_compute(const lrntf_cube *cube, int64_t k, double energy,
                                                  lrntf_rank_profile **out);
LRNTF_API void lrntf_rank_profile_free(lrntf_rank_profile *p);
LRNTF_API int64_t lrntf_rank_profile_dim(const lrntf_rank_profile *p);
LRNTF_API size_t lrntf_rank_profile_singulars(const lrntf_rank_profile *p, double *buf, size_t cap);
/* Best rank-r approximation of slice k, written row-major into out (n_row * n_col). */
LRNTF_API lrntf_status lrntf_lowrank_approx(const lrntf_cube *cube, int64_t k, int64_t r, double *out);

/* ---- experiments ---- */

LRNTF_API size_t lrntf_preset_count(void);
LRNTF_API const char *lrntf_preset_name(size_t i);
LRNTF_API const char *lrntf_preset_description(size_t i);
/* Returns the preset's JSON config; release with lrntf_string_free. */
LRNTF_API lrntf_status lrntf_preset_config(const char *name, char **json_out);
/* Runs a full experiment from a JSON config. out_dir overrides "outputs" when
 * non-NULL. results_json (optional) receives the results document. */
LRNTF_API lrntf_status lrntf_run_experiment(const char *config_json, const char *out_dir, char **results_json);
LRNTF_API void lrntf_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif /* LRNTF_H */
