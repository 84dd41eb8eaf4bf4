/* expanderlab — C API for the equivariant harmonic-map-heat-flow lab.
 *
 * All entry points return exl_status; results live behind opaque handles
 * released with the matching *_free call. exl_last_error() returns a
 * thread-local message for the most recent failure.
 */
#ifndef EXPANDERLAB_H
#define EXPANDERLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum exl_status {
  EXL_OK = 0,
  EXL_ERR_INVALID_ARGUMENT = 1,
  EXL_ERR_STEP_UNDERFLOW = 2,
  EXL_ERR_NONFINITE = 3,
  EXL_ERR_INTEGRATION = 4,
  EXL_ERR_NO_BRACKET = 5,
  EXL_ERR_POSITIVITY_LOST = 6,
  EXL_ERR_BAD_FIT = 7,
  EXL_ERR_RANGE = 8,
  EXL_ERR_LINEAR_SOLVE = 9,
  EXL_ERR_NEWTON_DIVERGENCE = 10,
  EXL_ERR_DOMAIN = 11,
  EXL_ERR_UNRESOLVED_REGION = 12,
  EXL_ERR_UNKNOWN = 99
} exl_status;

const char* exl_status_name(exl_status status);
const char* exl_last_error(void);
const char* exl_version(void);
void exl_set_max_threads(int n);

/* ------------------------------------------------------------------ */
/* Expander profiles                                                   */
/* ------------------------------------------------------------------ */

typedef struct exl_profile exl_profile;

#define EXL_POLE_NORTH 0
#define EXL_POLE_SOUTH 1

exl_status exl_profile_solve(int d, double alpha, int pole, double rho_max,
                             double tol, exl_profile** out);
/* Bisection to the target limit on the requested crossing-count branch. */
exl_status exl_profile_shoot(int d, double ell, int branch, double tol,
                             double rho_max, exl_profile** out,
                             double* alpha_out);
exl_status exl_profile_south(int d, double ell, double tol, double rho_max,
                             exl_profile** out);
void exl_profile_free(exl_profile* p);

double exl_profile_alpha(const exl_profile* p);
double exl_profile_psi_inf(const exl_profile* p);
double exl_profile_psi_inf_error(const exl_profile* p);
int exl_profile_crossings(const exl_profile* p);
int exl_profile_nodes(const exl_profile* p);
exl_status exl_profile_data(const exl_profile* p, double* rho, double* psi,
                            double* dpsi);
exl_status exl_profile_eval(const exl_profile* p, double rho, double* psi,
                            double* dpsi);

/* ------------------------------------------------------------------ */
/* Branch scans and critical parameters                                */
/* ------------------------------------------------------------------ */

typedef struct exl_scan exl_scan;

exl_status exl_scan_branches(int d, double lo, double hi, int n,
                             double rho_max, double tol, exl_scan** out);
void exl_scan_free(exl_scan* s);
int exl_scan_size(const exl_scan* s);
exl_status exl_scan_row(const exl_scan* s, int i, double* alpha, double* limit,
                        int* crossings);

/* alpha0/alpha* by bisection; infinity sentinels for d >= 7. */
exl_status exl_critical_params(int d, double tol, double rho_max,
                               double* alpha0, double* alpha_star,
                               double* ell_star, double* delta_star);

/* ------------------------------------------------------------------ */
/* Companion linear equations along a profile                          */
/* ------------------------------------------------------------------ */

typedef struct exl_variation exl_variation;

#define EXL_VARIATION_PHI 0
#define EXL_VARIATION_UNDERLINE 1
#define EXL_VARIATION_W 2
#define EXL_VARIATION_Y 3

exl_status exl_variation_solve(const exl_profile* p, int kind, double kappa,
                               exl_variation** out);
void exl_variation_free(exl_variation* v);
double exl_variation_limit(const exl_variation* v);
double exl_variation_min(const exl_variation* v);
int exl_variation_positive(const exl_variation* v);
int exl_variation_nodes(const exl_variation* v);
exl_status exl_variation_data(const exl_variation* v, double* rho, double* u,
                              double* du);

exl_status exl_kappa_threshold(const exl_profile* p, double tol, double* lo,
                               double* hi);

/* ------------------------------------------------------------------ */
/* PDE experiments                                                     */
/* ------------------------------------------------------------------ */

typedef struct exl_run exl_run;

typedef struct exl_grid_spec {
  double r_max;
  double r1;      /* first node of the graded grid */
  double cap;     /* spacing cap */
  int uniform;    /* nonzero: uniform grid with `cells` cells */
  int cells;
} exl_grid_spec;

typedef struct exl_sim_spec {
  double dt;
  double theta;          /* 0.5 Crank-Nicolson .. 1 implicit Euler */
  double t_begin;
  double t_end;
  int snapshot_count;
  double delta_start;    /* launch time for singular data */
} exl_sim_spec;

#define EXL_H0_CONSTANT 0
#define EXL_H0_RAMP 1 /* ell + amp * min(r,1) * (2 - min(r,1)) */

/* Expander tracking over the time span, with a refined companion run;
 * metrics: tracking_sup, disc_err, refine_ratio, within_factor. */
exl_status exl_pde_expander_run(int d, double ell, const exl_grid_spec* grid,
                                const exl_sim_spec* sim, exl_run** out);

/* North and south evolutions from the same data at t = delta_start. */
exl_status exl_pde_pair_run(int d, double ell, int h0_kind, double h0_param,
                            const exl_grid_spec* grid, const exl_sim_spec* sim,
                            double zeta_epsilon, exl_run** out);

/* Perturbed self-similar run against an unperturbed reference; metrics
 * include the fitted decay rate. */
exl_status exl_pde_selfsim_run(int d, double alpha, double perturb_amp,
                               const exl_grid_spec* grid,
                               const exl_sim_spec* sim, double fit_lo,
                               double fit_hi, exl_run** out);

/* Ginzburg-Landau selection against the north reference run. Snapshots of
 * each epsilon run carry (h, v, w) columns. */
exl_status exl_gl_select_run(int d, double ell, const double* epsilons,
                             int n_eps, const exl_grid_spec* grid,
                             const exl_sim_spec* sim, exl_run** out);

void exl_run_free(exl_run* r);

int exl_run_metric_count(const exl_run* r);
const char* exl_run_metric_name(const exl_run* r, int i);
double exl_run_metric_value(const exl_run* r, int i);

int exl_run_series_count(const exl_run* r);
const char* exl_run_series_label(const exl_run* r, int k);
int exl_run_grid_size(const exl_run* r, int k);
exl_status exl_run_grid(const exl_run* r, int k, double* out);
int exl_run_snapshot_count(const exl_run* r, int k);
double exl_run_snapshot_time(const exl_run* r, int k, int j);
exl_status exl_run_snapshot(const exl_run* r, int k, int j, double* h);
/* v/w may be NULL for runs without equivariant components. */
exl_status exl_run_snapshot_vw(const exl_run* r, int k, int j, double* v,
                               double* w);
int exl_run_has_vw(const exl_run* r, int k);

/* ------------------------------------------------------------------ */
/* Verification suites                                                 */
/* ------------------------------------------------------------------ */

typedef struct exl_report exl_report;

exl_status exl_verify(const char* suite, exl_report** out);
void exl_report_free(exl_report* r);
int exl_report_size(const exl_report* r);
const char* exl_report_row_name(const exl_report* r, int i);
double exl_report_row_value(const exl_report* r, int i);
double exl_report_row_threshold(const exl_report* r, int i);
int exl_report_row_pass(const exl_report* r, int i);
int exl_report_passed(const exl_report* r);

/* Uniqueness-mechanism constant 4(d-1)/(d-2)^2. */
double exl_hardy_ratio(int d);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EXPANDERLAB_H */
