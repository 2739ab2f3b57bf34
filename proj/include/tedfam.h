/* C API of the tedfam library: matrix factor model estimation, bilinear
 * baseline, scenario simulation, and evaluation metrics behind opaque
 * handles. All matrices cross this boundary as contiguous row-major
 * double buffers; series buffers hold T consecutive p1 x p2 blocks.
 *
 * Every fallible function returns a tedfam_status; on failure a
 * thread-local message is available from tedfam_last_error(). Returned
 * const pointers borrow from their handle and stay valid until the handle
 * is freed.
 */

#ifndef TEDFAM_H
#define TEDFAM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tedfam_status {
  TEDFAM_OK = 0,
  TEDFAM_ERR_IO = 2,         /* file I/O and parse failures */
  TEDFAM_ERR_VALIDATION = 3, /* invalid arguments, shapes, degenerate input */
  TEDFAM_ERR_NUMERICAL = 4   /* convergence failures, rank deficiency */
} tedfam_status;

const char* tedfam_version(void);
/* Message for the last failing call on this thread; empty if none. */
const char* tedfam_last_error(void);
/* Frees buffers allocated by the library (see tedfam_matrix_read_csv). */
void tedfam_free(void* ptr);

/* ---------------------------------------------------------------------- */
/* Matrix series                                                          */
/* ---------------------------------------------------------------------- */

typedef struct tedfam_series tedfam_series;

/* Copies T*p1*p2 doubles (row-major blocks). Values must be finite,
 * T >= 1, p1 >= 2, p2 >= 2. */
tedfam_status tedfam_series_create(int64_t num_obs, int64_t rows, int64_t cols,
                                   const double* values, tedfam_series** out);
/* Reads/writes the MATSERIES v1 text format. */
tedfam_status tedfam_series_read(const char* path, tedfam_series** out);
tedfam_status tedfam_series_write(const tedfam_series* series, const char* path);
void tedfam_series_free(tedfam_series* series);

int64_t tedfam_series_num_obs(const tedfam_series* series);
int64_t tedfam_series_rows(const tedfam_series* series);
int64_t tedfam_series_cols(const tedfam_series* series);
const double* tedfam_series_values(const tedfam_series* series);

/* ---------------------------------------------------------------------- */
/* sPCA fit                                                               */
/* ---------------------------------------------------------------------- */

typedef struct tedfam_fit tedfam_fit;

typedef struct tedfam_fit_options {
  int64_t k1;       /* 0 selects the rank by the eigenvalue-ratio rule */
  int64_t k2;       /* 0 selects the rank by the eigenvalue-ratio rule */
  int64_t k_max;    /* upper bound for auto selection; 0 = min(20, p/2, p-1) */
  int center;      /* subtract the per-entry temporal mean before fitting */
  int with_signal; /* materialize the reconstructed signal series */
  int threads;     /* moment-accumulation workers; result is identical for any value */
} tedfam_fit_options;

/* Fills the defaults: auto ranks, no centering, signal on, one thread. */
void tedfam_fit_options_init(tedfam_fit_options* options);

tedfam_status tedfam_fit_series(const tedfam_series* series, const tedfam_fit_options* options,
                                tedfam_fit** out);
void tedfam_fit_free(tedfam_fit* fit);

int64_t tedfam_fit_k1(const tedfam_fit* fit);
int64_t tedfam_fit_k2(const tedfam_fit* fit);
/* Loadings, row-major: R is p1 x k1, C is p2 x k2. */
const double* tedfam_fit_loading_r(const tedfam_fit* fit);
const double* tedfam_fit_loading_c(const tedfam_fit* fit);
/* Retained moment eigenvalues (k1 / k2 entries, descending). */
const double* tedfam_fit_eigvals_row(const tedfam_fit* fit);
const double* tedfam_fit_eigvals_col(const tedfam_fit* fit);
/* Full moment spectra (p1 / p2 entries, descending). */
const double* tedfam_fit_spectrum_row(const tedfam_fit* fit);
const double* tedfam_fit_spectrum_col(const tedfam_fit* fit);
/* Factor scores, row-major blocks: Z is T x (k1 x k2), E is T x (p2 x k1),
 * F is T x (p1 x k2). */
const double* tedfam_fit_scores_z(const tedfam_fit* fit);
const double* tedfam_fit_scores_e(const tedfam_fit* fit);
const double* tedfam_fit_scores_f(const tedfam_fit* fit);
/* Borrowed signal series; fails if the fit ran with with_signal = 0. */
tedfam_status tedfam_fit_signal(const tedfam_fit* fit, const tedfam_series** out);

/* Bilinear baseline from the shared fit loadings. The caller owns *out. */
tedfam_status tedfam_bilinear_signal(const tedfam_fit* fit, const tedfam_series* series,
                                     tedfam_series** out);
/* Writes T*k1*k2 doubles (row-major blocks) into `out`. */
tedfam_status tedfam_bilinear_scores(const tedfam_fit* fit, const tedfam_series* series,
                                     double* out);

/* ---------------------------------------------------------------------- */
/* Scenario simulation                                                    */
/* ---------------------------------------------------------------------- */

enum {
  TEDFAM_SCENARIO_I = 1,
  TEDFAM_SCENARIO_II = 2,
  TEDFAM_SCENARIO_III = 3,
  TEDFAM_SCENARIO_IV = 4
};

typedef struct tedfam_scenario_config {
  int scenario; /* TEDFAM_SCENARIO_* */
  int64_t num_obs;
  int64_t rows;
  int64_t cols;
  int64_t k1;
  int64_t k2;
  double phi;   /* AR coefficient of vec(Z_t) */
  double psi;   /* AR coefficient of vec(F_t) */
  double gamma; /* AR coefficient of vec(E_t) */
  uint64_t seed;
  int with_noise; /* 0 suppresses the noise term (test hook) */
} tedfam_scenario_config;

/* Fills scenario defaults: k1 = k2 = 3 and the scenario's AR coefficients
 * ((0,0,0) for I/II, (0.6,0.8,0.8) for III/IV). */
tedfam_status tedfam_scenario_config_init(int scenario, int64_t num_obs, int64_t rows,
                                          int64_t cols, tedfam_scenario_config* config);

typedef struct tedfam_dataset tedfam_dataset;

tedfam_status tedfam_simulate(const tedfam_scenario_config* config, tedfam_dataset** out);
void tedfam_dataset_free(tedfam_dataset* dataset);

const tedfam_series* tedfam_dataset_observations(const tedfam_dataset* dataset);
const tedfam_series* tedfam_dataset_truth_signal(const tedfam_dataset* dataset);
const tedfam_series* tedfam_dataset_noise(const tedfam_dataset* dataset);
/* Truth loadings, row-major. */
const double* tedfam_dataset_truth_r(const tedfam_dataset* dataset);
const double* tedfam_dataset_truth_c(const tedfam_dataset* dataset);
/* Truth factor blocks, row-major; zero for bilinear scenarios (E, F). */
const double* tedfam_dataset_truth_z(const tedfam_dataset* dataset);
const double* tedfam_dataset_truth_e(const tedfam_dataset* dataset);
const double* tedfam_dataset_truth_f(const tedfam_dataset* dataset);

/* ---------------------------------------------------------------------- */
/* Metrics                                                                */
/* ---------------------------------------------------------------------- */

/* Column-space distance of two p x k matrices (row-major). */
tedfam_status tedfam_space_distance(const double* a, const double* b, int64_t rows, int64_t cols,
                                    double* out);
/* sqrt(mean squared entry difference) over the whole series. */
tedfam_status tedfam_rmse(const tedfam_series* estimated, const tedfam_series* reference,
                          double* out);
/* Per-observation PSNR mean; +infinity on exact reconstruction. If
 * per_observation is non-null it receives T values. */
tedfam_status tedfam_psnr_mean(const tedfam_series* x, const tedfam_series* x_hat, double* out,
                               double* per_observation);

enum {
  TEDFAM_CORRELATION_ROW = 0,
  TEDFAM_CORRELATION_COLUMN = 1,
  TEDFAM_CORRELATION_VECTORIZED = 2
};

tedfam_status tedfam_correlation_distance(const tedfam_series* a, const tedfam_series* b,
                                          int mode, double* out);

/* Eigenvalue-ratio rank estimate from a descending nonnegative spectrum. */
tedfam_status tedfam_estimate_rank(const double* spectrum, int64_t length, int64_t k_max,
                                   int64_t* out);

/* Varimax rotation of a p x k loading (row-major). `rotated` receives p*k
 * doubles, `rotation` (optional) k*k doubles. */
tedfam_status tedfam_varimax(const double* loading, int64_t rows, int64_t cols,
                             int kaiser_normalize, double* rotated, double* rotation);

/* ---------------------------------------------------------------------- */
/* Small-matrix CSV (the loading/score/spectrum file format)              */
/* ---------------------------------------------------------------------- */

/* The caller frees *values with tedfam_free. */
tedfam_status tedfam_matrix_read_csv(const char* path, double** values, int64_t* rows,
                                     int64_t* cols);
tedfam_status tedfam_matrix_write_csv(const char* path, const double* values, int64_t rows,
                                      int64_t cols);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TEDFAM_H */
