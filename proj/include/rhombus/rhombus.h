#ifndef RHOMBUS_RHOMBUS_H
#define RHOMBUS_RHOMBUS_H

#include <stddef.h>

#if defined(_WIN32)
#define RHB_API __declspec(dllexport)
#else
#define RHB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rhb_status {
  RHB_OK = 0,
  RHB_ERR_DOMAIN = 1,
  RHB_ERR_SINGULAR = 2,
  RHB_ERR_STEP_SIZE = 3,
  RHB_ERR_TOLERANCE = 4,
  RHB_ERR_STEP_FAILURE = 5,
  RHB_ERR_BRACKETING = 6,
  RHB_ERR_NONCONVERGENCE = 7,
  RHB_ERR_IO = 8,
  RHB_ERR_CONFIG = 9,
  RHB_ERR_NULL_ARGUMENT = 10,
  RHB_ERR_INTERNAL = 11
} rhb_status;

/* Message for the last failing call on this thread ("" if none). */
RHB_API const char* rhb_last_error(void);
RHB_API const char* rhb_status_name(rhb_status status);
RHB_API const char* rhb_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
RHB_API void rhb_string_free(char* s);

/* ---- central configuration and coefficients ---- */

typedef struct rhb_coefficients {
  double u;
  double phi1, phi2, psi1, psi2;
  double dphi_diff; /* d(phi2 - phi1)/du */
  double dpsi_diff; /* d(psi1 - psi2)/du */
} rhb_coefficients;

typedef struct rhb_critical_params {
  double u1, u2, u3, u3_bar, beta1;
  double phi_diff_u1, phi_sum_u1, psi_prod_u3, max_residual;
  double e_star_27_4, e_star_beta1;
} rhb_critical_params;

RHB_API rhb_status rhb_coefficients_at(double u, rhb_coefficients* out);
RHB_API rhb_status rhb_critical(double tol, rhb_critical_params* out);
/* phi, psi, derivatives, K/T at (e, t = 0) and critical parameters. */
RHB_API rhb_status rhb_coefficients_json(double u, double e, char** out_json);
/* Configuration, masses, Hessian blocks and reduction matrix at u. */
RHB_API rhb_status rhb_configuration_json(double u, char** out_json);

/* ---- monodromy ---- */

typedef struct rhb_monodromy rhb_monodromy;

/* block: "kepler", "xi", "eta" or "full". */
RHB_API rhb_status rhb_monodromy_compute(const char* block, double u, double e,
                                         double rtol, double atol,
                                         rhb_monodromy** out);
RHB_API void rhb_monodromy_free(rhb_monodromy* m);
RHB_API int rhb_monodromy_dimension(const rhb_monodromy* m);
/* Row-major dim x dim entries of gamma(2 pi). */
RHB_API rhb_status rhb_monodromy_matrix(const rhb_monodromy* m, double* out);
/* dim eigenvalues, sorted by modulus then imaginary part. */
RHB_API rhb_status rhb_monodromy_eigenvalues(const rhb_monodromy* m,
                                             double* re, double* im);
RHB_API double rhb_monodromy_residual(const rhb_monodromy* m);
RHB_API int rhb_monodromy_hyperbolic_pairs(const rhb_monodromy* m);
/* "hyperbolic", "elliptic", "mixed" or "degenerate". */
RHB_API const char* rhb_monodromy_classification(const rhb_monodromy* m);
RHB_API rhb_status rhb_monodromy_kernel_dimension(const rhb_monodromy* m,
                                                  double omega_re,
                                                  double omega_im, double tol,
                                                  int* out);
RHB_API rhb_status rhb_monodromy_to_json(const rhb_monodromy* m,
                                         char** out_json);

/* ---- spectral index ---- */

typedef struct rhb_index_result {
  double omega_re, omega_im;
  double rho;
  int morse_index;
  int nullity;
  double min_eigenvalue;
  int truncation;
  int converged;
} rhb_index_result;

/* op: "scriptA", "scriptB", "Abeta" or "scriptAbar"; param is u, or beta
   for "Abeta". N <= 0 selects the eccentricity-dependent default. */
RHB_API rhb_status rhb_morse_index(const char* op, double param, double e,
                                   double rho, int N, double zero_tol,
                                   rhb_index_result* out);
RHB_API rhb_status rhb_index_json(const char* op, double param, double e,
                                  double rho, int N, double zero_tol,
                                  char** out_json);

/* ---- scans ---- */

typedef struct rhb_scan_config rhb_scan_config;
typedef struct rhb_grid rhb_grid;

RHB_API rhb_status rhb_scan_config_new(rhb_scan_config** out);
RHB_API void rhb_scan_config_free(rhb_scan_config* c);
/* Applies "key = value" lines from a file on top of the current values. */
RHB_API rhb_status rhb_scan_config_load(rhb_scan_config* c, const char* path);
RHB_API rhb_status rhb_scan_config_set(rhb_scan_config* c, const char* key,
                                       const char* value);
RHB_API rhb_status rhb_scan_config_validate(const rhb_scan_config* c);
RHB_API rhb_status rhb_scan_config_to_text(const rhb_scan_config* c,
                                           char** out_text);
RHB_API rhb_status rhb_scan_config_get(const rhb_scan_config* c,
                                       const char* key, char** out_value);

RHB_API rhb_status rhb_scan_run(const rhb_scan_config* c, int force,
                                rhb_grid** out);
RHB_API void rhb_grid_free(rhb_grid* g);
RHB_API size_t rhb_grid_row_count(const rhb_grid* g);
RHB_API size_t rhb_grid_failure_count(const rhb_grid* g);
RHB_API int rhb_grid_from_cache(const rhb_grid* g);
RHB_API rhb_status rhb_grid_failure(const rhb_grid* g, size_t i,
                                    char** out_message);
/* format: "csv" or "json". */
RHB_API rhb_status rhb_grid_serialize(const rhb_grid* g, const char* format,
                                      char** out_text);
RHB_API rhb_status rhb_grid_write(const rhb_grid* g, const char* format,
                                  const char* path);

/* ---- claim verification ---- */

typedef struct rhb_report rhb_report;

/* Uses the scan configuration for the rectangle item (NULL: defaults). */
RHB_API rhb_status rhb_verify_run(const rhb_scan_config* c, int force,
                                  int index_N, rhb_report** out);
RHB_API void rhb_report_free(rhb_report* r);
RHB_API size_t rhb_report_item_count(const rhb_report* r);
RHB_API int rhb_report_item_passed(const rhb_report* r, size_t i);
RHB_API int rhb_report_all_passed(const rhb_report* r);
RHB_API rhb_status rhb_report_to_json(const rhb_report* r, char** out_json);
RHB_API rhb_status rhb_report_to_text(const rhb_report* r, char** out_text);

#ifdef __cplusplus
}
#endif

#endif
