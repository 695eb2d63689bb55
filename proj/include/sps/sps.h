/*
 * sps.h - C interface to the singular positive solution toolkit.
 *
 * Every function returns an sps_status (0 on success). On failure the
 * thread-local message from sps_last_error() describes the problem and
 * sps_last_error_json() gives the same as a JSON error document. Handles
 * are opaque and owned by the caller; release them with the matching
 * *_free function. Strings returned through a handle stay valid until the
 * handle is freed.
 */
#ifndef SPS_H
#define SPS_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SPS_API __declspec(dllexport)
#else
#define SPS_API __attribute__((visibility("default")))
#endif

/* Values match the library's internal error codes. */
typedef enum sps_status {
  SPS_OK = 0,
  SPS_ERR_INVALID_ARGUMENT = 1,
  SPS_ERR_DOMAIN = 2,
  SPS_ERR_CONFIG = 3,
  SPS_ERR_QUADRATURE = 4,
  SPS_ERR_CONVERGENCE = 5,
  SPS_ERR_SINGULAR_MATRIX = 6,
  SPS_ERR_SEARCH_EXHAUSTED = 7,
  SPS_ERR_MAX_ITERATIONS = 8,
  SPS_ERR_BALL_ESCAPE = 9,
  SPS_ERR_POSITIVITY_VIOLATION = 10,
  SPS_ERR_BOUND_VIOLATION = 11,
  SPS_ERR_CERTIFICATE = 12,
  SPS_ERR_GRID_MISMATCH = 13,
  SPS_ERR_MISSING_DERIVATIVE = 14,
  SPS_ERR_IO = 15,
  SPS_ERR_INTERNAL = 99
} sps_status;

typedef enum sps_sign { SPS_SIGN_MINUS = 0, SPS_SIGN_PLUS = 1 } sps_sign;

typedef struct sps_params {
  int n_dim;
  double p;
  double xi;
  double beta;
  double sigma;
  double c_beta;
} sps_params;

typedef struct sps_config sps_config;
typedef struct sps_result sps_result;

SPS_API const char* sps_version(void);
SPS_API const char* sps_status_name(int status);

/* Message of the last failure on this thread ("" when none). */
SPS_API const char* sps_last_error(void);
SPS_API const char* sps_last_error_json(void);

SPS_API sps_status sps_derive_params(int n_dim, double p, sps_params* out);
/* w_t(r) and w_t'(r) for the profile with parameters (n_dim, p). Either output may be NULL. */
SPS_API sps_status sps_profile_value(int n_dim, double p, double t, double r, double* w,
                                     double* w_prime);

/* Configuration. The text is a JSON document; NULL or "" gives defaults. */
SPS_API sps_status sps_config_parse(const char* json_text, sps_config** out);
SPS_API void sps_config_free(sps_config* config);
/* Fully defaulted JSON form; release with sps_string_free. */
SPS_API sps_status sps_config_echo(const sps_config* config, char** out);
SPS_API const char* sps_config_out_dir(const sps_config* config);
SPS_API sps_status sps_config_set_out_dir(sps_config* config, const char* dir);

/* Subcommands. Each fills a result handle on success. */
SPS_API sps_status sps_run_params(const sps_config* config, sps_result** out);
/* has_t = 0 uses profile.t from the config. */
SPS_API sps_status sps_run_profile(const sps_config* config, int has_t, double t,
                                   sps_result** out);
/* rhs_csv, when not NULL, holds CSV text with columns r,b on the grid and
   overrides rhs_name. */
SPS_API sps_status sps_run_solve_linear(const sps_config* config, int k, sps_sign sign, double t,
                                        const char* rhs_name, const char* rhs_csv,
                                        sps_result** out);
SPS_API sps_status sps_run_construct(const sps_config* config, sps_result** out);
SPS_API sps_status sps_run_sweep(const sps_config* config, const double* t_list, size_t n_t,
                                 sps_result** out);
SPS_API sps_status sps_run_verify_all(const sps_config* config, const char* timestamp,
                                      sps_result** out);

SPS_API void sps_result_free(sps_result* result);
/* 1 when every check of the run passed. */
SPS_API int sps_result_passed(const sps_result* result);
SPS_API const char* sps_result_report(const sps_result* result);
SPS_API size_t sps_result_file_count(const sps_result* result);
/* Relative path and contents of file i. */
SPS_API sps_status sps_result_file(const sps_result* result, size_t i, const char** path,
                                   const char** contents, size_t* size);

SPS_API void sps_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SPS_H */
