#ifndef SIDIFF_SIDIFF_H
#define SIDIFF_SIDIFF_H

#include <stddef.h>
#include <stdint.h>

#if defined(SIDIFF_BUILDING_LIBRARY)
#define SIDIFF_API __attribute__((visibility("default")))
#else
#define SIDIFF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sidiff_status {
  SIDIFF_OK = 0,
  SIDIFF_E_INVALID_ARGUMENT = 1, /* null handle or pointer */
  SIDIFF_E_DOMAIN = 2,
  SIDIFF_E_CONFIG = 3,
  SIDIFF_E_RESOLUTION = 4,
  SIDIFF_E_CONVERGENCE = 5,
  SIDIFF_E_UNSUPPORTED = 6,
  SIDIFF_E_INSUFFICIENT_DATA = 7,
  SIDIFF_E_IO = 8,
  SIDIFF_E_BUFFER_TOO_SMALL = 9,
  SIDIFF_E_INTERNAL = 10
} sidiff_status;

typedef struct sidiff_potential sidiff_potential;
typedef struct sidiff_schedule sidiff_schedule;
typedef struct sidiff_gibbs sidiff_gibbs;
typedef struct sidiff_config sidiff_config;
typedef struct sidiff_result sidiff_result;

typedef enum sidiff_critical_kind {
  SIDIFF_LOCAL_MIN = 0,
  SIDIFF_LOCAL_MAX = 1,
  SIDIFF_SADDLE = 2
} sidiff_critical_kind;

typedef struct sidiff_critical_point {
  double x[2];
  double value;
  int kind; /* sidiff_critical_kind */
  double hessian_det;
  double min_eigenvalue;
  int is_global_min;
} sidiff_critical_point;

SIDIFF_API const char* sidiff_version(void);
SIDIFF_API const char* sidiff_status_name(sidiff_status status);
/* Message of the last failed call on this thread; empty after a success. */
SIDIFF_API const char* sidiff_last_error(void);

/* Text outputs use a size query: pass buffer = NULL (or a short capacity) to
 * learn the required size, including the terminating NUL. */
SIDIFF_API sidiff_status sidiff_catalog_json(char* buffer, size_t capacity, size_t* required);
SIDIFF_API sidiff_status sidiff_oracles_json(char* buffer, size_t capacity, size_t* required);

/* Potentials. Parameters not listed keep their catalog defaults. */
SIDIFF_API sidiff_status sidiff_potential_create(const char* id, const char* const* param_names,
                                                 const double* param_values, size_t param_count,
                                                 sidiff_potential** out);
SIDIFF_API void sidiff_potential_destroy(sidiff_potential* potential);
SIDIFF_API int sidiff_potential_dimension(const sidiff_potential* potential);
/* x, gradient: 2 entries; hessian: xx, xy, yy. Any output may be NULL. */
SIDIFF_API sidiff_status sidiff_potential_eval(const sidiff_potential* potential, const double* x, double* value,
                                               double* gradient, double* hessian);
SIDIFF_API sidiff_status sidiff_potential_osc_chi(const sidiff_potential* potential, double* out);
SIDIFF_API sidiff_status sidiff_potential_critical_points(const sidiff_potential* potential,
                                                          sidiff_critical_point* points, size_t capacity,
                                                          size_t* count);

/* Schedules. */
SIDIFF_API sidiff_status sidiff_schedule_constant(double g0, sidiff_schedule** out);
SIDIFF_API sidiff_status sidiff_schedule_logarithmic(double k, double shift, sidiff_schedule** out);
SIDIFF_API void sidiff_schedule_destroy(sidiff_schedule* schedule);
SIDIFF_API sidiff_status sidiff_schedule_G(const sidiff_schedule* schedule, double t, double* out);
SIDIFF_API sidiff_status sidiff_schedule_g_inverse(const sidiff_schedule* schedule, double u, double* out);
SIDIFF_API sidiff_status sidiff_annealing_state(const sidiff_schedule* schedule, double r, double t, double* eps2,
                                                double* a);

/* Gibbs measures; a = INFINITY drops the confinement term. */
SIDIFF_API sidiff_status sidiff_gibbs_create(const sidiff_potential* potential, double eps2, double a,
                                             sidiff_gibbs** out);
SIDIFF_API void sidiff_gibbs_destroy(sidiff_gibbs* measure);
SIDIFF_API sidiff_status sidiff_gibbs_log_normalizer(const sidiff_gibbs* measure, double* out);
SIDIFF_API sidiff_status sidiff_gibbs_mass(const sidiff_gibbs* measure, double lo, double hi, double* out);
SIDIFF_API sidiff_status sidiff_gibbs_sample(const sidiff_gibbs* measure, uint64_t seed, uint64_t stream, size_t n,
                                             double* out);

/* Landscape. */
SIDIFF_API sidiff_status sidiff_maximal_height(const sidiff_potential* potential, double a, double h, double* out);
SIDIFF_API sidiff_status sidiff_spectral_gap(const sidiff_potential* potential, double eps2, double a, double h,
                                             double* lambda2);

/* Experiment configs. Parsing returns a handle whenever the file could be
 * read, so that the collected issues can be listed; sidiff_config_valid tells
 * whether the config can run. */
SIDIFF_API sidiff_status sidiff_config_load(const char* path, sidiff_config** out);
SIDIFF_API sidiff_status sidiff_config_parse(const char* json_text, sidiff_config** out);
SIDIFF_API void sidiff_config_destroy(sidiff_config* config);
SIDIFF_API int sidiff_config_valid(const sidiff_config* config);
SIDIFF_API size_t sidiff_config_issue_count(const sidiff_config* config);
/* severity: 0 = error, 1 = warning. Strings stay valid while the handle lives. */
SIDIFF_API sidiff_status sidiff_config_issue(const sidiff_config* config, size_t index, int* severity,
                                             const char** key, const char** message);
SIDIFF_API sidiff_status sidiff_config_set_output_dir(sidiff_config* config, const char* dir);
SIDIFF_API sidiff_status sidiff_config_set_workers(sidiff_config* config, unsigned workers);

/* Runs the experiment and writes its artifacts. */
SIDIFF_API sidiff_status sidiff_run(const sidiff_config* config, sidiff_result** out);
SIDIFF_API void sidiff_result_destroy(sidiff_result* result);
SIDIFF_API int sidiff_result_all_pass(const sidiff_result* result);
SIDIFF_API size_t sidiff_result_criterion_count(const sidiff_result* result);
SIDIFF_API sidiff_status sidiff_result_criterion(const sidiff_result* result, size_t index, const char** id,
                                                 int* pass);
/* verdict.json text; valid while the handle lives. */
SIDIFF_API const char* sidiff_result_verdict_json(const sidiff_result* result);

#ifdef __cplusplus
}
#endif

#endif
