#ifndef TDHFB_TDHFB_H
#define TDHFB_TDHFB_H

#include <stddef.h>
#include <stdint.h>

#if defined(TDHFB_BUILDING_LIBRARY)
#define TDHFB_API __attribute__((visibility("default")))
#else
#define TDHFB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The first four double as process exit statuses of a run. */
typedef enum tdhfb_status {
  TDHFB_OK = 0,
  TDHFB_ERR_CONFIG = 1,
  TDHFB_ERR_NUMERICAL = 2,
  TDHFB_ERR_TRUNCATION = 3,
  TDHFB_ERR_ARGUMENT = 4,
  TDHFB_ERR_IO = 5,
  TDHFB_ERR_INTERNAL = 6
} tdhfb_status;

typedef struct tdhfb_config tdhfb_config;
typedef struct tdhfb_simulation tdhfb_simulation;

/* Observables of the current simulation state. */
typedef struct tdhfb_observables {
  double t;
  double particle_number;
  double energy;
  double tr_gamma;
  double phi_l2;
  double sobolev_phi;
  double sobolev_gamma;
  double sobolev_lambda;
} tdhfb_observables;

TDHFB_API const char* tdhfb_version(void);

/* Message of the last failed call on this thread; empty if none. */
TDHFB_API const char* tdhfb_last_error(void);

TDHFB_API tdhfb_status tdhfb_config_load(const char* path, tdhfb_config** out);
TDHFB_API tdhfb_status tdhfb_config_parse(const char* text, tdhfb_config** out);
TDHFB_API tdhfb_status tdhfb_config_default(tdhfb_config** out);
TDHFB_API void tdhfb_config_free(tdhfb_config* cfg);
TDHFB_API tdhfb_status tdhfb_config_set_scenario(tdhfb_config* cfg, const char* name);
TDHFB_API tdhfb_status tdhfb_config_set_seed(tdhfb_config* cfg, uint64_t seed);
TDHFB_API tdhfb_status tdhfb_config_set_out_dir(tdhfb_config* cfg, const char* dir);
/* Re-validates cross-field invariants. */
TDHFB_API tdhfb_status tdhfb_config_validate(const tdhfb_config* cfg);

/* Runs the configured scenario and writes its artifacts; progress and errors
   go to stderr. Returns the exit status (0..3) or an API error. */
TDHFB_API tdhfb_status tdhfb_run(const tdhfb_config* cfg);

/* Full-flow simulation from the configured initial data at physics.N. */
TDHFB_API tdhfb_status tdhfb_simulation_create(const tdhfb_config* cfg, tdhfb_simulation** out);
TDHFB_API void tdhfb_simulation_free(tdhfb_simulation* sim);
/* Advances by dt_total with the configured step controller. */
TDHFB_API tdhfb_status tdhfb_simulation_advance(tdhfb_simulation* sim, double dt_total);
TDHFB_API double tdhfb_simulation_time(const tdhfb_simulation* sim);
TDHFB_API tdhfb_status tdhfb_simulation_observables(const tdhfb_simulation* sim, tdhfb_observables* out);
TDHFB_API size_t tdhfb_simulation_grid_size(const tdhfb_simulation* sim);
/* Copies phi as interleaved (re, im) pairs; buffer holds 2 * grid_size doubles. */
TDHFB_API tdhfb_status tdhfb_simulation_phi(const tdhfb_simulation* sim, double* buffer, size_t length);

#ifdef __cplusplus
}
#endif

#endif
