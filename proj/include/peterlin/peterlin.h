/* Copyright 2026 The peterlin Authors
 * SPDX-License-Identifier: Apache-2.0 */

/* C interface of the peterlin solver. Every object is an opaque handle;
 * every fallible call returns a status and leaves a message retrievable with
 * peterlin_last_error() on the calling thread. */

#ifndef PETERLIN_PETERLIN_H
#define PETERLIN_PETERLIN_H

#include <stddef.h>

#if defined(PETERLIN_BUILDING_LIBRARY)
#define PETERLIN_API __attribute__((visibility("default")))
#else
#define PETERLIN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum peterlin_status {
  PETERLIN_OK = 0,
  PETERLIN_ERROR_INVALID_ARGUMENT = 1,
  PETERLIN_ERROR_DIMENSION = 2,
  PETERLIN_ERROR_NON_SPD = 3,
  PETERLIN_ERROR_SINGULAR = 4,
  PETERLIN_ERROR_MESH_MISMATCH = 5,
  PETERLIN_ERROR_LINEAR_SOLVE = 6,
  PETERLIN_ERROR_FIXED_POINT = 7,
  PETERLIN_ERROR_SIMULATION = 8,
  PETERLIN_ERROR_PARSE = 9,
  PETERLIN_ERROR_VALIDATION = 10,
  PETERLIN_ERROR_IO = 11,
  PETERLIN_ERROR_INTERNAL = 12
} peterlin_status;

typedef struct peterlin_mesh peterlin_mesh;
typedef struct peterlin_simulation peterlin_simulation;
typedef struct peterlin_manifest peterlin_manifest;

typedef struct peterlin_config {
  double eta;
  double epsilon;
  double a;
  double dt; /* 0 selects dt = cfl_like * h */
  double cfl_like;
  double t_final;
  double fp_tol;
  int fp_max_iters;
  double lin_tol;
  int lin_max_iters;
  double delta_bp;
  int assembly_degree;
  int nonlinear_degree;
  int diagnostics_degree;
  int velocity_first;
} peterlin_config;

typedef struct peterlin_diagnostics {
  double t;
  double kinetic;
  double elastic_trace;
  double frobenius;
  double log_term; /* NaN when C is not positive definite somewhere */
  double visc_diss;
  double trace_grad_diss;
  double relax_diss;
  double source;
  double free_energy;
  double min_eig;
  double div_norm;
  int fp_iters;
} peterlin_diagnostics;

typedef enum peterlin_initial_data {
  PETERLIN_INITIAL_SINE = 0, /* u_i = prod sin(2 pi x_c), C = I / sqrt(3) */
  PETERLIN_INITIAL_EQUILIBRIUM = 1,
  PETERLIN_INITIAL_ZERO = 2
} peterlin_initial_data;

typedef void (*peterlin_log_fn)(const char* message, void* user_data);

PETERLIN_API const char* peterlin_version(void);
/* Message of the last failed call on this thread, "" if none. */
PETERLIN_API const char* peterlin_last_error(void);
PETERLIN_API const char* peterlin_status_string(peterlin_status status);

PETERLIN_API void peterlin_config_defaults(peterlin_config* config);

PETERLIN_API peterlin_status peterlin_mesh_create(int dim, int cells_per_side, peterlin_mesh** out);
PETERLIN_API peterlin_status peterlin_mesh_counts(const peterlin_mesh* mesh, size_t* vertices, size_t* elements);
PETERLIN_API void peterlin_mesh_destroy(peterlin_mesh* mesh);

PETERLIN_API peterlin_status peterlin_simulation_create(const peterlin_mesh* mesh, const peterlin_config* config,
    peterlin_initial_data initial, peterlin_simulation** out);
/* Advances one step; fails with PETERLIN_ERROR_VALIDATION past t_final. */
PETERLIN_API peterlin_status peterlin_simulation_step(peterlin_simulation* sim, int* fp_iterations);
PETERLIN_API peterlin_status peterlin_simulation_progress(const peterlin_simulation* sim, double* t, int* steps_done,
    int* steps_total);
PETERLIN_API peterlin_status peterlin_simulation_diagnostics(const peterlin_simulation* sim, peterlin_diagnostics* out);
/* Text dump of one field: "u", "p" or "C". */
PETERLIN_API peterlin_status peterlin_simulation_dump(const peterlin_simulation* sim, const char* field, const char* path);
PETERLIN_API void peterlin_simulation_destroy(peterlin_simulation* sim);

/* experiment may be NULL to use the file's own `experiment` key. */
PETERLIN_API peterlin_status peterlin_manifest_parse(const char* text, const char* experiment, peterlin_manifest** out);
PETERLIN_API peterlin_status peterlin_manifest_set_dim(peterlin_manifest* m, int dim);
PETERLIN_API peterlin_status peterlin_manifest_set_levels(peterlin_manifest* m, const int* levels, size_t count);
PETERLIN_API peterlin_status peterlin_manifest_set_reference(peterlin_manifest* m, int reference);
PETERLIN_API peterlin_status peterlin_manifest_set_output_dir(peterlin_manifest* m, const char* dir);
PETERLIN_API peterlin_status peterlin_manifest_set_threads(peterlin_manifest* m, int threads);
PETERLIN_API peterlin_status peterlin_manifest_validate(const peterlin_manifest* m);
PETERLIN_API void peterlin_manifest_destroy(peterlin_manifest* m);

PETERLIN_API peterlin_status peterlin_experiment_run(const peterlin_manifest* m, peterlin_log_fn log, void* user_data);

#ifdef __cplusplus
}
#endif

#endif
