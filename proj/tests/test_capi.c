/* Copyright 2026 The peterlin Authors
 * SPDX-License-Identifier: Apache-2.0 */

/* Exercises the shared library through its C header only. */

#include "peterlin/peterlin.h"

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                  \
  do                                                                  \
  {                                                                   \
    if (!(cond))                                                      \
    {                                                                 \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static int log_calls = 0;
static void count_log(const char* message, void* user_data)
{
  (void)message;
  ++*(int*)user_data;
}

static void test_mesh(void)
{
  peterlin_mesh* mesh = NULL;
  size_t nv = 0, ne = 0;
  EXPECT(peterlin_mesh_create(3, 2, &mesh) == PETERLIN_OK);
  EXPECT(peterlin_mesh_counts(mesh, &nv, &ne) == PETERLIN_OK);
  EXPECT(nv == 27);
  EXPECT(ne == 48);
  peterlin_mesh_destroy(mesh);

  mesh = NULL;
  EXPECT(peterlin_mesh_create(4, 2, &mesh) == PETERLIN_ERROR_VALIDATION);
  EXPECT(mesh == NULL);
  EXPECT(strlen(peterlin_last_error()) > 0);
  EXPECT(peterlin_mesh_create(2, 2, NULL) == PETERLIN_ERROR_INVALID_ARGUMENT);
  peterlin_mesh_destroy(NULL);
}

static void test_simulation(void)
{
  peterlin_mesh* mesh = NULL;
  peterlin_simulation* sim = NULL;
  peterlin_config cfg;
  peterlin_diagnostics d;
  double t = -1.0;
  int done = -1, total = -1, iters = 0;

  peterlin_config_defaults(&cfg);
  EXPECT(cfg.eta == 2.0);
  EXPECT(cfg.epsilon == 1.0);
  EXPECT(cfg.cfl_like == 0.5);
  EXPECT(cfg.fp_max_iters == 50);

  EXPECT(peterlin_mesh_create(2, 4, &mesh) == PETERLIN_OK);
  cfg.t_final = 0.25;
  EXPECT(peterlin_simulation_create(mesh, &cfg, PETERLIN_INITIAL_EQUILIBRIUM, &sim) == PETERLIN_OK);
  /* The simulation keeps its own reference to the mesh. */
  peterlin_mesh_destroy(mesh);

  EXPECT(peterlin_simulation_progress(sim, &t, &done, &total) == PETERLIN_OK);
  EXPECT(t == 0.0 && done == 0 && total == 2);
  EXPECT(peterlin_simulation_diagnostics(sim, &d) == PETERLIN_OK);
  EXPECT(fabs(d.elastic_trace - 0.5) < 1e-13); /* 1/4 (2 / sqrt 2)^2 */
  EXPECT(peterlin_simulation_step(sim, &iters) == PETERLIN_OK);
  EXPECT(iters >= 1);
  EXPECT(peterlin_simulation_step(sim, NULL) == PETERLIN_OK);
  EXPECT(peterlin_simulation_step(sim, NULL) == PETERLIN_ERROR_VALIDATION);
  EXPECT(peterlin_simulation_progress(sim, &t, &done, &total) == PETERLIN_OK);
  EXPECT(t == 0.25 && done == 2);
  EXPECT(peterlin_simulation_diagnostics(sim, &d) == PETERLIN_OK);
  EXPECT(d.kinetic <= 1e-20);
  EXPECT(fabs(d.min_eig - 1.0 / sqrt(2.0)) < 1e-8);
  EXPECT(peterlin_simulation_dump(sim, "C", "capi_dump_C.txt") == PETERLIN_OK);
  EXPECT(peterlin_simulation_dump(sim, "q", "capi_dump_q.txt") == PETERLIN_ERROR_VALIDATION);
  peterlin_simulation_destroy(sim);

  EXPECT(peterlin_mesh_create(2, 4, &mesh) == PETERLIN_OK);
  cfg.a = 1.0;
  sim = NULL;
  EXPECT(peterlin_simulation_create(mesh, &cfg, PETERLIN_INITIAL_ZERO, &sim) == PETERLIN_ERROR_NON_SPD);
  EXPECT(sim == NULL);
  cfg.a = 0.0;
  cfg.fp_max_iters = 0;
  EXPECT(peterlin_simulation_create(mesh, &cfg, PETERLIN_INITIAL_SINE, &sim) == PETERLIN_ERROR_VALIDATION);
  cfg.fp_max_iters = 1;
  EXPECT(peterlin_simulation_create(mesh, &cfg, PETERLIN_INITIAL_SINE, &sim) == PETERLIN_OK);
  EXPECT(peterlin_simulation_step(sim, NULL) == PETERLIN_ERROR_FIXED_POINT);
  peterlin_simulation_destroy(sim);
  peterlin_mesh_destroy(mesh);
}

static void test_manifest(void)
{
  peterlin_manifest* m = NULL;
  const int levels[] = {2, 4};
  EXPECT(peterlin_manifest_parse("bogus = 1\n", NULL, &m) == PETERLIN_ERROR_PARSE);
  EXPECT(strstr(peterlin_last_error(), "bogus") != NULL);
  EXPECT(peterlin_manifest_parse("dt = -1\n", NULL, &m) == PETERLIN_ERROR_VALIDATION);
  EXPECT(peterlin_manifest_parse("", "equilibrium", &m) == PETERLIN_OK);
  EXPECT(peterlin_manifest_set_dim(m, 2) == PETERLIN_OK);
  EXPECT(peterlin_manifest_set_levels(m, levels, 2) == PETERLIN_OK);
  EXPECT(peterlin_manifest_set_output_dir(m, "capi_equilibrium") == PETERLIN_OK);
  EXPECT(peterlin_manifest_set_threads(m, 2) == PETERLIN_OK);
  EXPECT(peterlin_manifest_validate(m) == PETERLIN_OK);
  EXPECT(peterlin_experiment_run(m, count_log, &log_calls) == PETERLIN_OK);
  EXPECT(log_calls > 0);
  EXPECT(peterlin_manifest_set_dim(m, 5) == PETERLIN_OK);
  EXPECT(peterlin_manifest_validate(m) == PETERLIN_ERROR_VALIDATION);
  EXPECT(peterlin_experiment_run(m, NULL, NULL) == PETERLIN_ERROR_VALIDATION);
  peterlin_manifest_destroy(m);
}

int main(void)
{
  EXPECT(strcmp(peterlin_version(), "0.1.0") == 0);
  EXPECT(strcmp(peterlin_status_string(PETERLIN_OK), "ok") == 0);
  EXPECT(peterlin_status_string((peterlin_status)99) != NULL);
  test_mesh();
  test_simulation();
  test_manifest();
  if (failures) fprintf(stderr, "%d check(s) failed\n", failures);
  else printf("all C API checks passed\n");
  return failures ? 1 : 0;
}
