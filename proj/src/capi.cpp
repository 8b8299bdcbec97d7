// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/peterlin.h"

#include "peterlin/error.hpp"
#include "peterlin/experiment.hpp"
#include "peterlin/solver.hpp"

#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>

struct peterlin_mesh
{
  peterlin::MeshPtr mesh;
};

struct peterlin_simulation
{
  peterlin::TimeStepper stepper;
  peterlin::SimulationState state;
  int steps_done = 0;
  int last_fp_iters = 0;
};

struct peterlin_manifest
{
  peterlin::RunManifest manifest;
};

namespace
{
  thread_local std::string last_error;

  peterlin_status fail(peterlin_status s, const std::string& what)
  {
    last_error = what;
    return s;
  }

  /// Runs f and maps exceptions to status codes.
  template <typename F>
  peterlin_status guarded(F&& f) noexcept
  {
    using namespace peterlin;
    try
    {
      f();
      last_error.clear();
      return PETERLIN_OK;
    }
    catch (const DimensionMismatch& e) { return fail(PETERLIN_ERROR_DIMENSION, e.what()); }
    catch (const NonSpdError& e) { return fail(PETERLIN_ERROR_NON_SPD, e.what()); }
    catch (const SingularError& e) { return fail(PETERLIN_ERROR_SINGULAR, e.what()); }
    catch (const MeshMismatch& e) { return fail(PETERLIN_ERROR_MESH_MISMATCH, e.what()); }
    catch (const LinearSolveFailed& e) { return fail(PETERLIN_ERROR_LINEAR_SOLVE, e.what()); }
    catch (const FixedPointDiverged& e) { return fail(PETERLIN_ERROR_FIXED_POINT, e.what()); }
    catch (const SimulationFailed& e) { return fail(PETERLIN_ERROR_SIMULATION, e.what()); }
    catch (const ParseError& e) { return fail(PETERLIN_ERROR_PARSE, e.what()); }
    catch (const ValidationError& e) { return fail(PETERLIN_ERROR_VALIDATION, e.what()); }
    catch (const IoError& e) { return fail(PETERLIN_ERROR_IO, e.what()); }
    catch (const std::bad_alloc&) { return fail(PETERLIN_ERROR_INTERNAL, "out of memory"); }
    catch (const std::exception& e) { return fail(PETERLIN_ERROR_INTERNAL, e.what()); }
    catch (...) { return fail(PETERLIN_ERROR_INTERNAL, "unknown error"); }
  }

  peterlin::SolverConfig to_config(const peterlin_config& c)
  {
    peterlin::SolverConfig s;
    s.eta = c.eta;
    s.epsilon = c.epsilon;
    s.a = c.a;
    s.dt = c.dt;
    s.cfl_like = c.cfl_like;
    s.t_final = c.t_final;
    s.fp_tol = c.fp_tol;
    s.fp_max_iters = c.fp_max_iters;
    s.lin_tol = c.lin_tol;
    s.lin_max_iters = c.lin_max_iters;
    s.delta_bp = c.delta_bp;
    s.assembly_degree = c.assembly_degree;
    s.nonlinear_degree = c.nonlinear_degree;
    s.diagnostics_degree = c.diagnostics_degree;
    s.velocity_first = c.velocity_first != 0;
    return s;
  }
}  // namespace

extern "C" {

const char* peterlin_version(void) { return "0.1.0"; }

const char* peterlin_last_error(void) { return last_error.c_str(); }

const char* peterlin_status_string(peterlin_status status)
{
  switch (status)
  {
    case PETERLIN_OK: return "ok";
    case PETERLIN_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case PETERLIN_ERROR_DIMENSION: return "dimension mismatch";
    case PETERLIN_ERROR_NON_SPD: return "not positive definite";
    case PETERLIN_ERROR_SINGULAR: return "singular";
    case PETERLIN_ERROR_MESH_MISMATCH: return "mesh mismatch";
    case PETERLIN_ERROR_LINEAR_SOLVE: return "linear solve failed";
    case PETERLIN_ERROR_FIXED_POINT: return "fixed point diverged";
    case PETERLIN_ERROR_SIMULATION: return "simulation failed";
    case PETERLIN_ERROR_PARSE: return "parse error";
    case PETERLIN_ERROR_VALIDATION: return "validation error";
    case PETERLIN_ERROR_IO: return "i/o error";
    case PETERLIN_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void peterlin_config_defaults(peterlin_config* config)
{
  if (!config) return;
  const peterlin::SolverConfig s;
  *config = {s.eta, s.epsilon, s.a, s.dt, s.cfl_like, s.t_final, s.fp_tol, s.fp_max_iters, s.lin_tol,
      s.lin_max_iters, s.delta_bp, s.assembly_degree, s.nonlinear_degree, s.diagnostics_degree,
      s.velocity_first ? 1 : 0};
}

peterlin_status peterlin_mesh_create(int dim, int cells_per_side, peterlin_mesh** out)
{
  if (!out) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "out is NULL");
  *out = nullptr;
  return guarded([&] { *out = new peterlin_mesh{peterlin::build_mesh(dim, cells_per_side)}; });
}

peterlin_status peterlin_mesh_counts(const peterlin_mesh* mesh, size_t* vertices, size_t* elements)
{
  if (!mesh) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "mesh is NULL");
  if (vertices) *vertices = mesh->mesh->vertex_count();
  if (elements) *elements = mesh->mesh->element_count();
  last_error.clear();
  return PETERLIN_OK;
}

void peterlin_mesh_destroy(peterlin_mesh* mesh) { delete mesh; }

peterlin_status peterlin_simulation_create(
    const peterlin_mesh* mesh, const peterlin_config* config, peterlin_initial_data initial, peterlin_simulation** out)
{
  if (!out) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "out is NULL");
  *out = nullptr;
  if (!mesh || !config) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "mesh and config are required");
  return guarded([&] {
    const int d = mesh->mesh->dim();
    peterlin::InitialData data;
    switch (initial)
    {
      case PETERLIN_INITIAL_SINE: data = peterlin::sine_initial_data(d); break;
      case PETERLIN_INITIAL_EQUILIBRIUM: data = peterlin::equilibrium_initial_data(d); break;
      case PETERLIN_INITIAL_ZERO: data = peterlin::zero_initial_data(d); break;
      default: throw peterlin::ValidationError("unknown initial data preset");
    }
    peterlin::TimeStepper stepper(mesh->mesh, to_config(*config));
    peterlin::SimulationState state = peterlin::initial_state(mesh->mesh, data);
    if (config->a > 0.0)
    {
      const peterlin::SpdMargin m = peterlin::spd_monitor(state.C);
      if (!(m.min_eigenvalue > 0.0))
        throw peterlin::NonSpdError("initial conformation must be positive definite when a > 0", m.min_eigenvalue,
            std::ptrdiff_t(m.vertex));
    }
    *out = new peterlin_simulation{std::move(stepper), std::move(state)};
  });
}

peterlin_status peterlin_simulation_step(peterlin_simulation* sim, int* fp_iterations)
{
  if (!sim) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "simulation is NULL");
  return guarded([&] {
    if (sim->steps_done >= sim->stepper.steps()) throw peterlin::ValidationError("final time already reached");
    const peterlin::StepReport r = sim->stepper.step(sim->state);
    ++sim->steps_done;
    if (sim->steps_done == sim->stepper.steps()) sim->state.t = sim->stepper.config().t_final;
    sim->last_fp_iters = r.fp_iterations;
    if (fp_iterations) *fp_iterations = r.fp_iterations;
  });
}

peterlin_status peterlin_simulation_progress(const peterlin_simulation* sim, double* t, int* steps_done, int* steps_total)
{
  if (!sim) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "simulation is NULL");
  if (t) *t = sim->state.t;
  if (steps_done) *steps_done = sim->steps_done;
  if (steps_total) *steps_total = sim->stepper.steps();
  last_error.clear();
  return PETERLIN_OK;
}

peterlin_status peterlin_simulation_diagnostics(const peterlin_simulation* sim, peterlin_diagnostics* out)
{
  if (!sim || !out) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "simulation and out are required");
  return guarded([&] {
    const peterlin::DiagnosticsRecord r =
        peterlin::compute_diagnostics(sim->state, sim->stepper.config(), sim->last_fp_iters);
    *out = {r.t, r.kinetic, r.elastic_trace, r.frobenius, r.log_term, r.visc_diss, r.trace_grad_diss, r.relax_diss,
        r.source, r.free_energy, r.min_eig, r.div_norm, r.fp_iters};
  });
}

peterlin_status peterlin_simulation_dump(const peterlin_simulation* sim, const char* field, const char* path)
{
  if (!sim || !field || !path) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "simulation, field and path are required");
  return guarded([&] {
    const std::string f(field);
    const peterlin::NodalField* nf = f == "u" ? &sim->state.u : f == "p" ? &sim->state.p : f == "C" ? &sim->state.C : nullptr;
    if (!nf) throw peterlin::ValidationError("field must be u, p or C");
    std::ofstream os(path);
    if (!os) throw peterlin::IoError(std::string("cannot write ") + path);
    peterlin::write_dump(os, *nf);
    if (!os) throw peterlin::IoError(std::string("failed writing ") + path);
  });
}

void peterlin_simulation_destroy(peterlin_simulation* sim) { delete sim; }

peterlin_status peterlin_manifest_parse(const char* text, const char* experiment, peterlin_manifest** out)
{
  if (!out) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "out is NULL");
  *out = nullptr;
  return guarded([&] {
    std::optional<std::string> exp;
    if (experiment) exp = experiment;
    *out = new peterlin_manifest{peterlin::parse_config(text ? text : "", exp)};
  });
}

peterlin_status peterlin_manifest_set_dim(peterlin_manifest* m, int dim)
{
  if (!m) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "manifest is NULL");
  m->manifest.dim = dim;
  last_error.clear();
  return PETERLIN_OK;
}

peterlin_status peterlin_manifest_set_levels(peterlin_manifest* m, const int* levels, size_t count)
{
  if (!m || (!levels && count)) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "manifest and levels are required");
  m->manifest.levels.assign(levels, levels + count);
  last_error.clear();
  return PETERLIN_OK;
}

peterlin_status peterlin_manifest_set_reference(peterlin_manifest* m, int reference)
{
  if (!m) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "manifest is NULL");
  m->manifest.reference = reference;
  last_error.clear();
  return PETERLIN_OK;
}

peterlin_status peterlin_manifest_set_output_dir(peterlin_manifest* m, const char* dir)
{
  if (!m || !dir) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "manifest and dir are required");
  m->manifest.output_dir = dir;
  last_error.clear();
  return PETERLIN_OK;
}

peterlin_status peterlin_manifest_set_threads(peterlin_manifest* m, int threads)
{
  if (!m) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "manifest is NULL");
  m->manifest.threads = threads;
  last_error.clear();
  return PETERLIN_OK;
}

peterlin_status peterlin_manifest_validate(const peterlin_manifest* m)
{
  if (!m) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "manifest is NULL");
  return guarded([&] { m->manifest.validate(); });
}

void peterlin_manifest_destroy(peterlin_manifest* m) { delete m; }

peterlin_status peterlin_experiment_run(const peterlin_manifest* m, peterlin_log_fn log, void* user_data)
{
  if (!m) return fail(PETERLIN_ERROR_INVALID_ARGUMENT, "manifest is NULL");
  return guarded([&] {
    peterlin::LogSink sink;
    if (log) sink = [log, user_data](const std::string& s) { log(s.c_str(), user_data); };
    peterlin::run_experiment(m->manifest, sink);
  });
}

}  // extern "C"
