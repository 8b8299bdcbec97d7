// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/solver.hpp"

#include "peterlin/assembly.hpp"
#include "peterlin/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace peterlin
{
  SimulationState initial_state(MeshPtr mesh, const InitialData& data)
  {
    const int d = mesh->dim();
    if (!data.velocity || !data.conformation) throw ValidationError("initial data callbacks must be set");
    SimulationState s{0.0, interpolate_function(mesh, d, data.velocity), NodalField(mesh, 1),
        interpolate_function(mesh, sym_size(d), data.conformation)};
    for (std::size_t v = 0; v < mesh->vertex_count(); ++v)
      if (mesh->on_boundary(v))
        for (double& x : s.u.at(v)) x = 0.0;
    return s;
  }

  namespace
  {
    /// a + b when both share one sparsity pattern.
    SparseMatrix add_same_pattern(const SparseMatrix& a, const SparseMatrix& b)
    {
      const bool same = a.rows() == b.rows() && a.nonzeros() == b.nonzeros() &&
                        std::equal(a.row_offsets().begin(), a.row_offsets().end(), b.row_offsets().begin()) &&
                        std::equal(a.columns().begin(), a.columns().end(), b.columns().begin());
      if (!same) return linear_combination(1.0, a, 1.0, b);
      SparseMatrix out = a;
      auto v = out.values();
      const auto bv = b.values();
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += bv[k];
      return out;
    }

    /// sqrt(sum_v m_v |x_v - y_v|^2), off-diagonal tensor slots counted twice.
    double lumped_distance(const NodalField& x, const NodalField& y, bool tensor)
    {
      const auto& mesh = x.mesh();
      const auto m = mesh.lumped_mass();
      const int ar = x.arity();
      const int d = mesh.dim();
      double s = 0.0;
      for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
      {
        const auto a = x.at(v);
        const auto b = y.at(v);
        double q = 0.0;
        for (int c = 0; c < ar; ++c) q += (tensor && c >= d ? 2.0 : 1.0) * (a[c] - b[c]) * (a[c] - b[c]);
        s += m[v] * q;
      }
      return std::sqrt(s);
    }
  }  // namespace

  struct TimeStepper::Impl
  {
    MeshPtr mesh;
    SolverConfig config;
    ProblemOptions options;
    int steps = 0;
    double dt = 0.0;

    QuadratureRule assembly_rule;
    QuadratureRule nonlinear_rule;

    std::vector<char> fixed;  ///< eliminated rows of the saddle system
    SparseMatrix saddle;
    std::optional<SparseLdlt> saddle_factor;
    SparseMatrix conformation_base;  ///< M / dt + eps K

    Impl(MeshPtr m, const SolverConfig& c, ProblemOptions o)
        : mesh(std::move(m)),
          config(c),
          options(std::move(o)),
          assembly_rule(quadrature_rule(mesh->dim(), c.assembly_degree)),
          nonlinear_rule(quadrature_rule(mesh->dim(), c.nonlinear_degree))
    {
      config.validate();
      steps = config.step_count(mesh->h());
      dt = config.effective_dt(mesh->h());
      const double dt_matrix = dt > 0.0 ? dt : config.cfl_like * mesh->h();

      const SparseMatrix mass = mass_matrix(*mesh);
      conformation_base = linear_combination(1.0 / dt_matrix, mass, 1.0, stiffness_matrix(*mesh, config.epsilon));
      if (!options.freeze_velocity) build_saddle(dt_matrix);
    }

    void build_saddle(double dt_matrix)
    {
      const int d = mesh->dim();
      const std::size_t nv = mesh->vertex_count();
      const std::size_t nu = nv * d;
      const SparseMatrix top =
          linear_combination(1.0 / dt_matrix, block_mass_matrix(*mesh, d), 1.0, viscous_matrix(*mesh, config.eta));
      const SparseMatrix div = divergence_matrix(*mesh);
      const SparseMatrix stab = pressure_stabilization(*mesh, config.delta_bp);

      fixed.assign(nu + nv, 0);
      for (std::size_t v = 0; v < nv; ++v)
        if (mesh->on_boundary(v))
          for (int c = 0; c < d; ++c) fixed[v * d + c] = 1;
      fixed[nu] = 1;  // pressure pinned at vertex 0, shifted to zero mean afterwards

      TripletBuilder t(nu + nv, nu + nv);
      t.reserve(top.nonzeros() + 2 * div.nonzeros() + stab.nonzeros());
      auto add = [&](std::size_t r, std::size_t c, double v) {
        if ((fixed[r] || fixed[c]) && r != c) return;
        t.add(r, c, v);
      };
      for (std::size_t r = 0; r < top.rows(); ++r)
        for (std::size_t k = top.row_offsets()[r]; k < top.row_offsets()[r + 1]; ++k)
          add(r, top.columns()[k], top.values()[k]);
      for (std::size_t q = 0; q < div.rows(); ++q)
        for (std::size_t k = div.row_offsets()[q]; k < div.row_offsets()[q + 1]; ++k)
        {
          add(nu + q, div.columns()[k], -div.values()[k]);
          add(div.columns()[k], nu + q, -div.values()[k]);
        }
      for (std::size_t r = 0; r < stab.rows(); ++r)
        for (std::size_t k = stab.row_offsets()[r]; k < stab.row_offsets()[r + 1]; ++k)
          add(nu + r, nu + stab.columns()[k], -stab.values()[k]);
      saddle = t.build();
      saddle_factor.emplace(saddle);
    }

    std::vector<double> solve_saddle(std::span<const double> load, LinearSolveStats* stats) const
    {
      const int d = mesh->dim();
      const std::size_t nv = mesh->vertex_count();
      const std::size_t nu = nv * d;
      if (!saddle_factor) throw Error("velocity system is not assembled when the velocity is frozen");
      if (load.size() != nu) throw DimensionMismatch("momentum load size mismatch");
      std::vector<double> rhs(nu + nv, 0.0);
      for (std::size_t i = 0; i < nu; ++i) rhs[i] = fixed[i] ? 0.0 : load[i];
      IterativeOptions opts{config.lin_tol, config.lin_max_iters};
      std::vector<double> x = solve_factored(saddle, *saddle_factor, rhs, opts, stats);
      const auto m = mesh->lumped_mass();
      double mean = 0.0;
      for (std::size_t v = 0; v < nv; ++v) mean += m[v] * x[nu + v];
      for (std::size_t v = 0; v < nv; ++v) x[nu + v] -= mean;
      return x;
    }

    void velocity_update(const SimulationState& old, const CharacteristicFeet& feet, const NodalField& ck,
        NodalField& u, NodalField& p, StepReport& report) const
    {
      const int d = mesh->dim();
      const std::size_t nu = mesh->vertex_count() * d;
      std::vector<double> load = transported_rhs(old.u, feet, assembly_rule);
      const std::vector<double> stress = elastic_stress_load(ck, assembly_rule);
      for (std::size_t i = 0; i < nu; ++i) load[i] = load[i] / dt - stress[i];
      LinearSolveStats st;
      const std::vector<double> x = solve_saddle(load, &st);
      report.velocity_solves.push_back(st);
      std::copy(x.begin(), x.begin() + nu, u.values().begin());
      std::copy(x.begin() + nu, x.end(), p.values().begin());
    }

    void conformation_update(const SimulationState& old, const CharacteristicFeet& feet, const NodalField& uk,
        const NodalField& ck, const std::vector<double>& forcing, NodalField& c, StepReport& report) const
    {
      const int ns = sym_size(mesh->dim());
      const std::size_t nv = mesh->vertex_count();
      const SparseMatrix mat = add_same_pattern(conformation_base, reaction_matrix(ck, config.a, nonlinear_rule));
      std::vector<double> rhs = transported_rhs(old.C, feet, assembly_rule);
      const std::vector<double> src = conformation_source(ck, uk, config.a, assembly_rule);
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = rhs[i] / dt + src[i] + (forcing.empty() ? 0.0 : forcing[i]);

      IterativeOptions opts{config.lin_tol, config.lin_max_iters};
      std::vector<double> b(nv), x(nv);
      for (int s = 0; s < ns; ++s)
      {
        for (std::size_t v = 0; v < nv; ++v)
        {
          b[v] = rhs[v * ns + s];
          x[v] = ck.at(v)[s];
        }
        report.conformation_solves.push_back(conjugate_gradient(mat, b, x, opts));
        for (std::size_t v = 0; v < nv; ++v) c.at(v)[s] = x[v];
      }
    }

    std::vector<double> forcing_load(double t) const
    {
      const int ns = sym_size(mesh->dim());
      std::vector<double> f;
      if (options.forcing.body)
      {
        const auto& body = options.forcing.body;
        f = body_load(*mesh, ns, nonlinear_rule, [&](const Point& x, std::span<double> out) { body(t, x, out); });
      }
      if (options.forcing.flux)
      {
        const auto& flux = options.forcing.flux;
        const std::vector<double> g = boundary_load(
            *mesh, ns, [&](const Point& x, const Point& n, std::span<double> out) { flux(t, x, n, out); });
        if (f.empty())
          f = g;
        else
          for (std::size_t i = 0; i < f.size(); ++i) f[i] += g[i];
      }
      return f;
    }

    StepReport step(SimulationState& state) const
    {
      if (state.u.mesh_ptr() != mesh && (state.u.mesh().dim() != mesh->dim() ||
                                            state.u.mesh().cells_per_side() != mesh->cells_per_side()))
        throw MeshMismatch("state does not live on the stepper's mesh");
      if (!(dt > 0.0)) throw ValidationError("a zero-length run has no steps");

      StepReport report;
      report.t = state.t + dt;
      const std::vector<double> forcing = forcing_load(report.t);

      NodalField uk = state.u;
      NodalField ck = state.C;
      NodalField pk = state.p;
      NodalField u_next = uk, c_next = ck, p_next = pk;
      for (int k = 1; k <= config.fp_max_iters; ++k)
      {
        const CharacteristicFeet feet = characteristic_feet(uk, dt, assembly_rule);
        if (options.freeze_velocity)
        {
          conformation_update(state, feet, uk, ck, forcing, c_next, report);
        }
        else if (config.velocity_first)
        {
          velocity_update(state, feet, ck, u_next, p_next, report);
          conformation_update(state, feet, u_next, ck, forcing, c_next, report);
        }
        else
        {
          conformation_update(state, feet, uk, ck, forcing, c_next, report);
          velocity_update(state, feet, c_next, u_next, p_next, report);
        }
        const double inc = lumped_distance(u_next, uk, false) + lumped_distance(c_next, ck, true);
        report.increments.push_back(inc);
        report.fp_iterations = k;
        report.increment = inc;
        if (!std::isfinite(inc)) throw FixedPointDiverged("fixed-point increment is not finite", k, inc);
        uk = u_next;
        ck = c_next;
        pk = p_next;
        if (inc <= config.fp_tol)
        {
          state.t = report.t;
          state.u = std::move(uk);
          state.p = std::move(pk);
          state.C = std::move(ck);
          return report;
        }
      }
      throw FixedPointDiverged("fixed-point iteration did not converge", config.fp_max_iters, report.increment);
    }
  };

  TimeStepper::TimeStepper(MeshPtr mesh, const SolverConfig& config, ProblemOptions options)
      : impl_(std::make_unique<Impl>(std::move(mesh), config, std::move(options)))
  {
  }

  TimeStepper::~TimeStepper() = default;
  TimeStepper::TimeStepper(TimeStepper&&) noexcept = default;
  TimeStepper& TimeStepper::operator=(TimeStepper&&) noexcept = default;

  double TimeStepper::dt() const { return impl_->dt; }
  int TimeStepper::steps() const { return impl_->steps; }
  const SolverConfig& TimeStepper::config() const { return impl_->config; }
  StepReport TimeStepper::step(SimulationState& state) const { return impl_->step(state); }
  const SparseMatrix& TimeStepper::saddle_matrix() const { return impl_->saddle; }

  std::vector<double> TimeStepper::solve_saddle(std::span<const double> momentum_load, LinearSolveStats* stats) const
  {
    return impl_->solve_saddle(momentum_load, stats);
  }

  StepReport step(SimulationState& state, const SolverConfig& config, ProblemOptions options)
  {
    SolverConfig c = config;
    if (c.t_final == 0.0) c.t_final = c.dt > 0.0 ? c.dt : c.cfl_like * state.u.mesh().h();
    const TimeStepper stepper(state.u.mesh_ptr(), c, std::move(options));
    return stepper.step(state);
  }

  RunResult run(const SolverConfig& config, MeshPtr mesh, const InitialData& data, const StepObserver& observer,
      ProblemOptions options)
  {
    const TimeStepper stepper(mesh, config, std::move(options));
    RunResult result{initial_state(mesh, data), {}};
    if (config.a > 0.0)
    {
      const SpdMargin m = spd_monitor(result.final_state.C);
      if (!(m.min_eigenvalue > 0.0))
        throw NonSpdError("initial conformation must be positive definite when a > 0", m.min_eigenvalue,
            std::ptrdiff_t(m.vertex));
    }
    result.records.push_back(compute_diagnostics(result.final_state, stepper.config()));
    if (observer) observer(result.final_state, result.records.back());
    for (int n = 1; n <= stepper.steps(); ++n)
    {
      StepReport report;
      try
      {
        report = stepper.step(result.final_state);
      }
      catch (const Error& e)
      {
        throw SimulationFailed(e.what(), result.final_state.t + stepper.dt());
      }
      // Land exactly on the grid of step times.
      result.final_state.t = n == stepper.steps() ? config.t_final : n * stepper.dt();
      result.records.push_back(compute_diagnostics(result.final_state, stepper.config(), report.fp_iterations));
      if (observer) observer(result.final_state, result.records.back());
    }
    return result;
  }

}  // namespace peterlin
