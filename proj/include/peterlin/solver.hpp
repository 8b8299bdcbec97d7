// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PETERLIN_SOLVER_HPP
#define PETERLIN_SOLVER_HPP

#include "peterlin/diagnostics.hpp"
#include "peterlin/mesh.hpp"
#include "peterlin/sparse.hpp"
#include "peterlin/state.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace peterlin
{
  /// Nodal interpolation of the initial data with boundary velocity set to 0
  /// and p = 0.
  SimulationState initial_state(MeshPtr mesh, const InitialData& data);

  /// Extra right-hand side of the conformation equation, evaluated at the new
  /// time level: a body term and a Neumann flux on the boundary.
  struct ConformationForcing
  {
    std::function<void(double t, const Point& x, std::span<double> out)> body;
    std::function<void(double t, const Point& x, const Point& normal, std::span<double> out)> flux;
  };

  struct ProblemOptions
  {
    /// Keep u (and p) as given and solve the conformation equation only.
    bool freeze_velocity = false;
    ConformationForcing forcing;
  };

  struct StepReport
  {
    double t = 0.0;  ///< time reached
    int fp_iterations = 0;
    double increment = 0.0;
    std::vector<double> increments;  ///< one per sweep
    std::vector<LinearSolveStats> velocity_solves;
    std::vector<LinearSolveStats> conformation_solves;  ///< sym_size solves per sweep
  };

  /// Advances states on one mesh with a fixed step. The velocity-pressure
  /// matrix does not change between steps and is factorized once.
  class TimeStepper
  {
   public:
    TimeStepper(MeshPtr mesh, const SolverConfig& config, ProblemOptions options = {});
    ~TimeStepper();
    TimeStepper(TimeStepper&&) noexcept;
    TimeStepper& operator=(TimeStepper&&) noexcept;

    [[nodiscard]] double dt() const;
    [[nodiscard]] int steps() const;
    [[nodiscard]] const SolverConfig& config() const;

    /// One step of size dt() from state.t. Throws FixedPointDiverged or
    /// LinearSolveFailed; `state` is left untouched on failure.
    StepReport step(SimulationState& state) const;

    /// The assembled velocity-pressure matrix after boundary elimination
    /// (velocity dofs first, then pressure).
    [[nodiscard]] const SparseMatrix& saddle_matrix() const;
    /// Solves the velocity-pressure system for a given momentum load
    /// (size dim * vertices) and returns [u; p] with zero-mean p.
    [[nodiscard]] std::vector<double> solve_saddle(std::span<const double> momentum_load, LinearSolveStats* stats = nullptr) const;

   private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
  };

  /// One step with a freshly built stepper.
  StepReport step(SimulationState& state, const SolverConfig& config, ProblemOptions options = {});

  using StepObserver = std::function<void(const SimulationState&, const DiagnosticsRecord&)>;

  struct RunResult
  {
    SimulationState final_state;
    std::vector<DiagnosticsRecord> records;  ///< initial record plus one per step
  };

  /// Runs from the initial data to config.t_final. The observer sees the
  /// initial state and every step. Step failures are rethrown as
  /// SimulationFailed carrying the time that was being reached.
  RunResult run(const SolverConfig& config, MeshPtr mesh, const InitialData& data, const StepObserver& observer = {},
      ProblemOptions options = {});

}  // namespace peterlin

#endif
