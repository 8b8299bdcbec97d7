// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PETERLIN_STATE_HPP
#define PETERLIN_STATE_HPP

#include "peterlin/mesh.hpp"

#include <functional>
#include <span>

namespace peterlin
{
  struct SolverConfig
  {
    double eta = 2.0;
    double epsilon = 1.0;
    double a = 0.0;
    double dt = 0.0;  ///< 0 selects dt = cfl_like * h
    double cfl_like = 0.5;
    double t_final = 1.0;
    double fp_tol = 1e-8;
    int fp_max_iters = 50;
    double lin_tol = 1e-10;
    int lin_max_iters = 5000;
    double delta_bp = 0.05;
    int assembly_degree = 2;
    int nonlinear_degree = 4;
    int diagnostics_degree = 4;
    bool velocity_first = true;

    /// Throws ValidationError naming the first offending field.
    void validate() const;

    /// Number of steps to reach t_final with steps no longer than the
    /// nominal dt (0 when t_final is 0).
    [[nodiscard]] int step_count(double h) const;
    /// The uniform step actually taken, t_final / step_count(h).
    [[nodiscard]] double effective_dt(double h) const;
  };

  /// (u, p, C) at time t. u and C are vertex-major P1 fields with arity dim
  /// and sym_size(dim); p is scalar.
  struct SimulationState
  {
    double t;
    NodalField u;
    NodalField p;
    NodalField C;
  };

  using FieldFunction = std::function<void(const Point&, std::span<double>)>;

  struct InitialData
  {
    FieldFunction velocity;
    FieldFunction conformation;
  };

  /// u_i = prod_c sin(2 pi x_c) for every component, C = I / sqrt(3).
  InitialData sine_initial_data(int dim);
  /// u = 0 with the stationary conformation I / sqrt(dim).
  InitialData equilibrium_initial_data(int dim);
  /// u = 0, C = 0.
  InitialData zero_initial_data(int dim);

  /// Diagonal value c with Phi(d c) = chi(d c) c, i.e. 1 / sqrt(dim).
  double equilibrium_value(int dim);

}  // namespace peterlin

#endif
