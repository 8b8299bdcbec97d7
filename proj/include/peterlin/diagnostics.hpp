// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PETERLIN_DIAGNOSTICS_HPP
#define PETERLIN_DIAGNOSTICS_HPP

#include "peterlin/state.hpp"

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace peterlin
{
  // Every integral below uses the quadrature rule of the given degree on the
  // P1 interpolated integrand (degree 4 unless stated otherwise).

  struct EnergyValues
  {
    double kinetic;        ///< 1/2 |u|^2
    double elastic_trace;  ///< 1/4 |tr C|^2
    double total;
  };

  EnergyValues energy(const SimulationState& state, int degree = 4);

  /// Total energy minus 1/2 of the integral of tr log C, the latter from nodal
  /// tr log values weighted by the lumped mass. Throws NonSpdError carrying
  /// the first vertex whose smallest eigenvalue is at or below the floor.
  double free_energy(const SimulationState& state, double floor = default_spd_floor, int degree = 4);

  struct SpdMargin
  {
    double min_eigenvalue;
    std::size_t vertex;
  };

  SpdMargin spd_monitor(const NodalField& conformation);

  /// L^2 norm of the elementwise divergence of a P1 velocity.
  double divergence_norm(const NodalField& velocity);

  struct DiagnosticsRecord
  {
    double t = 0.0;
    double kinetic = 0.0;
    double elastic_trace = 0.0;
    double frobenius = 0.0;
    double log_term = 0.0;  ///< NaN when C is not SPD at some vertex
    double visc_diss = 0.0;
    double trace_grad_diss = 0.0;
    double relax_diss = 0.0;
    double source = 0.0;
    double free_energy = 0.0;  ///< NaN together with log_term
    double min_eig = 0.0;
    std::size_t min_eig_vertex = 0;
    double div_norm = 0.0;
    int fp_iters = 0;

    [[nodiscard]] double total_energy() const { return kinetic + elastic_trace; }
    [[nodiscard]] double dissipation() const { return visc_diss + trace_grad_diss + relax_diss; }
  };

  /// Energies, dissipation rates and monitors of one state. The source term
  /// is (dim/2) times the integral of |tr C|^2 + a tr C, the rate at which
  /// the Phi I production feeds the trace energy.
  DiagnosticsRecord compute_diagnostics(const SimulationState& state, const SolverConfig& config, int fp_iters = 0);

  /// residual_n = E_n + sum_{m=1..n} (t_m - t_{m-1}) (dissipation_m - source_m) - E_0,
  /// rates taken at the right end of each step. Entry 0 is 0.
  std::vector<double> energy_inequality_residual(const std::vector<DiagnosticsRecord>& records);

  struct RelativeEnergyRecord
  {
    double t = 0.0;
    double e_kin = 0.0;   ///< 1/2 |u - U|^2
    double e_el = 0.0;    ///< 1/4 |tr(C - H)|^2
    double e_frob = 0.0;  ///< 1/2 |C - H|^2
    double total = 0.0;
  };

  /// Both states must live on the same mesh (prolongate first otherwise).
  RelativeEnergyRecord relative_energy(const SimulationState& a, const SimulationState& b, int degree = 4);
  /// Same functional against analytic fields evaluated at quadrature points.
  RelativeEnergyRecord relative_energy_to_exact(
      const SimulationState& a, const FieldFunction& velocity, const FieldFunction& conformation, int degree = 4);

  struct RelativeDissipation
  {
    double viscous;          ///< eta |Du - DU|^2
    double trace_gradient;   ///< eps/2 |grad tr(C - H)|^2
    double trace_reaction;   ///< 1/2 |sqrt(chi) tr(C - H)|^2
    double tensor_reaction;  ///< |sqrt(chi) (C - H)|^2
    double tensor_gradient;  ///< eps |grad(C - H)|^2
  };

  /// chi is evaluated from the trace of `a`'s conformation.
  RelativeDissipation relative_dissipation(
      const SimulationState& a, const SimulationState& b, const SolverConfig& config, int degree = 4);

  /// L^2 distance between a P1 field and an analytic field.
  double l2_error(const NodalField& field, const FieldFunction& exact, int degree = 4);

  struct EocTable
  {
    std::vector<double> h;
    std::vector<double> errors;
    std::vector<double> rates;  ///< rates[i] = log2(errors[i] / errors[i+1])
  };

  /// Needs at least two levels with strictly halving h and positive errors.
  EocTable eoc(const std::vector<std::pair<double, double>>& levels);

  /// Both sides of -grad D :: grad D^-1 >= (1/dim) |grad tr log D|^2 for an
  /// analytic SPD field with analytic partial derivatives.
  struct InverseGradientCheck
  {
    double lhs;
    double rhs;
  };

  using TensorFunction = std::function<SymTensor(const Point&)>;
  using TensorDerivative = std::function<SymTensor(const Point&, int axis)>;

  InverseGradientCheck inverse_gradient_check(
      const StructuredSimplicialMesh& mesh, const TensorFunction& d, const TensorDerivative& grad_d, int degree = 4);

}  // namespace peterlin

#endif
