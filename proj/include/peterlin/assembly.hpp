// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PETERLIN_ASSEMBLY_HPP
#define PETERLIN_ASSEMBLY_HPP

#include "peterlin/mesh.hpp"
#include "peterlin/sparse.hpp"
#include "peterlin/tensor.hpp"

#include <functional>
#include <span>
#include <vector>

namespace peterlin
{
  // Vector-valued unknowns are numbered vertex-major: dof (v, c) -> v * arity + c.

  /// Consistent P1 mass matrix (exact element integrals).
  SparseMatrix mass_matrix(const StructuredSimplicialMesh& mesh);
  /// coefficient * (grad phi_i, grad phi_j), natural (Neumann) form.
  SparseMatrix stiffness_matrix(const StructuredSimplicialMesh& mesh, double coefficient);
  /// delta_bp * h^2 * stiffness, the equal-order pressure stabilization.
  SparseMatrix pressure_stabilization(const StructuredSimplicialMesh& mesh, double delta_bp);
  /// Rows: pressure vertices q. Columns: velocity dofs. Entry (phi_q, d_c phi_j).
  SparseMatrix divergence_matrix(const StructuredSimplicialMesh& mesh);
  /// eta * (D u, D v) over vector P1 fields, D the symmetric gradient.
  SparseMatrix viscous_matrix(const StructuredSimplicialMesh& mesh, double eta);
  /// (phi_i phi_j) for one scalar field replicated over `arity` components.
  SparseMatrix block_mass_matrix(const StructuredSimplicialMesh& mesh, int arity);

  /// Velocity gradient G(i, j) = d u_i / d x_j on element e (constant for P1).
  SmallMatrix velocity_gradient(const NodalField& u, std::size_t e);

  /// Entries (tr(C) C : grad(phi_i e_a)) by quadrature of the P1-interpolated C.
  std::vector<double> elastic_stress_load(const NodalField& conformation, const QuadratureRule& rule);

  double relaxation_phi(double trace_c, double a);
  double relaxation_chi(double trace_c, double a);
  /// Phi(tr C) I - chi(tr C) C.
  SymTensor relaxation_terms(const SymTensor& c, double a);
  /// (grad u) C + C (grad u)^T.
  SymTensor upper_convected_source(const SymTensor& c, const SmallMatrix& grad_u);

  /// Backtracked quadrature points X(x_q) = clamp(x_q - dt u(x_q)) with their
  /// host elements, for every quadrature point of every element.
  struct CharacteristicFeet
  {
    int points_per_element = 0;
    std::vector<Point> feet;
    std::vector<std::size_t> host;
    std::vector<Barycentric> bary;
  };

  CharacteristicFeet characteristic_feet(const NodalField& velocity, double dt, const QuadratureRule& rule);

  /// Entries (f(X(x)), phi_i) with f evaluated at the feet, one per
  /// (vertex, component) of `field`.
  std::vector<double> transported_rhs(
      const NodalField& field, const CharacteristicFeet& feet, const QuadratureRule& rule);

  /// (chi(tr C) phi_i, phi_j): the lagged reaction of the conformation equation.
  SparseMatrix reaction_matrix(const NodalField& conformation, double a, const QuadratureRule& rule);

  /// Entries ((grad u) C + C (grad u)^T + Phi(tr C) I, phi_i) per tensor component.
  std::vector<double> conformation_source(
      const NodalField& conformation, const NodalField& velocity, double a, const QuadratureRule& rule);

  using PointFunction = std::function<void(const Point&, std::span<double>)>;
  using FluxFunction = std::function<void(const Point&, const Point& normal, std::span<double>)>;

  /// Entries (f, phi_i) for a body load with `arity` components.
  std::vector<double> body_load(
      const StructuredSimplicialMesh& mesh, int arity, const QuadratureRule& rule, const PointFunction& f);
  /// Entries <g, phi_i> over the boundary, g depending on the outward normal.
  std::vector<double> boundary_load(const StructuredSimplicialMesh& mesh, int arity, const FluxFunction& g);

}  // namespace peterlin

#endif
