// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PETERLIN_MESH_HPP
#define PETERLIN_MESH_HPP

#include "peterlin/tensor.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace peterlin
{
  using Point = std::array<double, 3>;
  using Barycentric = std::array<double, 4>;

  /// A face of the triangulation lying on the boundary of the unit box.
  struct BoundaryFacet
  {
    std::size_t element;
    int opposite_vertex;  ///< local vertex of `element` not on the facet
    Point normal;         ///< outward unit normal
    double measure;       ///< length (2D) or area (3D)
  };

  /**
   * Uniform simplicial mesh of (0,1)^dim with M cells per side.
   *
   * Each cube cell is split along the Kuhn (Freudenthal) pattern: one simplex
   * per permutation of the axes, walking from the cell's lower corner. The
   * 2M mesh therefore refines the M mesh, and every coarse P1 function is a
   * fine P1 function. Elements of one cell are stored contiguously, cells in
   * lexicographic order with x fastest.
   */
  class StructuredSimplicialMesh
  {
   public:
    StructuredSimplicialMesh(int dim, int cells_per_side);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int cells_per_side() const noexcept { return cells_; }
    [[nodiscard]] double h() const noexcept { return 1.0 / cells_; }
    [[nodiscard]] int vertices_per_element() const noexcept { return dim_ + 1; }
    [[nodiscard]] int elements_per_cell() const noexcept { return dim_ == 2 ? 2 : 6; }

    [[nodiscard]] std::size_t vertex_count() const noexcept { return coords_.size(); }
    [[nodiscard]] std::size_t element_count() const noexcept { return volumes_.size(); }

    [[nodiscard]] const Point& vertex(std::size_t v) const { return coords_[v]; }
    [[nodiscard]] std::span<const int> element(std::size_t e) const
    {
      return {connectivity_.data() + e * (dim_ + 1), std::size_t(dim_ + 1)};
    }
    [[nodiscard]] bool on_boundary(std::size_t v) const { return boundary_[v] != 0; }
    [[nodiscard]] double volume(std::size_t e) const { return volumes_[e]; }
    /// Gradient of the barycentric coordinate of local vertex k (constant per element).
    [[nodiscard]] const Point& gradient(std::size_t e, int k) const { return gradients_[e * (dim_ + 1) + k]; }

    /// Integral of each hat function, i.e. the row sums of the mass matrix.
    [[nodiscard]] std::span<const double> lumped_mass() const { return lumped_; }
    [[nodiscard]] std::span<const BoundaryFacet> boundary_facets() const { return facets_; }

    [[nodiscard]] std::size_t vertex_index(int i, int j, int k = 0) const;
    [[nodiscard]] Barycentric barycentric(std::size_t e, const Point& x) const;
    [[nodiscard]] Point physical_point(std::size_t e, const Barycentric& bary) const;

   private:
    int dim_;
    int cells_;
    std::vector<Point> coords_;
    std::vector<char> boundary_;
    std::vector<int> connectivity_;
    std::vector<double> volumes_;
    std::vector<Point> gradients_;
    std::vector<double> lumped_;
    std::vector<BoundaryFacet> facets_;
  };

  using MeshPtr = std::shared_ptr<const StructuredSimplicialMesh>;

  MeshPtr build_mesh(int dim, int cells_per_side);

  struct Location
  {
    std::size_t element;
    Barycentric bary;
  };

  /// Host element of a point of the closed unit box. Points on shared faces
  /// go to the lowest-indexed element containing them.
  Location locate(const StructuredSimplicialMesh& mesh, const Point& x);

  /// Reference-simplex rule. Weights sum to the reference volume 1/dim!.
  struct QuadratureRule
  {
    int dim;
    int degree;  ///< exact for polynomials up to this total degree
    std::vector<Barycentric> points;
    std::vector<double> weights;
  };

  /// Smallest tabulated rule of at least the requested degree (up to 4 in
  /// 2D and 5 in 3D).
  QuadratureRule quadrature_rule(int dim, int degree);
  /// Rule on a facet (an edge in 2D, a triangle in 3D) in facet barycentrics.
  QuadratureRule facet_quadrature_rule(int dim);

  /// Sum over elements of the mapped quadrature of f(x).
  double integrate(const StructuredSimplicialMesh& mesh, const QuadratureRule& rule,
      const std::function<double(const Point&)>& integrand);

  /// Per-vertex P1 values with fixed arity, stored vertex-major.
  class NodalField
  {
   public:
    NodalField(MeshPtr mesh, int arity, double fill = 0.0);

    [[nodiscard]] const StructuredSimplicialMesh& mesh() const { return *mesh_; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const { return mesh_; }
    [[nodiscard]] int arity() const noexcept { return arity_; }

    [[nodiscard]] std::span<double> values() { return values_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::span<double> at(std::size_t v) { return {values_.data() + v * arity_, std::size_t(arity_)}; }
    [[nodiscard]] std::span<const double> at(std::size_t v) const
    {
      return {values_.data() + v * arity_, std::size_t(arity_)};
    }

    [[nodiscard]] SymTensor tensor(std::size_t v) const;
    void set_tensor(std::size_t v, const SymTensor& t);

   private:
    MeshPtr mesh_;
    int arity_;
    std::vector<double> values_;
  };

  /// Evaluates the P1 field on element e at the given barycentrics into out.
  void evaluate(const NodalField& field, std::size_t e, const Barycentric& bary, std::span<double> out);
  std::vector<double> interpolate(const NodalField& field, const Point& x);

  /// Nodal interpolant of f; f(x, out) must fill `arity` values.
  NodalField interpolate_function(
      MeshPtr mesh, int arity, const std::function<void(const Point&, std::span<double>)>& f);

  /// Evaluates a coarse field at every vertex of a mesh that refines it.
  NodalField prolongate(const NodalField& coarse, MeshPtr fine);

  /// Text dump: a "dim M arity" header, then one vertex per line with its
  /// coordinates and values, every number printed with 17 significant digits.
  void write_dump(std::ostream& os, const NodalField& field);
  NodalField read_dump(std::istream& is, MeshPtr mesh);

}  // namespace peterlin

#endif
