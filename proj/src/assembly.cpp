// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/assembly.hpp"

#include "peterlin/error.hpp"

#include <algorithm>
#include <cmath>

namespace peterlin
{
  namespace
  {
    double reference_jacobian(int dim) { return dim == 2 ? 2.0 : 6.0; }

    template <typename LocalMatrix>
    SparseMatrix assemble_scalar(const StructuredSimplicialMesh& mesh, LocalMatrix&& local)
    {
      const std::size_t nv = mesh.vertex_count();
      const int nvpe = mesh.vertices_per_element();
      TripletBuilder t(nv, nv);
      t.reserve(mesh.element_count() * nvpe * nvpe);
      std::array<std::array<double, 4>, 4> k{};
      for (std::size_t e = 0; e < mesh.element_count(); ++e)
      {
        local(e, k);
        const auto ev = mesh.element(e);
        for (int i = 0; i < nvpe; ++i)
          for (int j = 0; j < nvpe; ++j) t.add(ev[i], ev[j], k[i][j]);
      }
      return t.build();
    }

    double dot(const Point& a, const Point& b, int dim)
    {
      double s = 0.0;
      for (int c = 0; c < dim; ++c) s += a[c] * b[c];
      return s;
    }

    void check_rule(const StructuredSimplicialMesh& mesh, const QuadratureRule& rule)
    {
      if (rule.dim != mesh.dim()) throw DimensionMismatch("quadrature rule and mesh dimensions differ");
    }
  }  // namespace

  SparseMatrix mass_matrix(const StructuredSimplicialMesh& mesh)
  {
    const int d = mesh.dim();
    const double denom = (d + 1.0) * (d + 2.0);
    return assemble_scalar(mesh, [&](std::size_t e, auto& k) {
      const double v = mesh.volume(e) / denom;
      for (int i = 0; i <= d; ++i)
        for (int j = 0; j <= d; ++j) k[i][j] = i == j ? 2.0 * v : v;
    });
  }

  SparseMatrix stiffness_matrix(const StructuredSimplicialMesh& mesh, double coefficient)
  {
    if (coefficient < 0.0) throw ValidationError("stiffness coefficient must be non-negative");
    const int d = mesh.dim();
    return assemble_scalar(mesh, [&](std::size_t e, auto& k) {
      const double v = coefficient * mesh.volume(e);
      for (int i = 0; i <= d; ++i)
        for (int j = 0; j <= d; ++j) k[i][j] = v * dot(mesh.gradient(e, i), mesh.gradient(e, j), d);
    });
  }

  SparseMatrix pressure_stabilization(const StructuredSimplicialMesh& mesh, double delta_bp)
  {
    if (!(delta_bp > 0.0)) throw ValidationError("pressure stabilization constant must be positive");
    return stiffness_matrix(mesh, delta_bp * mesh.h() * mesh.h());
  }

  SparseMatrix divergence_matrix(const StructuredSimplicialMesh& mesh)
  {
    const int d = mesh.dim();
    const std::size_t nv = mesh.vertex_count();
    TripletBuilder t(nv, nv * d);
    t.reserve(mesh.element_count() * (d + 1) * (d + 1) * d);
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const auto ev = mesh.element(e);
      const double mean = mesh.volume(e) / (d + 1.0);  // integral of phi_q over the element
      for (int q = 0; q <= d; ++q)
        for (int j = 0; j <= d; ++j)
          for (int c = 0; c < d; ++c)
            t.add(ev[q], std::size_t(ev[j]) * d + c, mean * mesh.gradient(e, j)[c]);
    }
    return t.build();
  }

  SparseMatrix viscous_matrix(const StructuredSimplicialMesh& mesh, double eta)
  {
    const int d = mesh.dim();
    const std::size_t n = mesh.vertex_count() * d;
    TripletBuilder t(n, n);
    t.reserve(mesh.element_count() * (d + 1) * (d + 1) * d * d);
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const auto ev = mesh.element(e);
      const double w = 0.5 * eta * mesh.volume(e);
      for (int i = 0; i <= d; ++i)
      {
        const Point& gi = mesh.gradient(e, i);
        for (int j = 0; j <= d; ++j)
        {
          const Point& gj = mesh.gradient(e, j);
          const double gg = dot(gi, gj, d);
          // D(phi_j e_b) : D(phi_i e_a) = (delta_ab gi.gj + (gi)_b (gj)_a) / 2
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
              t.add(std::size_t(ev[i]) * d + a, std::size_t(ev[j]) * d + b,
                  w * ((a == b ? gg : 0.0) + gi[b] * gj[a]));
        }
      }
    }
    return t.build();
  }

  SparseMatrix block_mass_matrix(const StructuredSimplicialMesh& mesh, int arity)
  {
    const SparseMatrix m = mass_matrix(mesh);
    TripletBuilder t(m.rows() * arity, m.cols() * arity);
    t.reserve(m.nonzeros() * arity);
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t k = m.row_offsets()[r]; k < m.row_offsets()[r + 1]; ++k)
        for (int c = 0; c < arity; ++c) t.add(r * arity + c, m.columns()[k] * arity + c, m.values()[k]);
    return t.build();
  }

  SmallMatrix velocity_gradient(const NodalField& u, std::size_t e)
  {
    const auto& mesh = u.mesh();
    const int d = mesh.dim();
    if (u.arity() != d) throw DimensionMismatch("velocity field arity must equal the mesh dimension");
    SmallMatrix g(d);
    const auto ev = mesh.element(e);
    for (int k = 0; k <= d; ++k)
    {
      const Point& grad = mesh.gradient(e, k);
      const auto uv = u.at(ev[k]);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) += uv[i] * grad[j];
    }
    return g;
  }

  std::vector<double> elastic_stress_load(const NodalField& conformation, const QuadratureRule& rule)
  {
    const auto& mesh = conformation.mesh();
    check_rule(mesh, rule);
    const int d = mesh.dim();
    if (conformation.arity() != sym_size(d)) throw DimensionMismatch("conformation arity mismatch");
    std::vector<double> load(mesh.vertex_count() * d, 0.0);
    const double jac = reference_jacobian(d);
    std::array<double, 6> cv{};
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const auto ev = mesh.element(e);
      const double vol = jac * mesh.volume(e);
      for (std::size_t q = 0; q < rule.points.size(); ++q)
      {
        evaluate(conformation, e, rule.points[q], cv);
        const SymTensor c = SymTensor::from_components(d, {cv.data(), std::size_t(sym_size(d))});
        const double tr = trace(c);
        const double w = rule.weights[q] * vol * tr;
        for (int i = 0; i <= d; ++i)
        {
          const Point& g = mesh.gradient(e, i);
          for (int a = 0; a < d; ++a)
          {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += c(a, k) * g[k];
            load[std::size_t(ev[i]) * d + a] += w * s;
          }
        }
      }
    }
    return load;
  }

  double relaxation_phi(double trace_c, double a) { return trace_c + a; }

  double relaxation_chi(double trace_c, double a) { return trace_c * trace_c + a * std::abs(trace_c); }

  SymTensor relaxation_terms(const SymTensor& c, double a)
  {
    const double tr = trace(c);
    return SymTensor::identity(c.dim()) * relaxation_phi(tr, a) - c * relaxation_chi(tr, a);
  }

  SymTensor upper_convected_source(const SymTensor& c, const SmallMatrix& grad_u) { return upper_convected(c, grad_u); }

  CharacteristicFeet characteristic_feet(const NodalField& velocity, double dt, const QuadratureRule& rule)
  {
    const auto& mesh = velocity.mesh();
    check_rule(mesh, rule);
    const int d = mesh.dim();
    if (velocity.arity() != d) throw DimensionMismatch("velocity field arity must equal the mesh dimension");
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");

    CharacteristicFeet out;
    out.points_per_element = int(rule.points.size());
    const std::size_t total = mesh.element_count() * rule.points.size();
    out.feet.resize(total);
    out.host.resize(total);
    out.bary.resize(total);
    std::array<double, 3> uq{};
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
      for (std::size_t q = 0; q < rule.points.size(); ++q)
      {
        const std::size_t slot = e * rule.points.size() + q;
        const Point x = mesh.physical_point(e, rule.points[q]);
        evaluate(velocity, e, rule.points[q], uq);
        Point foot{0.0, 0.0, 0.0};
        for (int c = 0; c < d; ++c) foot[c] = std::clamp(x[c] - dt * uq[c], 0.0, 1.0);
        if (dt * std::abs(uq[0]) + dt * std::abs(uq[1]) + dt * std::abs(uq[2]) == 0.0)
        {
          // Zero displacement: the foot is the quadrature point of this element.
          out.feet[slot] = x;
          out.host[slot] = e;
          out.bary[slot] = rule.points[q];
          continue;
        }
        const Location loc = locate(mesh, foot);
        out.feet[slot] = foot;
        out.host[slot] = loc.element;
        out.bary[slot] = loc.bary;
      }
    return out;
  }

  std::vector<double> transported_rhs(
      const NodalField& field, const CharacteristicFeet& feet, const QuadratureRule& rule)
  {
    const auto& mesh = field.mesh();
    check_rule(mesh, rule);
    if (feet.points_per_element != int(rule.points.size()) ||
        feet.host.size() != mesh.element_count() * rule.points.size())
      throw MeshMismatch("characteristic feet were built for a different mesh or rule");
    const int d = mesh.dim();
    const int ar = field.arity();
    std::vector<double> rhs(mesh.vertex_count() * ar, 0.0);
    const double jac = reference_jacobian(d);
    std::array<double, 6> fv{};
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const auto ev = mesh.element(e);
      const double vol = jac * mesh.volume(e);
      for (std::size_t q = 0; q < rule.points.size(); ++q)
      {
        const std::size_t slot = e * rule.points.size() + q;
        evaluate(field, feet.host[slot], feet.bary[slot], fv);
        const double w = rule.weights[q] * vol;
        for (int i = 0; i <= d; ++i)
        {
          const double wi = w * rule.points[q][i];
          double* dst = rhs.data() + std::size_t(ev[i]) * ar;
          for (int c = 0; c < ar; ++c) dst[c] += wi * fv[c];
        }
      }
    }
    return rhs;
  }

  SparseMatrix reaction_matrix(const NodalField& conformation, double a, const QuadratureRule& rule)
  {
    const auto& mesh = conformation.mesh();
    check_rule(mesh, rule);
    const int d = mesh.dim();
    const double jac = reference_jacobian(d);
    std::array<double, 6> cv{};
    return assemble_scalar(mesh, [&](std::size_t e, auto& k) {
      for (auto& row : k) row.fill(0.0);
      const double vol = jac * mesh.volume(e);
      for (std::size_t q = 0; q < rule.points.size(); ++q)
      {
        evaluate(conformation, e, rule.points[q], cv);
        double tr = 0.0;
        for (int c = 0; c < d; ++c) tr += cv[c];
        const double w = rule.weights[q] * vol * relaxation_chi(tr, a);
        const Barycentric& l = rule.points[q];
        for (int i = 0; i <= d; ++i)
          for (int j = 0; j <= d; ++j) k[i][j] += w * l[i] * l[j];
      }
    });
  }

  std::vector<double> conformation_source(
      const NodalField& conformation, const NodalField& velocity, double a, const QuadratureRule& rule)
  {
    const auto& mesh = conformation.mesh();
    check_rule(mesh, rule);
    const int d = mesh.dim();
    const int ns = sym_size(d);
    if (conformation.arity() != ns) throw DimensionMismatch("conformation arity mismatch");
    std::vector<double> rhs(mesh.vertex_count() * ns, 0.0);
    const double jac = reference_jacobian(d);
    std::array<double, 6> cv{};
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const auto ev = mesh.element(e);
      const SmallMatrix g = velocity_gradient(velocity, e);
      const double vol = jac * mesh.volume(e);
      for (std::size_t q = 0; q < rule.points.size(); ++q)
      {
        evaluate(conformation, e, rule.points[q], cv);
        const SymTensor c = SymTensor::from_components(d, {cv.data(), std::size_t(ns)});
        SymTensor s = upper_convected(c, g);
        const double phi = relaxation_phi(trace(c), a);
        for (int i = 0; i < d; ++i) s.component(i) += phi;
        const double w = rule.weights[q] * vol;
        for (int i = 0; i <= d; ++i)
        {
          const double wi = w * rule.points[q][i];
          double* dst = rhs.data() + std::size_t(ev[i]) * ns;
          for (int k = 0; k < ns; ++k) dst[k] += wi * s.component(k);
        }
      }
    }
    return rhs;
  }

  std::vector<double> body_load(
      const StructuredSimplicialMesh& mesh, int arity, const QuadratureRule& rule, const PointFunction& f)
  {
    check_rule(mesh, rule);
    const int d = mesh.dim();
    std::vector<double> rhs(mesh.vertex_count() * arity, 0.0);
    std::vector<double> val(arity);
    const double jac = reference_jacobian(d);
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const auto ev = mesh.element(e);
      const double vol = jac * mesh.volume(e);
      for (std::size_t q = 0; q < rule.points.size(); ++q)
      {
        std::fill(val.begin(), val.end(), 0.0);
        f(mesh.physical_point(e, rule.points[q]), val);
        const double w = rule.weights[q] * vol;
        for (int i = 0; i <= d; ++i)
          for (int c = 0; c < arity; ++c) rhs[std::size_t(ev[i]) * arity + c] += w * rule.points[q][i] * val[c];
      }
    }
    return rhs;
  }

  std::vector<double> boundary_load(const StructuredSimplicialMesh& mesh, int arity, const FluxFunction& g)
  {
    const int d = mesh.dim();
    const QuadratureRule rule = facet_quadrature_rule(d);
    const double ref_measure = d == 2 ? 1.0 : 0.5;
    std::vector<double> rhs(mesh.vertex_count() * arity, 0.0);
    std::vector<double> val(arity);
    for (const BoundaryFacet& f : mesh.boundary_facets())
    {
      const auto ev = mesh.element(f.element);
      std::array<int, 3> fv{};
      int m = 0;
      for (int s = 0; s <= d; ++s)
        if (s != f.opposite_vertex) fv[m++] = ev[s];
      for (std::size_t q = 0; q < rule.points.size(); ++q)
      {
        Point x{0.0, 0.0, 0.0};
        for (int s = 0; s < d; ++s)
          for (int c = 0; c < 3; ++c) x[c] += rule.points[q][s] * mesh.vertex(fv[s])[c];
        std::fill(val.begin(), val.end(), 0.0);
        g(x, f.normal, val);
        const double w = rule.weights[q] * f.measure / ref_measure;
        for (int s = 0; s < d; ++s)
          for (int c = 0; c < arity; ++c) rhs[std::size_t(fv[s]) * arity + c] += w * rule.points[q][s] * val[c];
      }
    }
    return rhs;
  }

}  // namespace peterlin
