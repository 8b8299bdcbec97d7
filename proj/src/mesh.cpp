// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/mesh.hpp"

#include "peterlin/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace peterlin
{
  namespace
  {
    constexpr double bary_tolerance = 1e-12;

    double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

    // Inverse of the dim x dim matrix whose columns are the edge vectors.
    void invert_jacobian(int dim, const std::array<Point, 3>& edges, std::array<Point, 3>& inv, double& det)
    {
      if (dim == 2)
      {
        const double a = edges[0][0], b = edges[1][0];
        const double c = edges[0][1], d = edges[1][1];
        det = a * d - b * c;
        inv[0] = {d / det, -b / det, 0.0};
        inv[1] = {-c / det, a / det, 0.0};
        return;
      }
      // J(i, j) = edges[j][i]
      auto J = [&](int i, int j) { return edges[j][i]; };
      det = J(0, 0) * (J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1)) -
            J(0, 1) * (J(1, 0) * J(2, 2) - J(1, 2) * J(2, 0)) +
            J(0, 2) * (J(1, 0) * J(2, 1) - J(1, 1) * J(2, 0));
      const double id = 1.0 / det;
      inv[0] = {(J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1)) * id, (J(0, 2) * J(2, 1) - J(0, 1) * J(2, 2)) * id,
          (J(0, 1) * J(1, 2) - J(0, 2) * J(1, 1)) * id};
      inv[1] = {(J(1, 2) * J(2, 0) - J(1, 0) * J(2, 2)) * id, (J(0, 0) * J(2, 2) - J(0, 2) * J(2, 0)) * id,
          (J(0, 2) * J(1, 0) - J(0, 0) * J(1, 2)) * id};
      inv[2] = {(J(1, 0) * J(2, 1) - J(1, 1) * J(2, 0)) * id, (J(0, 1) * J(2, 0) - J(0, 0) * J(2, 1)) * id,
          (J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0)) * id};
    }

    bool inside(const Barycentric& b, int nv)
    {
      for (int k = 0; k < nv; ++k)
        if (b[k] < -bary_tolerance || b[k] > 1.0 + bary_tolerance) return false;
      return true;
    }
  }  // namespace

  StructuredSimplicialMesh::StructuredSimplicialMesh(int dim, int cells_per_side)
      : dim_(dim), cells_(cells_per_side)
  {
    if (dim != 2 && dim != 3) throw ValidationError("mesh dimension must be 2 or 3");
    if (cells_per_side < 1) throw ValidationError("cells per side must be at least 1");

    const int n = cells_ + 1;
    const std::size_t nv = dim == 2 ? std::size_t(n) * n : std::size_t(n) * n * n;
    coords_.resize(nv);
    boundary_.assign(nv, 0);
    const int nk = dim == 2 ? 1 : n;
    for (int k = 0; k < nk; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
        {
          const std::size_t v = vertex_index(i, j, k);
          coords_[v] = {double(i) / cells_, double(j) / cells_, dim == 2 ? 0.0 : double(k) / cells_};
          const bool bnd = i == 0 || i == cells_ || j == 0 || j == cells_ ||
                           (dim == 3 && (k == 0 || k == cells_));
          boundary_[v] = bnd ? 1 : 0;
        }

    // Axis permutations define the Kuhn simplices of one cell.
    std::vector<std::array<int, 3>> perms;
    std::array<int, 3> p{0, 1, 2};
    do
    {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.begin() + dim));

    const int nvpe = dim + 1;
    const int kc = dim == 2 ? 1 : cells_;
    const std::size_t ncells = std::size_t(cells_) * cells_ * kc;
    connectivity_.reserve(ncells * perms.size() * nvpe);
    for (int k = 0; k < kc; ++k)
      for (int j = 0; j < cells_; ++j)
        for (int i = 0; i < cells_; ++i)
          for (const auto& perm : perms)
          {
            std::array<int, 3> idx{i, j, k};
            std::array<int, 4> verts{};
            verts[0] = int(vertex_index(idx[0], idx[1], idx[2]));
            for (int s = 0; s < dim; ++s)
            {
              idx[perm[s]] += 1;
              verts[s + 1] = int(vertex_index(idx[0], idx[1], idx[2]));
            }
            for (int s = 0; s < nvpe; ++s) connectivity_.push_back(verts[s]);
          }

    const std::size_t ne = connectivity_.size() / nvpe;
    volumes_.resize(ne);
    gradients_.resize(ne * nvpe);
    lumped_.assign(nv, 0.0);
    const double fact = factorial(dim);
    for (std::size_t e = 0; e < ne; ++e)
    {
      int* ev = connectivity_.data() + e * nvpe;
      std::array<Point, 3> edges{};
      auto build_edges = [&] {
        for (int s = 0; s < dim; ++s)
          for (int c = 0; c < 3; ++c) edges[s][c] = coords_[ev[s + 1]][c] - coords_[ev[0]][c];
      };
      build_edges();
      std::array<Point, 3> inv{};
      double det = 0.0;
      invert_jacobian(dim, edges, inv, det);
      if (det < 0.0)
      {
        std::swap(ev[dim - 1], ev[dim]);
        build_edges();
        invert_jacobian(dim, edges, inv, det);
      }
      volumes_[e] = det / fact;
      Point g0{0.0, 0.0, 0.0};
      for (int s = 0; s < dim; ++s)
      {
        gradients_[e * nvpe + s + 1] = inv[s];
        for (int c = 0; c < 3; ++c) g0[c] -= inv[s][c];
      }
      gradients_[e * nvpe] = g0;
      for (int s = 0; s < nvpe; ++s) lumped_[ev[s]] += volumes_[e] / nvpe;
    }

    // Boundary facets: all vertices of the facet share a boundary coordinate plane.
    for (std::size_t e = 0; e < ne; ++e)
    {
      const int* ev = connectivity_.data() + e * nvpe;
      for (int opp = 0; opp < nvpe; ++opp)
        for (int axis = 0; axis < dim; ++axis)
          for (double side : {0.0, 1.0})
          {
            bool on_plane = true;
            for (int s = 0; s < nvpe && on_plane; ++s)
              if (s != opp && coords_[ev[s]][axis] != side) on_plane = false;
            if (!on_plane) continue;
            BoundaryFacet f{};
            f.element = e;
            f.opposite_vertex = opp;
            f.normal = {0.0, 0.0, 0.0};
            f.normal[axis] = side == 0.0 ? -1.0 : 1.0;
            std::array<Point, 3> fv{};
            int m = 0;
            for (int s = 0; s < nvpe; ++s)
              if (s != opp) fv[m++] = coords_[ev[s]];
            if (dim == 2)
            {
              f.measure = std::hypot(fv[1][0] - fv[0][0], fv[1][1] - fv[0][1]);
            }
            else
            {
              const Point a{fv[1][0] - fv[0][0], fv[1][1] - fv[0][1], fv[1][2] - fv[0][2]};
              const Point b{fv[2][0] - fv[0][0], fv[2][1] - fv[0][1], fv[2][2] - fv[0][2]};
              const Point cr{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
              f.measure = 0.5 * std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
            }
            facets_.push_back(f);
          }
    }
  }

  std::size_t StructuredSimplicialMesh::vertex_index(int i, int j, int k) const
  {
    const std::size_t n = cells_ + 1;
    return std::size_t(i) + n * (std::size_t(j) + n * std::size_t(k));
  }

  Barycentric StructuredSimplicialMesh::barycentric(std::size_t e, const Point& x) const
  {
    const std::span<const int> ev = element(e);
    const Point& x0 = coords_[ev[0]];
    Barycentric b{};
    double rest = 1.0;
    for (int k = 1; k <= dim_; ++k)
    {
      const Point& g = gradient(e, k);
      double s = 0.0;
      for (int c = 0; c < dim_; ++c) s += g[c] * (x[c] - x0[c]);
      b[k] = s;
      rest -= s;
    }
    b[0] = rest;
    return b;
  }

  Point StructuredSimplicialMesh::physical_point(std::size_t e, const Barycentric& bary) const
  {
    Point x{0.0, 0.0, 0.0};
    const std::span<const int> ev = element(e);
    for (int k = 0; k <= dim_; ++k)
      for (int c = 0; c < 3; ++c) x[c] += bary[k] * coords_[ev[k]][c];
    return x;
  }

  MeshPtr build_mesh(int dim, int cells_per_side)
  {
    return std::make_shared<const StructuredSimplicialMesh>(dim, cells_per_side);
  }

  Location locate(const StructuredSimplicialMesh& mesh, const Point& x_in)
  {
    const int dim = mesh.dim();
    const int m = mesh.cells_per_side();
    Point x = x_in;
    for (int c = 0; c < dim; ++c)
    {
      if (!std::isfinite(x[c])) throw Error("cannot locate a non-finite point");
      x[c] = std::clamp(x[c], 0.0, 1.0);
    }

    // Candidate cell ranges per axis; both neighbours when the point sits on a cell face.
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int c = 0; c < dim; ++c)
    {
      const double s = x[c] * m;
      const double r = std::round(s);
      if (std::abs(s - r) <= 1e-10)
      {
        lo[c] = std::max(0, int(r) - 1);
        hi[c] = std::min(m - 1, int(r));
      }
      else
      {
        lo[c] = hi[c] = std::clamp(int(std::floor(s)), 0, m - 1);
      }
    }

    const int epc = mesh.elements_per_cell();
    const int nvpe = dim + 1;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    Barycentric best_bary{};
    for (int k = lo[2]; k <= hi[2]; ++k)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int i = lo[0]; i <= hi[0]; ++i)
        {
          const std::size_t cell = std::size_t(i) + std::size_t(m) * (std::size_t(j) + std::size_t(m) * k);
          for (int s = 0; s < epc; ++s)
          {
            const std::size_t e = cell * epc + s;
            if (e >= best) break;
            const Barycentric b = mesh.barycentric(e, x);
            if (inside(b, nvpe))
            {
              best = e;
              best_bary = b;
              break;
            }
          }
        }
    if (best != std::numeric_limits<std::size_t>::max()) return {best, best_bary};

    // Fallback: element with the largest minimum barycentric coordinate.
    double best_min = -std::numeric_limits<double>::infinity();
    std::size_t best_e = 0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const Barycentric b = mesh.barycentric(e, x);
      const double mn = *std::min_element(b.begin(), b.begin() + nvpe);
      if (mn > best_min)
      {
        best_min = mn;
        best_e = e;
        best_bary = b;
      }
    }
    return {best_e, best_bary};
  }

  QuadratureRule quadrature_rule(int dim, int degree)
  {
    QuadratureRule r{dim, 0, {}, {}};
    auto add = [&](Barycentric p, double w) {
      r.points.push_back(p);
      r.weights.push_back(w);
    };
    if (dim == 2)
    {
      if (degree <= 1)
      {
        r.degree = 1;
        add({1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0}, 0.5);
      }
      else if (degree == 2)
      {
        r.degree = 2;
        add({2.0 / 3, 1.0 / 6, 1.0 / 6, 0.0}, 1.0 / 6);
        add({1.0 / 6, 2.0 / 3, 1.0 / 6, 0.0}, 1.0 / 6);
        add({1.0 / 6, 1.0 / 6, 2.0 / 3, 0.0}, 1.0 / 6);
      }
      else if (degree <= 4)
      {
        r.degree = 4;
        const double a = 0.445948490915964886, wa = 0.5 * 0.223381589678011466;
        const double b = 0.091576213509770743, wb = 0.5 * 0.109951743655321868;
        for (auto [p, w] : {std::pair{a, wa}, std::pair{b, wb}})
        {
          add({1.0 - 2.0 * p, p, p, 0.0}, w);
          add({p, 1.0 - 2.0 * p, p, 0.0}, w);
          add({p, p, 1.0 - 2.0 * p, 0.0}, w);
        }
      }
      else
      {
        throw ValidationError("no triangle quadrature rule of degree " + std::to_string(degree));
      }
      return r;
    }
    if (dim != 3) throw ValidationError("quadrature dimension must be 2 or 3");
    if (degree <= 1)
    {
      r.degree = 1;
      add({0.25, 0.25, 0.25, 0.25}, 1.0 / 6);
    }
    else if (degree == 2)
    {
      r.degree = 2;
      const double a = 0.5854101966249685, b = 0.1381966011250105;
      for (int k = 0; k < 4; ++k)
      {
        Barycentric p{b, b, b, b};
        p[k] = a;
        add(p, 1.0 / 24);
      }
    }
    else if (degree <= 5)
    {
      // 14-point rule with positive weights.
      r.degree = 5;
      const double a1 = 0.3108859192633006, w1 = 0.1126879257180162 / 6;
      const double a2 = 0.0927352503108912, w2 = 0.0734930431163619 / 6;
      const double b = 0.0455037041256496, w3 = 0.0425460207770812 / 6;
      for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}})
        for (int k = 0; k < 4; ++k)
        {
          Barycentric p{a, a, a, a};
          p[k] = 1.0 - 3.0 * a;
          add(p, w);
        }
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
        {
          Barycentric p{0.5 - b, 0.5 - b, 0.5 - b, 0.5 - b};
          p[i] = b;
          p[j] = b;
          add(p, w3);
        }
    }
    else
    {
      throw ValidationError("no tetrahedron quadrature rule of degree " + std::to_string(degree));
    }
    return r;
  }

  QuadratureRule facet_quadrature_rule(int dim)
  {
    if (dim == 3)
    {
      QuadratureRule tri = quadrature_rule(2, 4);
      tri.dim = 2;
      return tri;
    }
    // 3-point Gauss-Legendre on the unit edge.
    QuadratureRule r{1, 5, {}, {}};
    const double g = 0.5 * std::sqrt(3.0 / 5.0);
    for (auto [s, w] : {std::pair{0.5 - g, 5.0 / 18}, std::pair{0.5, 8.0 / 18}, std::pair{0.5 + g, 5.0 / 18}})
    {
      r.points.push_back({1.0 - s, s, 0.0, 0.0});
      r.weights.push_back(w);
    }
    return r;
  }

  double integrate(const StructuredSimplicialMesh& mesh, const QuadratureRule& rule,
      const std::function<double(const Point&)>& integrand)
  {
    if (rule.dim != mesh.dim()) throw DimensionMismatch("quadrature rule and mesh dimensions differ");
    const double jac = factorial(mesh.dim());
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      double local = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q)
        local += rule.weights[q] * integrand(mesh.physical_point(e, rule.points[q]));
      total += local * jac * mesh.volume(e);
    }
    return total;
  }

  NodalField::NodalField(MeshPtr mesh, int arity, double fill)
      : mesh_(std::move(mesh)), arity_(arity), values_(mesh_->vertex_count() * std::size_t(arity), fill)
  {
    if (arity < 1) throw ValidationError("field arity must be positive");
  }

  SymTensor NodalField::tensor(std::size_t v) const
  {
    return SymTensor::from_components(mesh_->dim(), at(v));
  }

  void NodalField::set_tensor(std::size_t v, const SymTensor& t)
  {
    if (t.size() != arity_) throw DimensionMismatch("tensor size does not match field arity");
    std::copy(t.components().begin(), t.components().end(), at(v).begin());
  }

  void evaluate(const NodalField& field, std::size_t e, const Barycentric& bary, std::span<double> out)
  {
    const int ar = field.arity();
    std::fill(out.begin(), out.begin() + ar, 0.0);
    const std::span<const int> ev = field.mesh().element(e);
    const std::span<const double> vals = field.values();
    for (std::size_t k = 0; k < ev.size(); ++k)
    {
      const double* src = vals.data() + std::size_t(ev[k]) * ar;
      for (int c = 0; c < ar; ++c) out[c] += bary[k] * src[c];
    }
  }

  std::vector<double> interpolate(const NodalField& field, const Point& x)
  {
    const Location loc = locate(field.mesh(), x);
    std::vector<double> out(field.arity());
    evaluate(field, loc.element, loc.bary, out);
    return out;
  }

  NodalField interpolate_function(
      MeshPtr mesh, int arity, const std::function<void(const Point&, std::span<double>)>& f)
  {
    NodalField field(mesh, arity);
    for (std::size_t v = 0; v < mesh->vertex_count(); ++v) f(mesh->vertex(v), field.at(v));
    return field;
  }

  NodalField prolongate(const NodalField& coarse, MeshPtr fine)
  {
    const auto& cm = coarse.mesh();
    if (fine->dim() != cm.dim() || fine->cells_per_side() % cm.cells_per_side() != 0)
      throw MeshMismatch("prolongation target does not refine the source mesh");
    NodalField out(fine, coarse.arity());
    for (std::size_t v = 0; v < fine->vertex_count(); ++v)
    {
      const Location loc = locate(cm, fine->vertex(v));
      evaluate(coarse, loc.element, loc.bary, out.at(v));
    }
    return out;
  }

  void write_dump(std::ostream& os, const NodalField& field)
  {
    const auto& mesh = field.mesh();
    os << mesh.dim() << ' ' << mesh.cells_per_side() << ' ' << field.arity() << '\n';
    char buf[32];
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
    {
      std::string line;
      for (int c = 0; c < mesh.dim(); ++c)
      {
        std::snprintf(buf, sizeof buf, "%.17g", mesh.vertex(v)[c]);
        if (!line.empty()) line += ' ';
        line += buf;
      }
      for (double x : field.at(v))
      {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        line += ' ';
        line += buf;
      }
      os << line << '\n';
    }
    if (!os) throw IoError("failed to write field dump");
  }

  NodalField read_dump(std::istream& is, MeshPtr mesh)
  {
    int dim = 0, cells = 0, arity = 0;
    if (!(is >> dim >> cells >> arity)) throw IoError("malformed dump header");
    if (dim != mesh->dim() || cells != mesh->cells_per_side())
      throw MeshMismatch("dump was written on a different mesh");
    NodalField field(mesh, arity);
    for (std::size_t v = 0; v < mesh->vertex_count(); ++v)
    {
      for (int c = 0; c < dim; ++c)
      {
        double x = 0.0;
        if (!(is >> x)) throw IoError("truncated dump");
        if (std::abs(x - mesh->vertex(v)[c]) > 1e-12) throw MeshMismatch("dump vertex coordinates do not match mesh");
      }
      for (double& x : field.at(v))
        if (!(is >> x)) throw IoError("truncated dump");
    }
    return field;
  }

}  // namespace peterlin
