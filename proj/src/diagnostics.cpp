// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/diagnostics.hpp"

#include "peterlin/assembly.hpp"
#include "peterlin/error.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace peterlin
{
  namespace
  {
    double reference_jacobian(int dim) { return dim == 2 ? 2.0 : 6.0; }

    /// Squared Frobenius norm from packed symmetric components.
    double frob_sq(int dim, const double* c)
    {
      double s = 0.0;
      for (int k = 0; k < sym_size(dim); ++k) s += (k < dim ? 1.0 : 2.0) * c[k] * c[k];
      return s;
    }

    double trace_of(int dim, const double* c)
    {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += c[k];
      return s;
    }

    /// Calls f(weight, e, bary) for every quadrature point of the mesh.
    template <typename F>
    void for_each_point(const StructuredSimplicialMesh& mesh, int degree, F&& f)
    {
      const QuadratureRule rule = quadrature_rule(mesh.dim(), degree);
      const double jac = reference_jacobian(mesh.dim());
      for (std::size_t e = 0; e < mesh.element_count(); ++e)
      {
        const double vol = jac * mesh.volume(e);
        for (std::size_t q = 0; q < rule.points.size(); ++q) f(rule.weights[q] * vol, e, rule.points[q]);
      }
    }

    void check_state(const SimulationState& s)
    {
      const int d = s.u.mesh().dim();
      if (s.u.arity() != d || s.C.arity() != sym_size(d) || s.C.mesh_ptr() != s.u.mesh_ptr())
        throw DimensionMismatch("state fields are inconsistent");
    }

    void check_same_mesh(const SimulationState& a, const SimulationState& b)
    {
      check_state(a);
      check_state(b);
      const auto& ma = a.u.mesh();
      const auto& mb = b.u.mesh();
      if (a.u.mesh_ptr() != b.u.mesh_ptr() && (ma.dim() != mb.dim() || ma.cells_per_side() != mb.cells_per_side()))
        throw MeshMismatch("states live on different meshes; prolongate first");
    }

    /// Elementwise-constant gradient of every component of a P1 field.
    void field_gradient(const NodalField& f, std::size_t e, std::array<Point, 6>& g)
    {
      const auto& mesh = f.mesh();
      const auto ev = mesh.element(e);
      for (int c = 0; c < f.arity(); ++c) g[c] = {0.0, 0.0, 0.0};
      for (int k = 0; k <= mesh.dim(); ++k)
      {
        const Point& gk = mesh.gradient(e, k);
        const auto v = f.at(ev[k]);
        for (int c = 0; c < f.arity(); ++c)
          for (int x = 0; x < mesh.dim(); ++x) g[c][x] += v[c] * gk[x];
      }
    }

    double sym_grad_sq(const SmallMatrix& g, int dim)
    {
      double s = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
        {
          const double d = 0.5 * (g(i, j) + g(j, i));
          s += d * d;
        }
      return s;
    }
  }  // namespace

  EnergyValues energy(const SimulationState& state, int degree)
  {
    check_state(state);
    const auto& mesh = state.u.mesh();
    const int d = mesh.dim();
    double kin = 0.0, el = 0.0;
    std::array<double, 6> uv{}, cv{};
    for_each_point(mesh, degree, [&](double w, std::size_t e, const Barycentric& b) {
      evaluate(state.u, e, b, uv);
      evaluate(state.C, e, b, cv);
      double u2 = 0.0;
      for (int c = 0; c < d; ++c) u2 += uv[c] * uv[c];
      const double tr = trace_of(d, cv.data());
      kin += w * 0.5 * u2;
      el += w * 0.25 * tr * tr;
    });
    return {kin, el, kin + el};
  }

  SpdMargin spd_monitor(const NodalField& conformation)
  {
    const int d = conformation.mesh().dim();
    if (conformation.arity() != sym_size(d)) throw DimensionMismatch("conformation arity mismatch");
    SpdMargin m{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t v = 0; v < conformation.mesh().vertex_count(); ++v)
    {
      const double lam = min_eigenvalue(conformation.tensor(v));
      if (lam < m.min_eigenvalue) m = {lam, v};
    }
    return m;
  }

  namespace
  {
    /// -1/2 sum_v tr log C_v * lumped_v, or NaN with the offending vertex.
    double log_term(const NodalField& c, double floor, SpdMargin& margin)
    {
      margin = spd_monitor(c);
      if (!(margin.min_eigenvalue > floor)) return std::numeric_limits<double>::quiet_NaN();
      const auto lumped = c.mesh().lumped_mass();
      double s = 0.0;
      for (std::size_t v = 0; v < c.mesh().vertex_count(); ++v) s += lumped[v] * trace(matrix_log(c.tensor(v), floor));
      return -0.5 * s;
    }
  }  // namespace

  double free_energy(const SimulationState& state, double floor, int degree)
  {
    const EnergyValues e = energy(state, degree);
    SpdMargin margin{};
    const double log = log_term(state.C, floor, margin);
    if (std::isnan(log))
      throw NonSpdError("conformation is not positive definite", margin.min_eigenvalue, std::ptrdiff_t(margin.vertex));
    return e.total + log;
  }

  double divergence_norm(const NodalField& velocity)
  {
    const auto& mesh = velocity.mesh();
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const SmallMatrix g = velocity_gradient(velocity, e);
      double div = 0.0;
      for (int c = 0; c < mesh.dim(); ++c) div += g(c, c);
      s += mesh.volume(e) * div * div;
    }
    return std::sqrt(s);
  }

  DiagnosticsRecord compute_diagnostics(const SimulationState& state, const SolverConfig& config, int fp_iters)
  {
    check_state(state);
    const auto& mesh = state.u.mesh();
    const int d = mesh.dim();
    const double a = config.a;
    DiagnosticsRecord r;
    r.t = state.t;
    r.fp_iters = fp_iters;

    std::array<double, 6> uv{}, cv{};
    for_each_point(mesh, config.diagnostics_degree, [&](double w, std::size_t e, const Barycentric& b) {
      evaluate(state.u, e, b, uv);
      evaluate(state.C, e, b, cv);
      double u2 = 0.0;
      for (int c = 0; c < d; ++c) u2 += uv[c] * uv[c];
      const double tr = trace_of(d, cv.data());
      r.kinetic += w * 0.5 * u2;
      r.elastic_trace += w * 0.25 * tr * tr;
      r.frobenius += w * 0.5 * frob_sq(d, cv.data());
      r.relax_diss += w * 0.5 * relaxation_chi(tr, a) * tr * tr;
      r.source += w * 0.5 * d * relaxation_phi(tr, a) * tr;
    });

    std::array<Point, 6> grad{};
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const double vol = mesh.volume(e);
      r.visc_diss += vol * config.eta * sym_grad_sq(velocity_gradient(state.u, e), d);
      field_gradient(state.C, e, grad);
      double g2 = 0.0;
      for (int x = 0; x < d; ++x)
      {
        double gt = 0.0;
        for (int c = 0; c < d; ++c) gt += grad[c][x];
        g2 += gt * gt;
      }
      r.trace_grad_diss += vol * 0.5 * config.epsilon * g2;
    }

    SpdMargin margin{};
    r.log_term = log_term(state.C, default_spd_floor, margin);
    r.free_energy = r.kinetic + r.elastic_trace + r.log_term;
    r.min_eig = margin.min_eigenvalue;
    r.min_eig_vertex = margin.vertex;
    r.div_norm = divergence_norm(state.u);
    return r;
  }

  std::vector<double> energy_inequality_residual(const std::vector<DiagnosticsRecord>& records)
  {
    std::vector<double> res;
    if (records.empty()) return res;
    res.reserve(records.size());
    res.push_back(0.0);
    const double e0 = records.front().total_energy();
    double acc = 0.0;
    for (std::size_t n = 1; n < records.size(); ++n)
    {
      const DiagnosticsRecord& r = records[n];
      acc += (r.t - records[n - 1].t) * (r.dissipation() - r.source);
      res.push_back(r.total_energy() + acc - e0);
    }
    return res;
  }

  namespace
  {
    template <typename Other>
    RelativeEnergyRecord relative_energy_impl(const SimulationState& a, int degree, Other&& other)
    {
      const auto& mesh = a.u.mesh();
      const int d = mesh.dim();
      const int ns = sym_size(d);
      RelativeEnergyRecord r;
      r.t = a.t;
      std::array<double, 6> ua{}, ca{}, ub{}, cb{};
      for_each_point(mesh, degree, [&](double w, std::size_t e, const Barycentric& b) {
        evaluate(a.u, e, b, ua);
        evaluate(a.C, e, b, ca);
        other(e, b, ub, cb);
        double du = 0.0;
        for (int c = 0; c < d; ++c) du += (ua[c] - ub[c]) * (ua[c] - ub[c]);
        std::array<double, 6> dc{};
        for (int k = 0; k < ns; ++k) dc[k] = ca[k] - cb[k];
        const double tr = trace_of(d, dc.data());
        r.e_kin += w * 0.5 * du;
        r.e_el += w * 0.25 * tr * tr;
        r.e_frob += w * 0.5 * frob_sq(d, dc.data());
      });
      r.total = r.e_kin + r.e_el + r.e_frob;
      return r;
    }
  }  // namespace

  RelativeEnergyRecord relative_energy(const SimulationState& a, const SimulationState& b, int degree)
  {
    check_same_mesh(a, b);
    return relative_energy_impl(a, degree, [&](std::size_t e, const Barycentric& bc, auto& ub, auto& cb) {
      evaluate(b.u, e, bc, ub);
      evaluate(b.C, e, bc, cb);
    });
  }

  RelativeEnergyRecord relative_energy_to_exact(
      const SimulationState& a, const FieldFunction& velocity, const FieldFunction& conformation, int degree)
  {
    check_state(a);
    const auto& mesh = a.u.mesh();
    const int d = mesh.dim();
    return relative_energy_impl(a, degree, [&](std::size_t e, const Barycentric& bc, auto& ub, auto& cb) {
      const Point x = mesh.physical_point(e, bc);
      velocity(x, std::span<double>(ub.data(), std::size_t(d)));
      conformation(x, std::span<double>(cb.data(), std::size_t(sym_size(d))));
    });
  }

  RelativeDissipation relative_dissipation(
      const SimulationState& a, const SimulationState& b, const SolverConfig& config, int degree)
  {
    check_same_mesh(a, b);
    const auto& mesh = a.u.mesh();
    const int d = mesh.dim();
    const int ns = sym_size(d);
    RelativeDissipation r{0.0, 0.0, 0.0, 0.0, 0.0};

    std::array<double, 6> ca{}, cb{};
    for_each_point(mesh, degree, [&](double w, std::size_t e, const Barycentric& bc) {
      evaluate(a.C, e, bc, ca);
      evaluate(b.C, e, bc, cb);
      const double chi = relaxation_chi(trace_of(d, ca.data()), config.a);
      std::array<double, 6> dc{};
      for (int k = 0; k < ns; ++k) dc[k] = ca[k] - cb[k];
      const double tr = trace_of(d, dc.data());
      r.trace_reaction += w * 0.5 * chi * tr * tr;
      r.tensor_reaction += w * chi * frob_sq(d, dc.data());
    });

    std::array<Point, 6> ga{}, gb{};
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const double vol = mesh.volume(e);
      SmallMatrix du = velocity_gradient(a.u, e);
      const SmallMatrix dub = velocity_gradient(b.u, e);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) du(i, j) -= dub(i, j);
      r.viscous += vol * config.eta * sym_grad_sq(du, d);

      field_gradient(a.C, e, ga);
      field_gradient(b.C, e, gb);
      double gt2 = 0.0, gc2 = 0.0;
      for (int x = 0; x < d; ++x)
      {
        double gt = 0.0;
        for (int k = 0; k < ns; ++k)
        {
          const double g = ga[k][x] - gb[k][x];
          if (k < d) gt += g;
          gc2 += (k < d ? 1.0 : 2.0) * g * g;
        }
        gt2 += gt * gt;
      }
      r.trace_gradient += vol * 0.5 * config.epsilon * gt2;
      r.tensor_gradient += vol * config.epsilon * gc2;
    }
    return r;
  }

  double l2_error(const NodalField& field, const FieldFunction& exact, int degree)
  {
    const auto& mesh = field.mesh();
    const int ar = field.arity();
    const bool tensor = ar == sym_size(mesh.dim()) && ar != 1 && ar != mesh.dim();
    std::array<double, 6> fv{}, ev{};
    double s = 0.0;
    for_each_point(mesh, degree, [&](double w, std::size_t e, const Barycentric& b) {
      evaluate(field, e, b, fv);
      exact(mesh.physical_point(e, b), std::span<double>(ev.data(), std::size_t(ar)));
      std::array<double, 6> diff{};
      for (int k = 0; k < ar; ++k) diff[k] = fv[k] - ev[k];
      if (tensor)
        s += w * frob_sq(mesh.dim(), diff.data());
      else
        for (int k = 0; k < ar; ++k) s += w * diff[k] * diff[k];
    });
    return std::sqrt(s);
  }

  EocTable eoc(const std::vector<std::pair<double, double>>& levels)
  {
    if (levels.size() < 2) throw ValidationError("EOC needs at least two levels");
    EocTable t;
    for (std::size_t i = 0; i < levels.size(); ++i)
    {
      const auto [h, err] = levels[i];
      if (!(err > 0.0) || !std::isfinite(err)) throw ValidationError("EOC errors must be positive and finite");
      if (i > 0 && std::abs(levels[i - 1].first - 2.0 * h) > 1e-12 * h)
        throw ValidationError("EOC levels must halve h");
      t.h.push_back(h);
      t.errors.push_back(err);
    }
    for (std::size_t i = 0; i + 1 < t.errors.size(); ++i) t.rates.push_back(std::log2(t.errors[i] / t.errors[i + 1]));
    return t;
  }

  InverseGradientCheck inverse_gradient_check(
      const StructuredSimplicialMesh& mesh, const TensorFunction& d, const TensorDerivative& grad_d, int degree)
  {
    const int dim = mesh.dim();
    InverseGradientCheck r{0.0, 0.0};
    for_each_point(mesh, degree, [&](double w, std::size_t e, const Barycentric& b) {
      const Point x = mesh.physical_point(e, b);
      const SymTensor dinv = inverse(d(x));
      const SmallMatrix di = dinv.full();
      for (int k = 0; k < dim; ++k)
      {
        const SymTensor dk = grad_d(x, k);
        const SmallMatrix g = dk.full();
        // d_k D^-1 = -D^-1 (d_k D) D^-1, so -d_k D : d_k D^-1 = tr(D^-1 g D^-1 g).
        const SmallMatrix p = di * g;
        double lhs = 0.0, tl = 0.0;
        for (int i = 0; i < dim; ++i)
        {
          tl += p(i, i);
          for (int j = 0; j < dim; ++j) lhs += p(i, j) * p(j, i);
        }
        r.lhs += w * lhs;
        r.rhs += w * tl * tl / dim;
      }
    });
    return r;
  }

}  // namespace peterlin
