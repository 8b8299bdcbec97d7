// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations for the tests. Nothing here calls the
// library's quadrature, location or assembly code.

#ifndef PETERLIN_TESTS_ORACLES_HPP
#define PETERLIN_TESTS_ORACLES_HPP

#include "peterlin/mesh.hpp"
#include "peterlin/sparse.hpp"
#include "peterlin/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace oracle
{
  using peterlin::Point;

  /// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration.
  inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
  {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
    {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it)
      {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k)
        {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = 0.5 * (1.0 - z);
      w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  /// Vertex coordinates of element e read straight from the mesh.
  inline std::array<Point, 4> corners(const peterlin::StructuredSimplicialMesh& mesh, std::size_t e)
  {
    std::array<Point, 4> p{};
    const auto ev = mesh.element(e);
    for (int k = 0; k <= mesh.dim(); ++k) p[k] = mesh.vertex(ev[k]);
    return p;
  }

  /// Conical-product (collapsed Gauss) rule on one element: calls
  /// f(x, lambda, weight) with physical weights. n points per direction.
  template <typename F>
  void element_points(const peterlin::StructuredSimplicialMesh& mesh, std::size_t e, int n, F&& f)
  {
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);
    const int d = mesh.dim();
    const auto p = corners(mesh, e);
    Eigen::Matrix3d edges = Eigen::Matrix3d::Identity();
    for (int k = 1; k <= d; ++k)
      for (int c = 0; c < d; ++c) edges(c, k - 1) = p[k][c] - p[0][c];
    const double jac = std::abs(edges.topLeftCorner(d, d).determinant());
    auto emit = [&](const std::array<double, 3>& r, double w) {
      std::array<double, 4> lam{1.0 - r[0] - r[1] - r[2], r[0], r[1], r[2]};
      Point x{0.0, 0.0, 0.0};
      for (int k = 0; k <= d; ++k)
        for (int c = 0; c < 3; ++c) x[c] += lam[k] * p[k][c];
      f(x, lam, w * jac);
    };
    if (d == 2)
    {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
          const double s = gx[i], t = gx[j];
          emit({s, (1.0 - s) * t, 0.0}, gw[i] * gw[j] * (1.0 - s));
        }
    }
    else
    {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
          {
            const double s = gx[i], t = gx[j], r = gx[k];
            emit({s, (1.0 - s) * t, (1.0 - s) * (1.0 - t) * r}, gw[i] * gw[j] * gw[k] * (1.0 - s) * (1.0 - s) * (1.0 - t));
          }
    }
  }

  inline double integrate(const peterlin::StructuredSimplicialMesh& mesh, const std::function<double(const Point&)>& f,
      int n = 6)
  {
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
      element_points(mesh, e, n, [&](const Point& x, const std::array<double, 4>&, double w) { s += w * f(x); });
    return s;
  }

  /// Gradients of the element's hat functions from the inverse edge matrix.
  inline std::array<Point, 4> hat_gradients(const peterlin::StructuredSimplicialMesh& mesh, std::size_t e)
  {
    const int d = mesh.dim();
    const auto p = corners(mesh, e);
    Eigen::MatrixXd edges(d, d);
    for (int k = 1; k <= d; ++k)
      for (int c = 0; c < d; ++c) edges(c, k - 1) = p[k][c] - p[0][c];
    const Eigen::MatrixXd inv = edges.inverse();  // rows: gradients of lambda_1..d
    std::array<Point, 4> g{};
    for (int k = 1; k <= d; ++k)
      for (int c = 0; c < d; ++c)
      {
        g[k][c] = inv(k - 1, c);
        g[0][c] -= inv(k - 1, c);
      }
    return g;
  }

  /// Exhaustive search: the lowest element whose barycentrics are all >= -tol.
  inline std::size_t brute_force_locate(const peterlin::StructuredSimplicialMesh& mesh, const Point& x, double tol = 1e-12)
  {
    const int d = mesh.dim();
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
    {
      const auto p = corners(mesh, e);
      Eigen::MatrixXd edges(d, d);
      Eigen::VectorXd rhs(d);
      for (int k = 1; k <= d; ++k)
        for (int c = 0; c < d; ++c) edges(c, k - 1) = p[k][c] - p[0][c];
      for (int c = 0; c < d; ++c) rhs(c) = x[c] - p[0][c];
      const Eigen::VectorXd lam = edges.partialPivLu().solve(rhs);
      double l0 = 1.0 - lam.sum();
      bool inside = l0 >= -tol;
      for (int k = 0; k < d; ++k) inside = inside && lam(k) >= -tol;
      if (inside) return e;
    }
    return std::numeric_limits<std::size_t>::max();
  }

  inline Eigen::MatrixXd dense(const peterlin::SparseMatrix& a)
  {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Eigen::Index(a.rows()), Eigen::Index(a.cols()));
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t k = a.row_offsets()[r]; k < a.row_offsets()[r + 1]; ++k)
        m(Eigen::Index(r), Eigen::Index(a.columns()[k])) += a.values()[k];
    return m;
  }

  inline std::vector<double> dense_solve(const peterlin::SparseMatrix& a, std::span<const double> b)
  {
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), Eigen::Index(b.size()));
    const Eigen::VectorXd x = dense(a).fullPivLu().solve(rhs);
    return {x.data(), x.data() + x.size()};
  }

  /// Classical RK4 for dC/dt = (tr C + a) I - ((tr C)^2 + a |tr C|) C on packed components.
  inline std::vector<double> rk4_relaxation(int dim, std::vector<double> c, double a, double t_final, int steps)
  {
    const int ns = dim * (dim + 1) / 2;
    auto rhs = [&](const std::vector<double>& y) {
      double tr = 0.0;
      for (int k = 0; k < dim; ++k) tr += y[k];
      const double phi = tr + a;
      const double chi = tr * tr + a * std::abs(tr);
      std::vector<double> f(ns);
      for (int k = 0; k < ns; ++k) f[k] = (k < dim ? phi : 0.0) - chi * y[k];
      return f;
    };
    const double h = t_final / steps;
    for (int n = 0; n < steps; ++n)
    {
      auto axpy = [&](const std::vector<double>& y, const std::vector<double>& k, double s) {
        std::vector<double> z(ns);
        for (int i = 0; i < ns; ++i) z[i] = y[i] + s * k[i];
        return z;
      };
      const auto k1 = rhs(c);
      const auto k2 = rhs(axpy(c, k1, 0.5 * h));
      const auto k3 = rhs(axpy(c, k2, 0.5 * h));
      const auto k4 = rhs(axpy(c, k3, h));
      for (int i = 0; i < ns; ++i) c[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return c;
  }

  using ExactConformation = std::function<void(double t, const Point& x, std::span<double> out)>;

  /// Forcing of dC/dt - eps Lap C = Phi I - chi C + F for a given exact 2D
  /// solution, differentiated by central differences.
  inline std::array<double, 3> fd_forcing(
      const ExactConformation& exact, double eps, double a, double t, const Point& x, double h = 1e-4)
  {
    auto at = [&](double tt, double dx, double dy) {
      std::array<double, 3> v{};
      exact(tt, {x[0] + dx, x[1] + dy, 0.0}, v);
      return v;
    };
    const auto c = at(t, 0.0, 0.0);
    const double ht = 1e-5;
    const auto tp = at(t + ht, 0.0, 0.0), tm = at(t - ht, 0.0, 0.0);
    const auto xp = at(t, h, 0.0), xm = at(t, -h, 0.0), yp = at(t, 0.0, h), ym = at(t, 0.0, -h);
    const double tr = c[0] + c[1];
    const double phi = tr + a;
    const double chi = tr * tr + a * std::abs(tr);
    std::array<double, 3> f{};
    for (int k = 0; k < 3; ++k)
    {
      const double dt = (tp[k] - tm[k]) / (2.0 * ht);
      const double lap = (xp[k] + xm[k] + yp[k] + ym[k] - 4.0 * c[k]) / (h * h);
      f[k] = dt - eps * lap - (k < 2 ? phi : 0.0) + chi * c[k];
    }
    return f;
  }

  /// eps dC/dn by central differences.
  inline std::array<double, 3> fd_flux(
      const ExactConformation& exact, double eps, double t, const Point& x, const Point& n, double h = 1e-6)
  {
    std::array<double, 3> p{}, m{}, f{};
    exact(t, {x[0] + h * n[0], x[1] + h * n[1], 0.0}, p);
    exact(t, {x[0] - h * n[0], x[1] - h * n[1], 0.0}, m);
    for (int k = 0; k < 3; ++k) f[k] = eps * (p[k] - m[k]) / (2.0 * h);
    return f;
  }

  /// Random SPD tensor Q diag(lambda) Q^T with eigenvalues in [lo, hi].
  inline peterlin::SymTensor random_spd(std::mt19937_64& rng, int dim, double lo, double hi)
  {
    std::uniform_real_distribution<double> eig(lo, hi);
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = g(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
    Eigen::VectorXd lam(dim);
    for (int i = 0; i < dim; ++i) lam(i) = eig(rng);
    const Eigen::MatrixXd a = q * lam.asDiagonal() * q.transpose();
    peterlin::SmallMatrix s(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return peterlin::SymTensor::from_upper(s);
  }

  inline peterlin::SymTensor random_symmetric(std::mt19937_64& rng, int dim, double scale = 1.0)
  {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> c(dim * (dim + 1) / 2);
    for (double& v : c) v = u(rng);
    return peterlin::SymTensor::from_components(dim, c);
  }

  /// Eigen's self-adjoint solver, for cross-checking eigenvalues.
  inline Eigen::VectorXd eigenvalues(const peterlin::SymTensor& a)
  {
    const int d = a.dim();
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = a(i, j);
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
  }

}  // namespace oracle

#endif
