// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/tensor.hpp"

#include "peterlin/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace peterlin
{
  namespace
  {
    void check_dim(int dim)
    {
      if (dim != 2 && dim != 3)
        throw DimensionMismatch("tensor dimension must be 2 or 3, got " + std::to_string(dim));
    }

    void check_same_dim(const SymTensor& a, const SymTensor& b)
    {
      if (a.dim() != b.dim()) throw DimensionMismatch("symmetric tensors of different dimension");
    }
  }  // namespace

  int sym_index(int dim, int i, int j)
  {
    if (i == j) return i;
    if (i > j) std::swap(i, j);
    if (dim == 2) return 2;
    // (0,1) -> 3, (0,2) -> 4, (1,2) -> 5
    return i == 0 ? 2 + j : 5;
  }

  SmallMatrix::SmallMatrix(int dim) : dim_(dim) { check_dim(dim); }

  SmallMatrix SmallMatrix::identity(int dim)
  {
    SmallMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  SmallMatrix SmallMatrix::transposed() const
  {
    SmallMatrix t(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) t(i, j) = (*this)(j, i);
    return t;
  }

  SmallMatrix operator*(const SmallMatrix& lhs, const SmallMatrix& rhs)
  {
    if (lhs.dim() != rhs.dim()) throw DimensionMismatch("matrix product of different dimensions");
    const int d = lhs.dim();
    SmallMatrix out(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
      {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += lhs(i, k) * rhs(k, j);
        out(i, j) = s;
      }
    return out;
  }

  SymTensor::SymTensor(int dim) : dim_(dim) { check_dim(dim); }

  SymTensor SymTensor::identity(int dim)
  {
    SymTensor t(dim);
    for (int i = 0; i < dim; ++i) t.c_[i] = 1.0;
    return t;
  }

  SymTensor SymTensor::diagonal(std::span<const double> entries)
  {
    SymTensor t(static_cast<int>(entries.size()));
    std::copy(entries.begin(), entries.end(), t.c_.begin());
    return t;
  }

  SymTensor SymTensor::diagonal(double d0, double d1)
  {
    const std::array<double, 2> e{d0, d1};
    return diagonal(e);
  }

  SymTensor SymTensor::diagonal(double d0, double d1, double d2)
  {
    const std::array<double, 3> e{d0, d1, d2};
    return diagonal(e);
  }

  SymTensor SymTensor::from_components(int dim, std::span<const double> components)
  {
    SymTensor t(dim);
    if (static_cast<int>(components.size()) != t.size())
      throw DimensionMismatch("component count does not match tensor dimension");
    std::copy(components.begin(), components.end(), t.c_.begin());
    return t;
  }

  SymTensor SymTensor::from_upper(const SmallMatrix& m)
  {
    SymTensor t(m.dim());
    for (int i = 0; i < m.dim(); ++i)
      for (int j = i; j < m.dim(); ++j) t.c_[sym_index(m.dim(), i, j)] = m(i, j);
    return t;
  }

  SmallMatrix SymTensor::full() const
  {
    SmallMatrix m(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  SymTensor& SymTensor::operator+=(const SymTensor& rhs)
  {
    check_same_dim(*this, rhs);
    for (int k = 0; k < size(); ++k) c_[k] += rhs.c_[k];
    return *this;
  }

  SymTensor& SymTensor::operator-=(const SymTensor& rhs)
  {
    check_same_dim(*this, rhs);
    for (int k = 0; k < size(); ++k) c_[k] -= rhs.c_[k];
    return *this;
  }

  SymTensor& SymTensor::operator*=(double s)
  {
    for (int k = 0; k < size(); ++k) c_[k] *= s;
    return *this;
  }

  SymTensor SpectralDecomp::reconstruct() const
  {
    SymTensor out(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j)
      {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) s += eigenvectors(i, k) * eigenvalues[k] * eigenvectors(j, k);
        out.component(sym_index(dim, i, j)) = s;
      }
    return out;
  }

  double trace(const SymTensor& a)
  {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) s += a.component(i);
    return s;
  }

  double frobenius_inner(const SymTensor& a, const SymTensor& b)
  {
    check_same_dim(a, b);
    double s = 0.0;
    for (int k = 0; k < a.size(); ++k)
      s += (k < a.dim() ? 1.0 : 2.0) * a.component(k) * b.component(k);
    return s;
  }

  double frobenius_norm(const SymTensor& a) { return std::sqrt(frobenius_inner(a, a)); }

  double determinant(const SymTensor& a)
  {
    if (a.dim() == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1);
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(1, 2)) -
           a(0, 1) * (a(0, 1) * a(2, 2) - a(1, 2) * a(0, 2)) +
           a(0, 2) * (a(0, 1) * a(1, 2) - a(1, 1) * a(0, 2));
  }

  SpectralDecomp spectral(const SymTensor& a)
  {
    const int d = a.dim();
    SmallMatrix m = a.full();
    SmallMatrix v = SmallMatrix::identity(d);

    const double scale = frobenius_norm(a);
    if (scale > 0.0)
    {
      for (int sweep = 0; sweep < 64; ++sweep)
      {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
          for (int q = p + 1; q < d; ++q) off += m(p, q) * m(p, q);
        if (std::sqrt(off) <= 1e-17 * scale) break;

        for (int p = 0; p < d; ++p)
          for (int q = p + 1; q < d; ++q)
          {
            const double apq = m(p, q);
            if (apq == 0.0) continue;
            // Rotation angle chosen so the (p,q) entry vanishes, smaller root for stability.
            const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
            const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0);
            const double s = t * c;
            for (int k = 0; k < d; ++k)
            {
              const double mkp = m(k, p);
              const double mkq = m(k, q);
              m(k, p) = c * mkp - s * mkq;
              m(k, q) = s * mkp + c * mkq;
            }
            for (int k = 0; k < d; ++k)
            {
              const double mpk = m(p, k);
              const double mqk = m(q, k);
              m(p, k) = c * mpk - s * mqk;
              m(q, k) = s * mpk + c * mqk;
            }
            m(p, q) = 0.0;
            m(q, p) = 0.0;
            for (int k = 0; k < d; ++k)
            {
              const double vkp = v(k, p);
              const double vkq = v(k, q);
              v(k, p) = c * vkp - s * vkq;
              v(k, q) = s * vkp + c * vkq;
            }
          }
      }
    }

    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.begin() + d, [&](int i, int j) { return m(i, i) < m(j, j); });

    SpectralDecomp out;
    out.dim = d;
    out.eigenvectors = SmallMatrix(d);
    for (int k = 0; k < d; ++k)
    {
      out.eigenvalues[k] = m(order[k], order[k]);
      for (int i = 0; i < d; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }
    return out;
  }

  double min_eigenvalue(const SymTensor& a)
  {
    if (a.dim() == 2)
    {
      const double mean = 0.5 * (a(0, 0) + a(1, 1));
      const double half_gap = 0.5 * (a(0, 0) - a(1, 1));
      return mean - std::hypot(half_gap, a(0, 1));
    }
    return spectral(a).eigenvalues[0];
  }

  namespace
  {
    template <typename F>
    SymTensor apply_function(const SpectralDecomp& sd, F&& f)
    {
      SpectralDecomp mapped = sd;
      for (int k = 0; k < sd.dim; ++k) mapped.eigenvalues[k] = f(sd.eigenvalues[k]);
      return mapped.reconstruct();
    }
  }  // namespace

  SymTensor matrix_log(const SymTensor& a, double floor)
  {
    const SpectralDecomp sd = spectral(a);
    if (!(sd.eigenvalues[0] > floor))
      throw NonSpdError("matrix logarithm of a tensor that is not positive definite", sd.eigenvalues[0]);
    return apply_function(sd, [](double x) { return std::log(x); });
  }

  SymTensor inverse(const SymTensor& a, double floor)
  {
    const SpectralDecomp sd = spectral(a);
    double min_abs = std::abs(sd.eigenvalues[0]);
    for (int k = 1; k < sd.dim; ++k) min_abs = std::min(min_abs, std::abs(sd.eigenvalues[k]));
    if (!(min_abs > floor)) throw SingularError("inverse of a (numerically) singular tensor", min_abs);
    return apply_function(sd, [](double x) { return 1.0 / x; });
  }

  SymTensor upper_convected(const SymTensor& c, const SmallMatrix& grad_u)
  {
    if (c.dim() != grad_u.dim()) throw DimensionMismatch("velocity gradient and tensor dimensions differ");
    const int d = c.dim();
    SymTensor out(d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
      {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += grad_u(i, k) * c(k, j) + c(i, k) * grad_u(j, k);
        out.component(sym_index(d, i, j)) = s;
      }
    return out;
  }

  LogIdentityResiduals check_log_identities(const SymTensor& a)
  {
    const SpectralDecomp sd = spectral(a);
    if (!(sd.eigenvalues[0] > 0.0))
      throw NonSpdError("log identities require a positive definite tensor", sd.eigenvalues[0]);
    const SymTensor log_a = apply_function(sd, [](double x) { return std::log(x); });
    const SymTensor inv_a = apply_function(sd, [](double x) { return 1.0 / x; });
    const double d = a.dim();
    const double tr = trace(a);
    const double tr_log = trace(log_a);
    const double det = determinant(a);
    if (!(det > 0.0)) throw NonSpdError("determinant of a positive definite tensor underflowed", sd.eigenvalues[0]);
    return {
        tr_log - std::log(det),
        tr * tr - 2.0 * tr_log - d,
        tr + trace(inv_a) - d,
    };
  }

  double jacobi_residual(std::span<const SymTensor> path, double dt)
  {
    if (path.size() < 3 || !(dt > 0.0)) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < path.size(); ++i)
    {
      const double lhs = (trace(matrix_log(path[i + 1])) - trace(matrix_log(path[i - 1]))) / (2.0 * dt);
      const SymTensor rate = (path[i + 1] - path[i - 1]) * (1.0 / (2.0 * dt));
      const double rhs = frobenius_inner(inverse(path[i]), rate);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
  }

  TraceNormCheck trace_norm_check(const SymTensor& a, int p)
  {
    const int d = a.dim();
    double entries = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) entries += std::pow(std::abs(a(i, j)), p);
    return {entries, std::pow(std::abs(trace(a)), p), std::pow(double(d), p - 1) * entries};
  }

}  // namespace peterlin
