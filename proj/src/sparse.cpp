// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/sparse.hpp"

#include "peterlin/error.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace peterlin
{
  SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
      std::vector<std::size_t> columns, std::vector<double> values)
      : rows_(rows), cols_(cols), offsets_(std::move(row_offsets)), columns_(std::move(columns)),
        values_(std::move(values))
  {
    if (offsets_.size() != rows_ + 1 || columns_.size() != values_.size() || offsets_.back() != values_.size())
      throw DimensionMismatch("inconsistent compressed row storage");
  }

  std::size_t SparseMatrix::find(std::size_t row, std::size_t col) const
  {
    const auto first = columns_.begin() + std::ptrdiff_t(offsets_[row]);
    const auto last = columns_.begin() + std::ptrdiff_t(offsets_[row + 1]);
    const auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col) return npos;
    return std::size_t(it - columns_.begin());
  }

  double SparseMatrix::coeff(std::size_t row, std::size_t col) const
  {
    const std::size_t k = find(row, col);
    return k == npos ? 0.0 : values_[k];
  }

  void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const
  {
    if (x.size() != cols_ || y.size() != rows_) throw DimensionMismatch("matrix-vector size mismatch");
    for (std::size_t r = 0; r < rows_; ++r)
    {
      double s = 0.0;
      for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) s += values_[k] * x[columns_[k]];
      y[r] = s;
    }
  }

  std::vector<double> SparseMatrix::operator*(std::span<const double> x) const
  {
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
  }

  double SparseMatrix::quadratic_form(std::span<const double> x) const
  {
    const std::vector<double> ax = (*this) * x;
    return std::inner_product(ax.begin(), ax.end(), x.begin(), 0.0);
  }

  SparseMatrix& SparseMatrix::operator*=(double s)
  {
    for (double& v : values_) v *= s;
    return *this;
  }

  std::vector<double> SparseMatrix::diagonal() const
  {
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = coeff(r, r);
    return d;
  }

  void TripletBuilder::add(std::size_t row, std::size_t col, double value)
  {
    if (row >= rows_ || col >= cols_) throw DimensionMismatch("triplet outside matrix bounds");
    entries_.push_back({row, col, value});
  }

  SparseMatrix TripletBuilder::build() const
  {
    // Stable bucketing by row, then a stable sort by column inside each row.
    std::vector<std::size_t> count(rows_ + 1, 0);
    for (const Entry& e : entries_) ++count[e.row + 1];
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<std::size_t> order(entries_.size());
    {
      std::vector<std::size_t> cursor(count.begin(), count.end() - 1);
      for (std::size_t i = 0; i < entries_.size(); ++i) order[cursor[entries_[i].row]++] = i;
    }

    std::vector<std::size_t> offsets(rows_ + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(entries_.size() / 4 + 1);
    vals.reserve(entries_.size() / 4 + 1);
    for (std::size_t r = 0; r < rows_; ++r)
    {
      const auto first = order.begin() + std::ptrdiff_t(count[r]);
      const auto last = order.begin() + std::ptrdiff_t(count[r + 1]);
      std::stable_sort(first, last, [&](std::size_t a, std::size_t b) { return entries_[a].col < entries_[b].col; });
      for (auto it = first; it != last; ++it)
      {
        const Entry& e = entries_[*it];
        if (cols.size() > offsets[r] && cols.back() == e.col)
          vals.back() += e.value;
        else
        {
          cols.push_back(e.col);
          vals.push_back(e.value);
        }
      }
      offsets[r + 1] = cols.size();
    }
    return {rows_, cols_, std::move(offsets), std::move(cols), std::move(vals)};
  }

  SparseMatrix linear_combination(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b)
  {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix sizes differ");
    TripletBuilder t(a.rows(), a.cols());
    t.reserve(a.nonzeros() + b.nonzeros());
    for (const auto* m : {&a, &b})
    {
      const double w = m == &a ? alpha : beta;
      for (std::size_t r = 0; r < m->rows(); ++r)
        for (std::size_t k = m->row_offsets()[r]; k < m->row_offsets()[r + 1]; ++k)
          t.add(r, m->columns()[k], w * m->values()[k]);
    }
    return t.build();
  }

  namespace
  {
    double norm2(std::span<const double> v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }
  }  // namespace

  double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b)
  {
    std::vector<double> r = a * x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const double nb = norm2(b);
    return nb > 0.0 ? norm2(r) / nb : norm2(r);
  }

  LinearSolveStats conjugate_gradient(
      const SparseMatrix& a, std::span<const double> b, std::span<double> x, const IterativeOptions& options)
  {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n || x.size() != n) throw DimensionMismatch("CG system size mismatch");

    const double nb = norm2(b);
    if (nb == 0.0)
    {
      std::fill(x.begin(), x.end(), 0.0);
      return {0, 0.0};
    }

    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) d = d != 0.0 ? 1.0 / d : 1.0;

    std::vector<double> r = a * std::span<const double>(x.data(), n);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double rel = norm2(r) / nb;
    if (rel <= options.tolerance) return {0, rel};

    std::vector<double> z(n), p(n), ap(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);

    for (int it = 1; it <= options.max_iterations; ++it)
    {
      a.multiply(p, ap);
      const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
      if (!(pap > 0.0)) throw LinearSolveFailed("conjugate gradient broke down (matrix not SPD)", it, rel);
      const double alpha = rz / pap;
      for (std::size_t i = 0; i < n; ++i)
      {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      rel = norm2(r) / nb;
      if (!std::isfinite(rel)) throw LinearSolveFailed("conjugate gradient produced a non-finite residual", it, rel);
      if (rel <= options.tolerance) return {it, rel};
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw LinearSolveFailed("conjugate gradient did not reach the tolerance", options.max_iterations, rel);
  }

  struct SparseLdlt::Impl
  {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    std::size_t n = 0;
  };

  SparseLdlt::SparseLdlt(const SparseMatrix& a) : impl_(std::make_unique<Impl>())
  {
    if (a.rows() != a.cols()) throw DimensionMismatch("LDLT needs a square matrix");
    impl_->n = a.rows();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(a.nonzeros() / 2 + a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t k = a.row_offsets()[r]; k < a.row_offsets()[r + 1]; ++k)
        if (a.columns()[k] <= r) trip.emplace_back(int(r), int(a.columns()[k]), a.values()[k]);
    Eigen::SparseMatrix<double> m(int(a.rows()), int(a.cols()));
    m.setFromTriplets(trip.begin(), trip.end());
    impl_->ldlt.compute(m);
    if (impl_->ldlt.info() != Eigen::Success)
      throw LinearSolveFailed("sparse LDLT factorization failed", 0, std::numeric_limits<double>::infinity());
  }

  SparseLdlt::~SparseLdlt() = default;
  SparseLdlt::SparseLdlt(SparseLdlt&&) noexcept = default;
  SparseLdlt& SparseLdlt::operator=(SparseLdlt&&) noexcept = default;

  std::vector<double> SparseLdlt::solve(std::span<const double> b) const
  {
    if (b.size() != impl_->n) throw DimensionMismatch("LDLT right-hand side size mismatch");
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), Eigen::Index(b.size()));
    const Eigen::VectorXd x = impl_->ldlt.solve(rhs);
    return {x.data(), x.data() + x.size()};
  }

  std::vector<double> solve_factored(const SparseMatrix& a, const SparseLdlt& factor, std::span<const double> b,
      const IterativeOptions& options, LinearSolveStats* stats)
  {
    std::vector<double> x = factor.solve(b);
    LinearSolveStats st;
    st.relative_residual = relative_residual(a, x, b);
    // A couple of refinement sweeps recover the last digits on badly scaled systems.
    for (int sweep = 0; sweep < 2 && st.relative_residual > options.tolerance; ++sweep)
    {
      std::vector<double> r = a * std::span<const double>(x);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
      const std::vector<double> dx = factor.solve(r);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
      st.relative_residual = relative_residual(a, x, b);
      st.iterations = sweep + 1;
    }
    if (!(st.relative_residual <= options.tolerance))
      throw LinearSolveFailed("direct solve residual above tolerance", st.iterations, st.relative_residual);
    if (stats) *stats = st;
    return x;
  }

  std::vector<double> solve_linear(const SparseMatrix& a, std::span<const double> b, LinearSolverKind kind,
      const IterativeOptions& options, LinearSolveStats* stats)
  {
    if (kind == LinearSolverKind::direct_ldlt) return solve_factored(a, SparseLdlt(a), b, options, stats);
    std::vector<double> x(a.cols(), 0.0);
    const LinearSolveStats st = conjugate_gradient(a, b, x, options);
    if (stats) *stats = st;
    return x;
  }

}  // namespace peterlin
