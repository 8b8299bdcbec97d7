// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PETERLIN_SPARSE_HPP
#define PETERLIN_SPARSE_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace peterlin
{
  /// Compressed sparse row matrix. Column indices ascend strictly within a row.
  class SparseMatrix
  {
   public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
        std::vector<std::size_t> columns, std::vector<double> values);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nonzeros() const noexcept { return values_.size(); }

    [[nodiscard]] std::span<const std::size_t> row_offsets() const { return offsets_; }
    [[nodiscard]] std::span<const std::size_t> columns() const { return columns_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::span<double> values() { return values_; }

    /// Slot of entry (row, col) in values(), or npos when structurally zero.
    [[nodiscard]] std::size_t find(std::size_t row, std::size_t col) const;
    [[nodiscard]] double coeff(std::size_t row, std::size_t col) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] std::vector<double> operator*(std::span<const double> x) const;
    /// x^T A x
    [[nodiscard]] double quadratic_form(std::span<const double> x) const;

    SparseMatrix& operator*=(double s);
    [[nodiscard]] std::vector<double> diagonal() const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> columns_;
    std::vector<double> values_;
  };

  /// Accumulates (row, col, value) triplets; duplicates are summed in
  /// insertion order so the result is deterministic.
  class TripletBuilder
  {
   public:
    TripletBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

    void add(std::size_t row, std::size_t col, double value);
    void reserve(std::size_t n) { entries_.reserve(n); }
    [[nodiscard]] SparseMatrix build() const;

   private:
    struct Entry
    {
      std::size_t row, col;
      double value;
    };
    std::size_t rows_, cols_;
    std::vector<Entry> entries_;
  };

  /// Same sparsity, entries summed with weights: alpha * a + beta * b.
  SparseMatrix linear_combination(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b);

  struct LinearSolveStats
  {
    int iterations = 0;
    double relative_residual = 0.0;
  };

  struct IterativeOptions
  {
    double tolerance = 1e-10;  ///< relative residual |b - Ax| / |b|
    int max_iterations = 5000;
  };

  /// Jacobi-preconditioned conjugate gradients for SPD systems. `x` holds the
  /// initial guess on entry. Throws LinearSolveFailed on stagnation.
  LinearSolveStats conjugate_gradient(
      const SparseMatrix& a, std::span<const double> b, std::span<double> x, const IterativeOptions& options);

  /// Sparse LDL^T factorization for symmetric quasi-definite matrices (SPD,
  /// or saddle-point with a negative definite lower block).
  class SparseLdlt
  {
   public:
    explicit SparseLdlt(const SparseMatrix& a);
    ~SparseLdlt();
    SparseLdlt(SparseLdlt&&) noexcept;
    SparseLdlt& operator=(SparseLdlt&&) noexcept;

    [[nodiscard]] std::vector<double> solve(std::span<const double> b) const;

   private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
  };

  enum class LinearSolverKind
  {
    conjugate_gradient,
    direct_ldlt
  };

  double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b);

  /// Solves with an existing factorization of `a`, refining until the
  /// residual meets the tolerance.
  std::vector<double> solve_factored(const SparseMatrix& a, const SparseLdlt& factor, std::span<const double> b,
      const IterativeOptions& options = {}, LinearSolveStats* stats = nullptr);

  /// Solves a x = b to the tolerance in `options`, checking the residual of
  /// the returned vector regardless of the method.
  std::vector<double> solve_linear(const SparseMatrix& a, std::span<const double> b, LinearSolverKind kind,
      const IterativeOptions& options = {}, LinearSolveStats* stats = nullptr);

}  // namespace peterlin

#endif
