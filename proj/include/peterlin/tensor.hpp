// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PETERLIN_TENSOR_HPP
#define PETERLIN_TENSOR_HPP

#include <array>
#include <span>

namespace peterlin
{
  /// Number of independent entries of a symmetric dim x dim matrix.
  constexpr int sym_size(int dim) noexcept { return dim * (dim + 1) / 2; }

  /// Storage slot of entry (i, j) of a symmetric matrix. Slots are ordered
  /// diagonal first, then off-diagonals: (11,22,33,12,13,23) for dim 3 and
  /// (11,22,12) for dim 2.
  int sym_index(int dim, int i, int j);

  /// Dense dim x dim matrix for dim in {2, 3}, row-major.
  class SmallMatrix
  {
   public:
    explicit SmallMatrix(int dim = 3);

    static SmallMatrix identity(int dim);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    double& operator()(int i, int j) { return a_[3 * i + j]; }
    [[nodiscard]] double operator()(int i, int j) const { return a_[3 * i + j]; }

    [[nodiscard]] SmallMatrix transposed() const;
    friend SmallMatrix operator*(const SmallMatrix& lhs, const SmallMatrix& rhs);

   private:
    int dim_;
    std::array<double, 9> a_{};
  };

  /// Symmetric dim x dim matrix stored by its upper triangle, so symmetry
  /// cannot be broken.
  class SymTensor
  {
   public:
    /// Zero tensor.
    explicit SymTensor(int dim = 3);

    static SymTensor identity(int dim);
    static SymTensor diagonal(std::span<const double> entries);
    static SymTensor diagonal(double d0, double d1);
    static SymTensor diagonal(double d0, double d1, double d2);
    static SymTensor from_components(int dim, std::span<const double> components);
    /// Builds from the upper triangle of `m`; the lower triangle is ignored.
    static SymTensor from_upper(const SmallMatrix& m);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int size() const noexcept { return sym_size(dim_); }

    [[nodiscard]] double operator()(int i, int j) const { return c_[sym_index(dim_, i, j)]; }
    double& component(int slot) { return c_[slot]; }
    [[nodiscard]] double component(int slot) const { return c_[slot]; }
    [[nodiscard]] std::span<const double> components() const { return {c_.data(), std::size_t(size())}; }

    [[nodiscard]] SmallMatrix full() const;

    SymTensor& operator+=(const SymTensor& rhs);
    SymTensor& operator-=(const SymTensor& rhs);
    SymTensor& operator*=(double s);
    friend SymTensor operator+(SymTensor lhs, const SymTensor& rhs) { return lhs += rhs; }
    friend SymTensor operator-(SymTensor lhs, const SymTensor& rhs) { return lhs -= rhs; }
    friend SymTensor operator*(SymTensor lhs, double s) { return lhs *= s; }
    friend SymTensor operator*(double s, SymTensor rhs) { return rhs *= s; }

   private:
    int dim_;
    std::array<double, 6> c_{};
  };

  /// Eigenpairs of a symmetric matrix. Eigenvalues ascend; eigenvector k is
  /// column k of `eigenvectors`.
  struct SpectralDecomp
  {
    int dim = 3;
    std::array<double, 3> eigenvalues{};
    SmallMatrix eigenvectors{3};

    [[nodiscard]] SymTensor reconstruct() const;
  };

  double trace(const SymTensor& a);
  /// Sum over all i, j of a_ij b_ij (off-diagonal entries count twice).
  double frobenius_inner(const SymTensor& a, const SymTensor& b);
  double frobenius_norm(const SymTensor& a);
  double determinant(const SymTensor& a);

  /// Cyclic Jacobi eigendecomposition; a single exact rotation for dim 2.
  SpectralDecomp spectral(const SymTensor& a);
  double min_eigenvalue(const SymTensor& a);

  inline constexpr double default_spd_floor = 1e-12;

  /// Q log(L) Q^T. Throws NonSpdError when the smallest eigenvalue is <= floor.
  SymTensor matrix_log(const SymTensor& a, double floor = default_spd_floor);
  /// Q L^-1 Q^T. Throws SingularError when min |eigenvalue| <= floor.
  SymTensor inverse(const SymTensor& a, double floor = default_spd_floor);

  /// (G C + C G^T) for a velocity gradient G with G(i, j) = d u_i / d x_j.
  SymTensor upper_convected(const SymTensor& c, const SmallMatrix& grad_u);

  struct LogIdentityResiduals
  {
    double trace_log_minus_log_det;  ///< tr log A - log det A, ~0
    double squared_trace_bound;      ///< tr(A)^2 - 2 tr log A - tr I, >= 0
    double inverse_trace_bound;      ///< tr(A + A^-1 - I), >= 0
  };

  /// Residuals of the three scalar log identities of an SPD matrix.
  LogIdentityResiduals check_log_identities(const SymTensor& a);

  /// Max over interior samples of |d/dt tr log D - D^-1 : dD/dt| with both
  /// derivatives by centered differences of spacing dt.
  double jacobi_residual(std::span<const SymTensor> path, double dt);

  struct TraceNormCheck
  {
    double entry_norm;   ///< sum |a_ij|^p over all i, j
    double trace_power;  ///< |tr a|^p
    double upper_bound;  ///< dim^(p-1) * entry_norm
  };

  /// Pointwise form of the trace-norm equivalence; for positive semi-definite
  /// input entry_norm <= trace_power <= upper_bound.
  TraceNormCheck trace_norm_check(const SymTensor& a, int p);

}  // namespace peterlin

#endif
