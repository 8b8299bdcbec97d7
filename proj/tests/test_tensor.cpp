// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "peterlin/error.hpp"
#include "peterlin/tensor.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace peterlin;
using doctest::Approx;

namespace
{
  const double e = std::exp(1.0);
  const double s3 = std::sqrt(3.0);

  double max_abs_diff(const SymTensor& a, const SymTensor& b)
  {
    double m = 0.0;
    for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.component(k) - b.component(k)));
    return m;
  }

  SymTensor from_matrix(int dim, std::initializer_list<double> rows)
  {
    SmallMatrix m(dim);
    auto it = rows.begin();
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = *it++;
    return SymTensor::from_upper(m);
  }
}  // namespace

TEST_CASE("component ordering is (11,22,33,12,13,23) in 3D and (11,22,12) in 2D")
{
  CHECK(sym_index(3, 0, 0) == 0);
  CHECK(sym_index(3, 1, 1) == 1);
  CHECK(sym_index(3, 2, 2) == 2);
  CHECK(sym_index(3, 0, 1) == 3);
  CHECK(sym_index(3, 2, 0) == 4);
  CHECK(sym_index(3, 1, 2) == 5);
  CHECK(sym_index(2, 1, 0) == 2);
  CHECK_THROWS_AS(SymTensor(4), DimensionMismatch);
}

TEST_CASE("full matrix reconstruction and re-extraction round-trips")
{
  std::mt19937_64 rng(11);
  for (int dim : {2, 3})
    for (int n = 0; n < 50; ++n)
    {
      const SymTensor a = oracle::random_symmetric(rng, dim, 5.0);
      const SmallMatrix f = a.full();
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) CHECK(f(i, j) == f(j, i));
      CHECK(max_abs_diff(SymTensor::from_upper(f), a) == 0.0);
    }
}

TEST_CASE("trace")
{
  CHECK(trace(SymTensor::identity(3)) == 3.0);
  CHECK(trace(SymTensor::identity(3) * (1.0 / s3)) == Approx(1.7320508).epsilon(1e-7));
  CHECK(trace(SymTensor(3)) == 0.0);
}

TEST_CASE("frobenius inner product")
{
  const SymTensor i3 = SymTensor::identity(3);
  CHECK(frobenius_inner(i3, i3) == 3.0);
  CHECK(frobenius_inner(from_matrix(3, {1, 2, 3, 2, 4, 5, 3, 5, 6}), SymTensor(3)) == 0.0);
  const SymTensor ones = from_matrix(3, {1, 1, 1, 1, 1, 1, 1, 1, 1});
  CHECK(frobenius_inner(ones, i3) == 3.0);
  CHECK(frobenius_inner(ones, ones) == 9.0);  // off-diagonals counted twice
  CHECK_THROWS_AS(frobenius_inner(i3, SymTensor::identity(2)), DimensionMismatch);
}

TEST_CASE("spectral decomposition examples")
{
  const SpectralDecomp id = spectral(SymTensor::identity(3));
  for (int k = 0; k < 3; ++k) CHECK(id.eigenvalues[k] == Approx(1.0).epsilon(1e-15));

  const SpectralDecomp d = spectral(SymTensor::diagonal(3.0, 1.0, 2.0));
  CHECK(d.eigenvalues[0] == Approx(1.0));
  CHECK(d.eigenvalues[1] == Approx(2.0));
  CHECK(d.eigenvalues[2] == Approx(3.0));

  const SpectralDecomp two = spectral(from_matrix(2, {2, 1, 1, 2}));
  CHECK(two.eigenvalues[0] == Approx(1.0).epsilon(1e-14));
  CHECK(two.eigenvalues[1] == Approx(3.0).epsilon(1e-14));
}

TEST_CASE("spectral decomposition: reconstruction and orthonormality on 1000 random draws")
{
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  double worst_rec = 0.0, worst_orth = 0.0, worst_eig = 0.0;
  for (int n = 0; n < 1000; ++n)
  {
    const int dim = n % 4 == 0 ? 2 : 3;
    const SymTensor a = oracle::random_symmetric(rng, dim, scale(rng));
    const SpectralDecomp sd = spectral(a);
    const double rel = frobenius_norm(sd.reconstruct() - a) / std::max(frobenius_norm(a), 1e-300);
    worst_rec = std::max(worst_rec, rel);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
      {
        double q = 0.0;
        for (int k = 0; k < dim; ++k) q += sd.eigenvectors(k, i) * sd.eigenvectors(k, j);
        worst_orth = std::max(worst_orth, std::abs(q - (i == j ? 1.0 : 0.0)));
      }
    for (int i = 1; i < dim; ++i) CHECK(sd.eigenvalues[i - 1] <= sd.eigenvalues[i]);
    const Eigen::VectorXd ref = oracle::eigenvalues(a);
    for (int i = 0; i < dim; ++i)
      worst_eig = std::max(worst_eig, std::abs(ref(i) - sd.eigenvalues[i]) / frobenius_norm(a));
  }
  CHECK(worst_rec <= 1e-12);
  CHECK(worst_orth <= 1e-12);
  CHECK(worst_eig <= 1e-13);
}

TEST_CASE("matrix logarithm")
{
  CHECK(frobenius_norm(matrix_log(SymTensor::identity(3))) == 0.0);
  CHECK(max_abs_diff(matrix_log(SymTensor::identity(3) * e), SymTensor::identity(3)) <= 1e-14);
  const SymTensor l = matrix_log(SymTensor::diagonal(2.0, 0.5, 1.0));
  CHECK(l(0, 0) == Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(l(1, 1) == Approx(-std::log(2.0)).epsilon(1e-14));
  CHECK(std::abs(l(2, 2)) <= 1e-15);
  CHECK(std::abs(trace(l)) <= 1e-15);

  try
  {
    (void)matrix_log(SymTensor::diagonal(-0.5, 1.0, 2.0));
    FAIL("expected NonSpdError");
  }
  catch (const NonSpdError& err)
  {
    CHECK(err.min_eigenvalue() == Approx(-0.5));
  }
  CHECK_THROWS_AS(matrix_log(SymTensor::diagonal(1e-13, 1.0, 1.0)), NonSpdError);
}

TEST_CASE("inverse")
{
  CHECK(max_abs_diff(inverse(SymTensor::identity(3)), SymTensor::identity(3)) <= 1e-15);
  CHECK(max_abs_diff(inverse(SymTensor::diagonal(2.0, 4.0, 8.0)), SymTensor::diagonal(0.5, 0.25, 0.125)) <= 1e-15);
  CHECK(max_abs_diff(inverse(SymTensor::identity(3) * (1.0 / s3)), SymTensor::identity(3) * s3) <= 1e-14);
  CHECK_THROWS_AS(inverse(SymTensor::diagonal(0.0, 1.0, 1.0)), SingularError);
  // Indefinite but regular matrices still invert.
  CHECK(max_abs_diff(inverse(SymTensor::diagonal(-2.0, 1.0, 1.0)), SymTensor::diagonal(-0.5, 1.0, 1.0)) <= 1e-15);
}

TEST_CASE("minimum eigenvalue")
{
  CHECK(min_eigenvalue(SymTensor::identity(3)) == Approx(1.0));
  CHECK(min_eigenvalue(SymTensor::diagonal(-1.0, 2.0, 3.0)) == Approx(-1.0));
  CHECK(min_eigenvalue(from_matrix(2, {2, 1, 1, 2})) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("log identities: examples")
{
  const LogIdentityResiduals i = check_log_identities(SymTensor::identity(3));
  CHECK(std::abs(i.trace_log_minus_log_det) <= 1e-15);
  CHECK(i.squared_trace_bound == Approx(6.0));
  CHECK(i.inverse_trace_bound == Approx(3.0));

  const LogIdentityResiduals r = check_log_identities(SymTensor::identity(3) * e);
  CHECK(std::abs(r.trace_log_minus_log_det) <= 1e-14);
  CHECK(r.squared_trace_bound == Approx(9.0 * e * e - 9.0).epsilon(1e-13));
  CHECK(r.inverse_trace_bound == Approx(3.0 * e + 3.0 / e - 3.0).epsilon(1e-13));
  CHECK_THROWS_AS(check_log_identities(SymTensor::diagonal(-1.0, 1.0, 1.0)), NonSpdError);
}

TEST_CASE("log identities and log/inverse consistency on 1000 random SPD draws")
{
  std::mt19937_64 rng(7);
  for (int n = 0; n < 1000; ++n)
  {
    const int dim = n % 5 == 0 ? 2 : 3;
    const SymTensor a = oracle::random_spd(rng, dim, 0.1, 10.0);
    const LogIdentityResiduals r = check_log_identities(a);
    CHECK(std::abs(r.trace_log_minus_log_det) <= 1e-10);
    CHECK(r.squared_trace_bound >= -1e-10);
    CHECK(r.inverse_trace_bound >= -1e-10);
    CHECK(max_abs_diff(matrix_log(inverse(a)), matrix_log(a) * -1.0) <= 1e-10);
  }
}

TEST_CASE("jacobi residual: examples and second-order decay")
{
  auto path = [](auto f, double dt, int n) {
    std::vector<SymTensor> p;
    for (int k = 0; k <= n; ++k) p.push_back(f(k * dt));
    return p;
  };
  auto constant = [](double) { return SymTensor::diagonal(2.0, 3.0, 0.5); };
  auto expo = [](double t) { return SymTensor::identity(3) * std::exp(t); };
  auto stretch = [](double t) { return SymTensor::diagonal(1.0 + t, 1.0, 1.0); };

  CHECK(jacobi_residual(path(constant, 1e-3, 10), 1e-3) == 0.0);
  const double r_exp = jacobi_residual(path(expo, 1e-3, 100), 1e-3);
  const double r_str = jacobi_residual(path(stretch, 1e-3, 100), 1e-3);
  CHECK(r_exp <= 1e-5);
  CHECK(r_str <= 1e-5);

  // Same time window with half the spacing.
  const double r_exp2 = jacobi_residual(path(expo, 2e-3, 50), 2e-3);
  const double r_str2 = jacobi_residual(path(stretch, 2e-3, 50), 2e-3);
  CHECK(r_exp2 / r_exp == Approx(4.0).epsilon(0.05));
  CHECK(r_str2 / r_str == Approx(4.0).epsilon(0.05));

  std::vector<SymTensor> bad = path(constant, 1e-3, 4);
  bad[2] = SymTensor::diagonal(-1.0, 1.0, 1.0);
  CHECK_THROWS_AS(jacobi_residual(bad, 1e-3), NonSpdError);
}

TEST_CASE("trace norm check")
{
  const TraceNormCheck i = trace_norm_check(SymTensor::identity(3), 2);
  CHECK(i.entry_norm == Approx(3.0));
  CHECK(i.trace_power == Approx(9.0));
  CHECK(i.upper_bound == Approx(9.0));

  const TraceNormCheck r = trace_norm_check(SymTensor::diagonal(1.0, 0.0, 0.0), 2);
  CHECK(r.entry_norm == Approx(1.0));
  CHECK(r.trace_power == Approx(1.0));
  CHECK(r.upper_bound == Approx(3.0));

  std::mt19937_64 rng(99);
  for (int n = 0; n < 1000; ++n)
  {
    const SymTensor a = oracle::random_spd(rng, n % 3 == 0 ? 2 : 3, 0.0, 5.0);
    for (int p : {2, 3, 4})
    {
      const TraceNormCheck c = trace_norm_check(a, p);
      CHECK(c.entry_norm <= c.trace_power * (1.0 + 1e-12));
      CHECK(c.trace_power <= c.upper_bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("upper convected term")
{
  SmallMatrix g(3);
  CHECK(frobenius_norm(upper_convected(SymTensor::diagonal(1.0, 2.0, 3.0), g)) == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = u(rng);
  const SymTensor s = upper_convected(SymTensor::identity(3), g);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(s(i, j) == Approx(g(i, j) + g(j, i)).epsilon(1e-15));

  SmallMatrix e12(3);
  e12(0, 1) = 1.0;
  const SymTensor t = upper_convected(SymTensor::diagonal(1.0, 2.0, 3.0), e12);
  CHECK(t(0, 1) == 2.0);
  CHECK(t(0, 0) == 0.0);
  CHECK(t(1, 1) == 0.0);
  CHECK(t(2, 2) == 0.0);
  CHECK(t(0, 2) == 0.0);
  CHECK(t(1, 2) == 0.0);
}
