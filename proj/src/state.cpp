// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/state.hpp"

#include "peterlin/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace peterlin
{
  namespace
  {
    void require(bool ok, const std::string& what)
    {
      if (!ok) throw ValidationError(what);
    }
  }  // namespace

  void SolverConfig::validate() const
  {
    require(std::isfinite(eta) && eta > 0.0, "eta must be positive");
    require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
    require(std::isfinite(a) && a >= 0.0, "a must be non-negative");
    require(std::isfinite(dt) && dt >= 0.0, "dt must be positive (or 0 for the cfl_like rule)");
    require(std::isfinite(cfl_like) && cfl_like > 0.0, "cfl_like must be positive");
    require(std::isfinite(t_final) && t_final >= 0.0, "t_final must be non-negative");
    require(fp_tol > 0.0, "fp_tol must be positive");
    require(fp_max_iters >= 1, "fp_max_iters must be at least 1");
    require(lin_tol > 0.0 && lin_tol < 1.0, "lin_tol must lie in (0, 1)");
    require(lin_max_iters >= 1, "lin_max_iters must be at least 1");
    require(std::isfinite(delta_bp) && delta_bp > 0.0, "delta_bp must be positive");
    for (int deg : {assembly_degree, nonlinear_degree, diagnostics_degree})
      require(deg >= 1 && deg <= 4, "quadrature degrees must lie in 1..4");
  }

  int SolverConfig::step_count(double h) const
  {
    if (t_final == 0.0) return 0;
    const double nominal = dt > 0.0 ? dt : cfl_like * h;
    if (nominal >= t_final) return 1;
    return int(std::ceil(t_final / nominal - 1e-9));
  }

  double SolverConfig::effective_dt(double h) const
  {
    const int n = step_count(h);
    return n == 0 ? 0.0 : t_final / n;
  }

  double equilibrium_value(int dim) { return 1.0 / std::sqrt(double(dim)); }

  namespace
  {
    FieldFunction diagonal_tensor(int dim, double value)
    {
      return [dim, value](const Point&, std::span<double> out) {
        for (int s = 0; s < sym_size(dim); ++s) out[s] = s < dim ? value : 0.0;
      };
    }

    FieldFunction zero_vector()
    {
      return [](const Point&, std::span<double> out) {
        for (double& v : out) v = 0.0;
      };
    }
  }  // namespace

  InitialData sine_initial_data(int dim)
  {
    InitialData data;
    data.velocity = [dim](const Point& x, std::span<double> out) {
      double s = 1.0;
      for (int c = 0; c < dim; ++c) s *= std::sin(2.0 * std::numbers::pi * x[c]);
      for (int c = 0; c < dim; ++c) out[c] = s;
    };
    data.conformation = diagonal_tensor(dim, 1.0 / std::sqrt(3.0));
    return data;
  }

  InitialData equilibrium_initial_data(int dim)
  {
    return {zero_vector(), diagonal_tensor(dim, equilibrium_value(dim))};
  }

  InitialData zero_initial_data(int dim) { return {zero_vector(), diagonal_tensor(dim, 0.0)}; }

}  // namespace peterlin
