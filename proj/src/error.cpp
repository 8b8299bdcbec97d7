// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/error.hpp"

namespace peterlin
{
  NonSpdError::NonSpdError(const std::string& what, double min_eigenvalue, std::ptrdiff_t vertex)
      : Error(what), min_eigenvalue_(min_eigenvalue), vertex_(vertex)
  {
  }

  SingularError::SingularError(const std::string& what, double min_abs_eigenvalue)
      : Error(what), value_(min_abs_eigenvalue)
  {
  }

  LinearSolveFailed::LinearSolveFailed(
      const std::string& what, int iterations, double relative_residual)
      : Error(what), iterations_(iterations), residual_(relative_residual)
  {
  }

  FixedPointDiverged::FixedPointDiverged(const std::string& what, int iterations, double increment)
      : Error(what), iterations_(iterations), increment_(increment)
  {
  }

  SimulationFailed::SimulationFailed(const std::string& what, double time)
      : Error(what), time_(time)
  {
  }

  ParseError::ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line)
  {
  }

}  // namespace peterlin
