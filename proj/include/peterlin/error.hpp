// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PETERLIN_ERROR_HPP
#define PETERLIN_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace peterlin
{
  /// Base class of every exception thrown by the library.
  class Error : public std::runtime_error
  {
   public:
    using std::runtime_error::runtime_error;
  };

  class DimensionMismatch : public Error
  {
   public:
    using Error::Error;
  };

  /// A tensor (or a field vertex) failed a positive-definiteness requirement.
  class NonSpdError : public Error
  {
   public:
    NonSpdError(const std::string& what, double min_eigenvalue, std::ptrdiff_t vertex = -1);

    [[nodiscard]] double min_eigenvalue() const noexcept { return min_eigenvalue_; }
    /// Offending vertex for field-level checks, -1 for single tensors.
    [[nodiscard]] std::ptrdiff_t vertex() const noexcept { return vertex_; }

   private:
    double min_eigenvalue_;
    std::ptrdiff_t vertex_;
  };

  class SingularError : public Error
  {
   public:
    SingularError(const std::string& what, double min_abs_eigenvalue);
    [[nodiscard]] double min_abs_eigenvalue() const noexcept { return value_; }

   private:
    double value_;
  };

  class MeshMismatch : public Error
  {
   public:
    using Error::Error;
  };

  class LinearSolveFailed : public Error
  {
   public:
    LinearSolveFailed(const std::string& what, int iterations, double relative_residual);
    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] double relative_residual() const noexcept { return residual_; }

   private:
    int iterations_;
    double residual_;
  };

  class FixedPointDiverged : public Error
  {
   public:
    FixedPointDiverged(const std::string& what, int iterations, double increment);
    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] double increment() const noexcept { return increment_; }

   private:
    int iterations_;
    double increment_;
  };

  /// A solver error annotated with the simulation time at which it happened.
  class SimulationFailed : public Error
  {
   public:
    SimulationFailed(const std::string& what, double time);
    [[nodiscard]] double time() const noexcept { return time_; }

   private:
    double time_;
  };

  class ParseError : public Error
  {
   public:
    ParseError(const std::string& what, int line);
    [[nodiscard]] int line() const noexcept { return line_; }

   private:
    int line_;
  };

  class ValidationError : public Error
  {
   public:
    using Error::Error;
  };

  class IoError : public Error
  {
   public:
    using Error::Error;
  };

}  // namespace peterlin

#endif
