// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PETERLIN_EXPERIMENT_HPP
#define PETERLIN_EXPERIMENT_HPP

#include "peterlin/diagnostics.hpp"
#include "peterlin/solver.hpp"
#include "peterlin/state.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace peterlin
{
  /// Everything needed to reproduce one experiment.
  struct RunManifest
  {
    std::string experiment = "paper3d";  ///< paper3d, paper2d, equilibrium or mms
    int dim = 3;
    std::vector<int> levels{2, 4, 8};
    int reference = 16;  ///< only used by the hierarchy studies
    SolverConfig solver;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    int threads = 1;
    double sample_interval = 0.05;

    /// Throws ValidationError for inconsistent levels or settings.
    void validate() const;
    /// Whether the experiment compares levels against a reference run.
    [[nodiscard]] bool has_reference() const;
  };

  /// Defaults of a named experiment. Throws ValidationError for unknown names.
  RunManifest preset_manifest(std::string_view experiment);

  /// Line-oriented `key = value` text with `#` comments. The experiment given
  /// here wins over an `experiment` key in the text; its preset supplies every
  /// omitted value. Unknown keys and malformed lines raise ParseError.
  RunManifest parse_config(std::string_view text, std::optional<std::string> experiment = std::nullopt);

  /// The manufactured problem of the conformation equation alone in 2D:
  /// C*(x, t) = (1 + e^-t sin(pi x) sin(pi y) / 4) I / sqrt(3) with u = 0.
  struct ManufacturedProblem
  {
    std::function<void(double t, const Point& x, std::span<double> out)> exact;
    ConformationForcing forcing;
  };

  ManufacturedProblem manufactured_problem(const SolverConfig& config);

  struct RelativeEnergySample
  {
    int cells;  ///< M of the level
    RelativeEnergyRecord record;
  };

  struct EocRow
  {
    double t;
    int coarse;
    int fine;
    double value;  ///< NaN when either error vanishes
  };

  struct LevelResult
  {
    int cells;
    std::vector<DiagnosticsRecord> diagnostics;
    std::vector<RelativeEnergyRecord> relative;  ///< one per sample time
  };

  struct ExperimentResult
  {
    std::vector<LevelResult> levels;  ///< study levels in manifest order
    std::optional<LevelResult> reference;
    std::vector<EocRow> eoc;
  };

  using LogSink = std::function<void(const std::string&)>;

  /// Runs the experiment and writes diagnostics_M<k>.csv, relative_energy.csv
  /// and eoc.csv to the output directory. Reference snapshots go to
  /// <out>/reference. A failing level leaves a FAILED line in its CSV.
  ExperimentResult run_experiment(const RunManifest& manifest, const LogSink& log = {});

  /// Sample times 0, dt_s, 2 dt_s, ... up to t_final.
  std::vector<double> sample_times(double t_final, double interval);

  inline constexpr std::string_view diagnostics_header =
      "t,kinetic,elastic_trace,frobenius,log_term,visc_diss,trace_grad_diss,relax_diss,source,free_energy,min_eig,"
      "div_norm,fp_iters";
  inline constexpr std::string_view relative_energy_header = "t,M,E_kin,E_el,E_frob,E_total";
  inline constexpr std::string_view eoc_header = "t,M_coarse,M_fine,EOC";

  /// One CSV row of a diagnostics record, numbers with 17 significant digits.
  std::string format_diagnostics_row(const DiagnosticsRecord& r);

}  // namespace peterlin

#endif
