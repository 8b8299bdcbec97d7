// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "peterlin/error.hpp"
#include "peterlin/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace peterlin;
using doctest::Approx;
namespace fs = std::filesystem;

namespace
{
  fs::path scratch(const std::string& name)
  {
    const fs::path p = fs::temp_directory_path() / ("peterlin_test_" + name);
    fs::remove_all(p);
    return p;
  }

  std::vector<std::string> lines(const fs::path& p)
  {
    std::ifstream is(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
  }

  std::string slurp(const fs::path& p)
  {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  }

  int parse_line_of(std::string_view text)
  {
    try
    {
      (void)parse_config(text);
    }
    catch (const ParseError& e)
    {
      return e.line();
    }
    return -1;
  }
}  // namespace

TEST_CASE("presets")
{
  const RunManifest p3 = preset_manifest("paper3d");
  CHECK(p3.dim == 3);
  CHECK(p3.levels == std::vector<int>{2, 4, 8});
  CHECK(p3.reference == 16);
  CHECK(p3.solver.eta == 2.0);
  CHECK(p3.solver.epsilon == 1.0);
  CHECK(p3.solver.a == 0.0);
  CHECK(p3.solver.t_final == 1.0);
  CHECK(p3.has_reference());
  CHECK(preset_manifest("paper2d").dim == 2);
  CHECK(!preset_manifest("equilibrium").has_reference());
  CHECK(preset_manifest("mms").solver.t_final == 0.5);
  CHECK_THROWS_AS(preset_manifest("nope"), ValidationError);
}

TEST_CASE("parse config")
{
  const RunManifest empty = parse_config("", "paper3d");
  CHECK(empty.experiment == "paper3d");
  CHECK(empty.dim == 3);
  CHECK(empty.solver.eta == 2.0);
  CHECK(empty.solver.epsilon == 1.0);
  CHECK(empty.solver.a == 0.0);
  CHECK(empty.solver.t_final == 1.0);

  const RunManifest lv = parse_config("levels = 2,4,8\nreference = 16\n");
  CHECK(lv.levels.size() == 3);
  CHECK(lv.reference == 16);

  const RunManifest full = parse_config(
      "# comment line\n"
      "experiment = paper2d\n"
      "eta = 1.5   # trailing comment\n"
      "a=0.25\n"
      "\n"
      "T_final = 0.5\n"
      "dt = 0.01\n"
      "out = results\n"
      "threads = 3\n"
      "velocity_first = false\n");
  CHECK(full.experiment == "paper2d");
  CHECK(full.dim == 2);
  CHECK(full.solver.eta == 1.5);
  CHECK(full.solver.a == 0.25);
  CHECK(full.solver.t_final == 0.5);
  CHECK(full.solver.dt == 0.01);
  CHECK(full.output_dir == "results");
  CHECK(full.threads == 3);
  CHECK(!full.solver.velocity_first);

  // The explicit experiment wins over the file.
  CHECK(parse_config("experiment = paper2d\n", "mms").experiment == "mms");

  CHECK_THROWS_AS(parse_config("dt = -0.1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("dt = 0\n"), ValidationError);
  CHECK(parse_line_of("eta = 2\nbogus = 1\n") == 2);
  CHECK(parse_line_of("\n\nno equals sign\n") == 3);
  CHECK(parse_line_of("eta = 2\neta = 3\n") == 2);
  CHECK(parse_line_of("eta = fast\n") == 1);
  CHECK(parse_line_of("eta =\n") == 1);
  CHECK(parse_line_of("levels = 2,x\n") == 1);
  CHECK(parse_line_of("# c\nexperiment = nope\n") == 2);
  CHECK_THROWS_AS(parse_config("levels = 2,4\nreference = 4\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("levels = 2,4\nreference = 12\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("levels = 2,3\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("dim = 4\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("dim = 3\n", "mms"), ValidationError);
}

TEST_CASE("sample times")
{
  const std::vector<double> t = sample_times(1.0, 0.05);
  REQUIRE(t.size() == 21);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 1.0);
  CHECK(t[7] == Approx(0.35).epsilon(1e-15));
  CHECK(sample_times(0.0, 0.05).size() == 1);
  CHECK(sample_times(0.12, 0.05).size() == 3);
}

TEST_CASE("manufactured forcing against finite differences")
{
  SolverConfig c;
  const ManufacturedProblem p = manufactured_problem(c);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int n = 0; n < 50; ++n)
  {
    const Point x{u(rng), u(rng), 0.0};
    const double t = 0.5 * u(rng);
    std::array<double, 3> got{};
    p.forcing.body(t, x, got);
    const auto ref = oracle::fd_forcing(p.exact, c.epsilon, c.a, t, x);
    for (int k = 0; k < 3; ++k) CHECK(got[k] == Approx(ref[k]).epsilon(1e-5).scale(1.0));
  }
  const std::array<Point, 4> normals{Point{-1, 0, 0}, Point{1, 0, 0}, Point{0, -1, 0}, Point{0, 1, 0}};
  for (int n = 0; n < 20; ++n)
    for (int side = 0; side < 4; ++side)
    {
      const double s = u(rng);
      const Point x = side < 2 ? Point{side == 0 ? 0.0 : 1.0, s, 0.0} : Point{s, side == 2 ? 0.0 : 1.0, 0.0};
      std::array<double, 3> got{};
      p.forcing.flux(0.3, x, normals[side], got);
      const auto ref = oracle::fd_flux(p.exact, c.epsilon, 0.3, x, normals[side]);
      for (int k = 0; k < 3; ++k) CHECK(got[k] == Approx(ref[k]).epsilon(1e-6).scale(1.0));
    }
  std::array<double, 3> c0{};
  p.exact(0.0, {0.5, 0.5, 0.0}, c0);
  CHECK(c0[0] == Approx(1.25 / std::sqrt(3.0)));
  CHECK(c0[2] == 0.0);
}

TEST_CASE("equilibrium experiment")
{
  RunManifest m = preset_manifest("equilibrium");
  m.dim = 2;
  m.levels = {2, 4};
  m.output_dir = scratch("equilibrium").string();
  std::vector<std::string> log;
  const ExperimentResult r = run_experiment(m, [&](const std::string& s) { log.push_back(s); });
  CHECK(!log.empty());
  REQUIRE(r.levels.size() == 2);
  CHECK(!r.reference);
  for (const LevelResult& l : r.levels)
  {
    CHECK(l.relative.size() == 21);
    for (const RelativeEnergyRecord& rec : l.relative) CHECK(rec.total <= 1e-8);
    const std::vector<std::string> csv = lines(fs::path(m.output_dir) / ("diagnostics_M" + std::to_string(l.cells) + ".csv"));
    CHECK(csv.front() == diagnostics_header);
    CHECK(csv.size() == l.diagnostics.size() + 1);
    CHECK(l.diagnostics.size() == std::size_t(m.solver.step_count(1.0 / l.cells) + 1));
  }
  const std::vector<std::string> rel = lines(fs::path(m.output_dir) / "relative_energy.csv");
  CHECK(rel.front() == relative_energy_header);
  CHECK(rel.size() == 1 + 2 * 21);
  const std::vector<std::string> eo = lines(fs::path(m.output_dir) / "eoc.csv");
  CHECK(eo.front() == eoc_header);
  CHECK(eo.size() == 1 + 21);
}

TEST_CASE("hierarchy study in 2D: schema and reproducibility")
{
  RunManifest m = preset_manifest("paper2d");
  m.levels = {2, 4};
  m.reference = 8;
  m.solver.t_final = 0.25;
  m.output_dir = scratch("study_a").string();
  const ExperimentResult a = run_experiment(m);
  REQUIRE(a.reference);
  CHECK(fs::exists(fs::path(m.output_dir) / "reference" / "snapshot_0.txt"));
  CHECK(fs::exists(fs::path(m.output_dir) / "reference" / "snapshot_5.txt"));
  CHECK(a.eoc.size() == 6);
  for (const EocRow& row : a.eoc)
  {
    CHECK(row.coarse == 2);
    CHECK(row.fine == 4);
  }
  for (const EocRow& row : a.eoc) CHECK(std::isfinite(row.value));

  const fs::path first(m.output_dir);
  m.output_dir = scratch("study_b").string();
  m.threads = 2;
  (void)run_experiment(m);
  for (const char* f : {"diagnostics_M2.csv", "diagnostics_M4.csv", "diagnostics_M8.csv", "relative_energy.csv", "eoc.csv"})
  {
    CHECK(slurp(first / f) == slurp(fs::path(m.output_dir) / f));
    CHECK(!slurp(first / f).empty());
  }
  const std::vector<std::string> d = lines(first / "diagnostics_M4.csv");
  CHECK(d.front() == diagnostics_header);
  CHECK(d.size() == std::size_t(m.solver.step_count(0.25) + 2));
}

TEST_CASE("a failing level leaves a marker")
{
  RunManifest m = preset_manifest("mms");
  m.levels = {4, 8};
  m.solver.fp_max_iters = 1;
  m.output_dir = scratch("failing").string();
  CHECK_THROWS_AS(run_experiment(m), SimulationFailed);
  const std::vector<std::string> d = lines(fs::path(m.output_dir) / "diagnostics_M4.csv");
  REQUIRE(d.size() >= 2);
  CHECK(d.front() == diagnostics_header);
  CHECK(d.back().rfind("FAILED,", 0) == 0);
  CHECK(lines(fs::path(m.output_dir) / "relative_energy.csv").back() == "FAILED");
}

TEST_CASE("diagnostics row format")
{
  DiagnosticsRecord r;
  r.t = 0.1;
  r.log_term = std::numeric_limits<double>::quiet_NaN();
  r.fp_iters = 7;
  const std::string row = format_diagnostics_row(r);
  CHECK(row.rfind("0.10000000000000001,", 0) == 0);
  CHECK(row.find(",nan,") != std::string::npos);
  CHECK(row.substr(row.size() - 2) == ",7");
  CHECK(std::count(row.begin(), row.end(), ',') == 12);
}
