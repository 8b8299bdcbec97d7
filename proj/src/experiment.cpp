// Copyright 2026 The peterlin Authors
// SPDX-License-Identifier: Apache-2.0

#include "peterlin/experiment.hpp"

#include "peterlin/error.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace peterlin
{
  namespace fs = std::filesystem;

  namespace
  {
    bool is_hierarchy(std::string_view e) { return e == "paper3d" || e == "paper2d"; }

    bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

    std::string fmt(double v)
    {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return buf;
    }

    std::string trim(std::string_view s)
    {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string_view::npos) return {};
      const auto e = s.find_last_not_of(" \t\r");
      return std::string(s.substr(b, e - b + 1));
    }
  }  // namespace

  bool RunManifest::has_reference() const { return is_hierarchy(experiment); }

  void RunManifest::validate() const
  {
    if (experiment != "paper3d" && experiment != "paper2d" && experiment != "equilibrium" && experiment != "mms")
      throw ValidationError("unknown experiment '" + experiment + "'");
    if (dim != 2 && dim != 3) throw ValidationError("dim must be 2 or 3");
    if (experiment == "mms" && dim != 2) throw ValidationError("the manufactured solution is two-dimensional");
    if (levels.empty()) throw ValidationError("at least one level is required");
    for (std::size_t i = 0; i < levels.size(); ++i)
    {
      if (levels[i] < 1) throw ValidationError("levels must be positive");
      if (i > 0 && levels[i] != 2 * levels[i - 1]) throw ValidationError("levels must double from one to the next");
    }
    if (has_reference())
    {
      const int finest = *std::max_element(levels.begin(), levels.end());
      if (reference <= finest) throw ValidationError("reference must be finer than every level");
      for (int m : levels)
        if (reference % m != 0 || !power_of_two(reference / m))
          throw ValidationError("reference must be a power-of-two multiple of every level");
    }
    if (threads < 1) throw ValidationError("threads must be at least 1");
    if (!(sample_interval > 0.0)) throw ValidationError("sample_interval must be positive");
    solver.validate();
  }

  RunManifest preset_manifest(std::string_view experiment)
  {
    RunManifest m;
    m.experiment = std::string(experiment);
    if (experiment == "paper3d")
    {
    }
    else if (experiment == "paper2d")
    {
      m.dim = 2;
      m.levels = {4, 8, 16};
      m.reference = 32;
    }
    else if (experiment == "equilibrium")
    {
      m.levels = {4};
      m.reference = 0;
    }
    else if (experiment == "mms")
    {
      m.dim = 2;
      m.levels = {8, 16, 32};
      m.reference = 0;
      m.solver.t_final = 0.5;
    }
    else
    {
      throw ValidationError("unknown experiment '" + std::string(experiment) + "'");
    }
    return m;
  }

  namespace
  {
    struct Entry
    {
      int line;
      std::string key;
      std::string value;
    };

    double to_double(const Entry& e)
    {
      double v = 0.0;
      const char* b = e.value.data();
      const char* end = b + e.value.size();
      const auto [p, ec] = std::from_chars(b, end, v);
      if (ec != std::errc() || p != end) throw ParseError("'" + e.key + "' needs a number, got '" + e.value + "'", e.line);
      return v;
    }

    long long to_integer(const Entry& e)
    {
      long long v = 0;
      const char* b = e.value.data();
      const char* end = b + e.value.size();
      const auto [p, ec] = std::from_chars(b, end, v);
      if (ec != std::errc() || p != end)
        throw ParseError("'" + e.key + "' needs an integer, got '" + e.value + "'", e.line);
      return v;
    }

    bool to_bool(const Entry& e)
    {
      if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
      if (e.value == "false" || e.value == "0" || e.value == "no") return false;
      throw ParseError("'" + e.key + "' needs true or false, got '" + e.value + "'", e.line);
    }

    std::vector<int> to_levels(const Entry& e)
    {
      std::vector<int> out;
      std::stringstream ss(e.value);
      std::string item;
      while (std::getline(ss, item, ','))
      {
        const Entry one{e.line, e.key, trim(item)};
        const long long v = to_integer(one);
        if (v < 1 || v > 4096) throw ParseError("level out of range: " + one.value, e.line);
        out.push_back(int(v));
      }
      if (out.empty()) throw ParseError("'levels' is empty", e.line);
      return out;
    }

    void apply(RunManifest& m, const Entry& e)
    {
      SolverConfig& s = m.solver;
      const std::string& k = e.key;
      if (k == "experiment") return;
      if (k == "dim") m.dim = int(to_integer(e));
      else if (k == "levels") m.levels = to_levels(e);
      else if (k == "reference") m.reference = int(to_integer(e));
      else if (k == "output_dir" || k == "out") m.output_dir = e.value;
      else if (k == "seed") m.seed = std::uint64_t(to_integer(e));
      else if (k == "threads") m.threads = int(to_integer(e));
      else if (k == "sample_interval") m.sample_interval = to_double(e);
      else if (k == "eta") s.eta = to_double(e);
      else if (k == "epsilon") s.epsilon = to_double(e);
      else if (k == "a") s.a = to_double(e);
      else if (k == "dt")
      {
        s.dt = to_double(e);
        if (!(s.dt > 0.0)) throw ValidationError("dt must be positive (omit it for the cfl_like rule)");
      }
      else if (k == "cfl_like") s.cfl_like = to_double(e);
      else if (k == "T_final" || k == "t_final") s.t_final = to_double(e);
      else if (k == "fp_tol") s.fp_tol = to_double(e);
      else if (k == "fp_max_iters") s.fp_max_iters = int(to_integer(e));
      else if (k == "lin_tol") s.lin_tol = to_double(e);
      else if (k == "lin_max_iters") s.lin_max_iters = int(to_integer(e));
      else if (k == "delta_bp") s.delta_bp = to_double(e);
      else if (k == "assembly_degree") s.assembly_degree = int(to_integer(e));
      else if (k == "nonlinear_degree") s.nonlinear_degree = int(to_integer(e));
      else if (k == "diagnostics_degree") s.diagnostics_degree = int(to_integer(e));
      else if (k == "velocity_first") s.velocity_first = to_bool(e);
      else throw ParseError("unknown key '" + k + "'", e.line);
    }
  }  // namespace

  RunManifest parse_config(std::string_view text, std::optional<std::string> experiment)
  {
    std::vector<Entry> entries;
    std::map<std::string, int> seen;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size())
    {
      const std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
      Entry e{line_no, trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1))};
      if (e.key.empty()) throw ParseError("missing key", line_no);
      if (e.value.empty()) throw ParseError("missing value for '" + e.key + "'", line_no);
      if (!seen.emplace(e.key, line_no).second) throw ParseError("duplicate key '" + e.key + "'", line_no);
      entries.push_back(std::move(e));
    }

    std::string name = "paper3d";
    for (const Entry& e : entries)
      if (e.key == "experiment") name = e.value;
    if (experiment) name = *experiment;

    RunManifest m;
    try
    {
      m = preset_manifest(name);
    }
    catch (const ValidationError&)
    {
      const auto it = seen.find("experiment");
      if (!experiment && it != seen.end()) throw ParseError("unknown experiment '" + name + "'", it->second);
      throw;
    }
    for (const Entry& e : entries) apply(m, e);
    m.validate();
    return m;
  }

  ManufacturedProblem manufactured_problem(const SolverConfig& config)
  {
    const double c0 = 1.0 / std::sqrt(3.0);
    const double pi = std::numbers::pi;
    const double eps = config.epsilon;
    const double a = config.a;
    // s(x, t) = 1 + e^-t sin(pi x) sin(pi y) / 4 and C* = s c0 I.
    auto bump = [pi](double t, const Point& x) {
      return 0.25 * std::exp(-t) * std::sin(pi * x[0]) * std::sin(pi * x[1]);
    };

    ManufacturedProblem p;
    p.exact = [=](double t, const Point& x, std::span<double> out) {
      const double v = (1.0 + bump(t, x)) * c0;
      out[0] = v;
      out[1] = v;
      out[2] = 0.0;
    };
    p.forcing.body = [=](double t, const Point& x, std::span<double> out) {
      const double b = bump(t, x);
      const double s = 1.0 + b;
      const double ds_dt = -b;
      const double lap_s = -2.0 * pi * pi * b;
      const double tr = 2.0 * s * c0;
      const double phi = tr + a;
      const double chi = tr * tr + a * std::abs(tr);
      const double v = c0 * (ds_dt - eps * lap_s) - phi + chi * s * c0;
      out[0] = v;
      out[1] = v;
      out[2] = 0.0;
    };
    p.forcing.flux = [=](double t, const Point& x, const Point& n, std::span<double> out) {
      const double amp = 0.25 * std::exp(-t);
      const double gx = amp * pi * std::cos(pi * x[0]) * std::sin(pi * x[1]);
      const double gy = amp * pi * std::sin(pi * x[0]) * std::cos(pi * x[1]);
      const double v = eps * c0 * (gx * n[0] + gy * n[1]);
      out[0] = v;
      out[1] = v;
      out[2] = 0.0;
    };
    return p;
  }

  std::vector<double> sample_times(double t_final, double interval)
  {
    std::vector<double> out;
    const int n = int(std::floor(t_final / interval + 1e-9));
    for (int j = 0; j <= n; ++j) out.push_back(j == n && std::abs(j * interval - t_final) < 1e-9 ? t_final : j * interval);
    return out;
  }

  std::string format_diagnostics_row(const DiagnosticsRecord& r)
  {
    std::string s;
    for (double v : {r.t, r.kinetic, r.elastic_trace, r.frobenius, r.log_term, r.visc_diss, r.trace_grad_diss,
             r.relax_diss, r.source, r.free_energy, r.min_eig, r.div_norm})
    {
      s += fmt(v);
      s += ',';
    }
    s += std::to_string(r.fp_iters);
    return s;
  }

  namespace
  {
    SimulationState lerp_state(const SimulationState& a, const SimulationState& b, double t)
    {
      const double w = (t - a.t) / (b.t - a.t);
      SimulationState s = b;
      s.t = t;
      auto mix = [w](const NodalField& x, NodalField& y) {
        const auto xv = x.values();
        auto yv = y.values();
        for (std::size_t i = 0; i < yv.size(); ++i) yv[i] = (1.0 - w) * xv[i] + w * yv[i];
      };
      mix(a.u, s.u);
      mix(a.p, s.p);
      mix(a.C, s.C);
      return s;
    }

    /// Feeds states at the sample times, interpolating linearly between steps.
    class Sampler
    {
     public:
      Sampler(std::vector<double> times, std::function<void(std::size_t, const SimulationState&)> sink)
          : times_(std::move(times)), sink_(std::move(sink))
      {
      }

      void operator()(const SimulationState& s)
      {
        constexpr double tol = 1e-10;
        while (next_ < times_.size() && times_[next_] <= s.t + tol)
        {
          const double ts = times_[next_];
          if (std::abs(ts - s.t) <= tol || !prev_)
            sink_(next_, s);
          else
            sink_(next_, lerp_state(*prev_, s, ts));
          ++next_;
        }
        prev_ = s;
      }

     private:
      std::vector<double> times_;
      std::function<void(std::size_t, const SimulationState&)> sink_;
      std::optional<SimulationState> prev_;
      std::size_t next_ = 0;
    };

    fs::path snapshot_path(const fs::path& out, std::size_t j)
    {
      return out / "reference" / ("snapshot_" + std::to_string(j) + ".txt");
    }

    void write_snapshot(const fs::path& path, const SimulationState& s)
    {
      std::ofstream os(path);
      if (!os) throw IoError("cannot write " + path.string());
      os << fmt(s.t) << '\n';
      write_dump(os, s.u);
      write_dump(os, s.p);
      write_dump(os, s.C);
      if (!os) throw IoError("failed writing " + path.string());
    }

    SimulationState read_snapshot(const fs::path& path, const MeshPtr& mesh)
    {
      std::ifstream is(path);
      if (!is) throw IoError("cannot read " + path.string());
      double t = 0.0;
      if (!(is >> t)) throw IoError("malformed snapshot " + path.string());
      NodalField u = read_dump(is, mesh);
      NodalField p = read_dump(is, mesh);
      NodalField c = read_dump(is, mesh);
      return {t, std::move(u), std::move(p), std::move(c)};
    }

    SimulationState prolongate_state(const SimulationState& s, const MeshPtr& fine)
    {
      return {s.t, prolongate(s.u, fine), prolongate(s.p, fine), prolongate(s.C, fine)};
    }

    struct Setup
    {
      InitialData data;
      ProblemOptions options;
      std::function<void(double, const Point&, std::span<double>)> exact_c;
    };

    Setup make_setup(const RunManifest& m)
    {
      Setup s;
      if (m.experiment == "mms")
      {
        ManufacturedProblem p = manufactured_problem(m.solver);
        s.data.velocity = [](const Point&, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
        auto exact = p.exact;
        s.data.conformation = [exact](const Point& x, std::span<double> out) { exact(0.0, x, out); };
        s.options.freeze_velocity = true;
        s.options.forcing = p.forcing;
        s.exact_c = exact;
      }
      else if (m.experiment == "equilibrium")
      {
        s.data = equilibrium_initial_data(m.dim);
        const double c = equilibrium_value(m.dim);
        const int d = m.dim;
        s.exact_c = [c, d](double, const Point&, std::span<double> out) {
          for (int k = 0; k < sym_size(d); ++k) out[k] = k < d ? c : 0.0;
        };
      }
      else
      {
        s.data = sine_initial_data(m.dim);
      }
      return s;
    }

    /// Writes the diagnostics CSV of one level while it runs.
    class DiagnosticsWriter
    {
     public:
      explicit DiagnosticsWriter(const fs::path& path) : path_(path), os_(path)
      {
        if (!os_) throw IoError("cannot write " + path.string());
        os_ << diagnostics_header << '\n';
      }
      void row(const DiagnosticsRecord& r) { os_ << format_diagnostics_row(r) << '\n'; }
      void fail(const std::string& what)
      {
        os_ << "FAILED," << what << '\n';
        os_.flush();
      }
      void close()
      {
        os_.flush();
        if (!os_) throw IoError("failed writing " + path_.string());
      }

     private:
      fs::path path_;
      std::ofstream os_;
    };

    std::string csv_safe(std::string s)
    {
      std::replace(s.begin(), s.end(), '\n', ' ');
      std::replace(s.begin(), s.end(), ',', ';');
      return s;
    }
  }  // namespace

  ExperimentResult run_experiment(const RunManifest& manifest, const LogSink& log)
  {
    manifest.validate();
    std::mutex log_mutex;
    auto say = [&](const std::string& msg) {
      if (!log) return;
      const std::lock_guard lock(log_mutex);
      log(msg);
    };

    const fs::path out(manifest.output_dir);
    fs::create_directories(out);
    const Setup setup = make_setup(manifest);
    const std::vector<double> times = sample_times(manifest.solver.t_final, manifest.sample_interval);
    ExperimentResult result;

    MeshPtr ref_mesh;
    if (manifest.has_reference())
    {
      ref_mesh = build_mesh(manifest.dim, manifest.reference);
      fs::create_directories(out / "reference");
      say("reference M=" + std::to_string(manifest.reference) + ": " +
          std::to_string(manifest.solver.step_count(ref_mesh->h())) + " steps");
      DiagnosticsWriter writer(out / ("diagnostics_M" + std::to_string(manifest.reference) + ".csv"));
      Sampler sampler(times, [&](std::size_t j, const SimulationState& s) { write_snapshot(snapshot_path(out, j), s); });
      LevelResult ref{manifest.reference, {}, {}};
      try
      {
        RunResult r = run(
            manifest.solver, ref_mesh, setup.data,
            [&](const SimulationState& s, const DiagnosticsRecord& d) {
              writer.row(d);
              sampler(s);
            },
            setup.options);
        ref.diagnostics = std::move(r.records);
      }
      catch (const std::exception& e)
      {
        writer.fail(csv_safe(e.what()));
        throw;
      }
      writer.close();
      result.reference = std::move(ref);
    }

    const std::size_t nlevels = manifest.levels.size();
    result.levels.resize(nlevels);
    std::vector<std::exception_ptr> errors(nlevels);

    auto run_level = [&](std::size_t i) {
      const int cells = manifest.levels[i];
      const MeshPtr mesh = build_mesh(manifest.dim, cells);
      LevelResult& level = result.levels[i];
      level.cells = cells;
      DiagnosticsWriter writer(out / ("diagnostics_M" + std::to_string(cells) + ".csv"));
      Sampler sampler(times, [&](std::size_t j, const SimulationState& s) {
        RelativeEnergyRecord rec;
        if (ref_mesh)
          rec = relative_energy(prolongate_state(s, ref_mesh), read_snapshot(snapshot_path(out, j), ref_mesh),
              manifest.solver.diagnostics_degree);
        else
        {
          const auto exact = setup.exact_c;
          const double t = s.t;
          rec = relative_energy_to_exact(
              s, [](const Point&, std::span<double> o) { std::fill(o.begin(), o.end(), 0.0); },
              [&](const Point& x, std::span<double> o) { exact(t, x, o); }, manifest.solver.diagnostics_degree);
        }
        rec.t = times[j];
        level.relative.push_back(rec);
      });
      try
      {
        say("level M=" + std::to_string(cells) + ": " + std::to_string(manifest.solver.step_count(mesh->h())) +
            " steps");
        RunResult r = run(
            manifest.solver, mesh, setup.data,
            [&](const SimulationState& s, const DiagnosticsRecord& d) {
              writer.row(d);
              sampler(s);
            },
            setup.options);
        level.diagnostics = std::move(r.records);
        writer.close();
        say("level M=" + std::to_string(cells) + " done");
      }
      catch (const std::exception& e)
      {
        writer.fail(csv_safe(e.what()));
        errors[i] = std::current_exception();
        say("level M=" + std::to_string(cells) + " FAILED: " + e.what());
      }
    };

    const int workers = std::min<int>(manifest.threads, int(nlevels));
    if (workers <= 1)
    {
      for (std::size_t i = 0; i < nlevels; ++i) run_level(i);
    }
    else
    {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < nlevels; i = next++) run_level(i);
        });
      for (auto& t : pool) t.join();
    }

    // Aggregation is single-threaded and in manifest order.
    bool failed = false;
    for (const auto& e : errors) failed = failed || bool(e);

    std::ofstream rel(out / "relative_energy.csv");
    rel << relative_energy_header << '\n';
    for (const LevelResult& l : result.levels)
      for (const RelativeEnergyRecord& r : l.relative)
        rel << fmt(r.t) << ',' << l.cells << ',' << fmt(r.e_kin) << ',' << fmt(r.e_el) << ',' << fmt(r.e_frob) << ','
            << fmt(r.total) << '\n';

    std::ofstream eo(out / "eoc.csv");
    eo << eoc_header << '\n';
    for (std::size_t j = 0; j < times.size(); ++j)
      for (std::size_t i = 0; i + 1 < nlevels; ++i)
      {
        const auto& c = result.levels[i].relative;
        const auto& f = result.levels[i + 1].relative;
        if (j >= c.size() || j >= f.size()) continue;
        const double ec = c[j].total, ef = f[j].total;
        const double v = ec > 0.0 && ef > 0.0 ? std::log2(ec / ef) : std::numeric_limits<double>::quiet_NaN();
        result.eoc.push_back({times[j], manifest.levels[i], manifest.levels[i + 1], v});
        eo << fmt(times[j]) << ',' << manifest.levels[i] << ',' << manifest.levels[i + 1] << ',' << fmt(v) << '\n';
      }

    if (failed)
    {
      rel << "FAILED\n";
      eo << "FAILED\n";
      rel.flush();
      eo.flush();
      for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    rel.flush();
    eo.flush();
    if (!rel || !eo) throw IoError("failed writing summary CSVs");
    return result;
  }

}  // namespace peterlin
