// Command-line front end: optimize a case, analyze a saved design, evaluate
// the straight-channel reference, audit gradients against finite
// differences, or sweep the named study presets. Exit codes: 0 success,
// 1 usage or configuration error, 2 solver failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hxtopo/hxtopo.hpp"

namespace {

using namespace hxtopo;

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), cat("cannot open config '", path, "'"));
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

CaseConfig load_config(const std::string& path, const std::string& preset) {
  require(path.empty() || preset.empty(), "give either a config file or --preset, not both");
  if (!preset.empty()) return study_preset(preset).config;
  if (!path.empty()) return parse_config(slurp(path));
  return CaseConfig{};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, cat("cannot create output directory '", dir, "'"));
}

void print_objective(const char* label, const ObjectiveReport& o) {
  std::printf("%s: J = %.6g  (J1 = %.6g, J2 = %.6g)\n", label, o.J, o.J1, o.J2);
  std::printf("  Vdot1 = %.6g  Tout1 = %.6g\n", o.vdot1, o.tout1);
  std::printf("  Vdot2 = %.6g  Tout2 = %.6g\n", o.vdot2, o.tout2);
}

// shared by optimize and sweep: run one case, stream history, export fields
OptimizationResult run_case(const CaseConfig& cfg, const std::string& out_dir, int snap_every) {
  const Problem p = build_problem(cfg);
  ensure_dir(out_dir);
  const std::string hist_path = out_dir + "/history.csv";
  std::ofstream hist(hist_path);
  require(hist.good(), cat("cannot open '", hist_path, "' for writing"));
  hist << history_csv_header() << "\n";

  const StepSink sink = [&](const StepRecord& rec, const DensityField& psi,
                            const AnalysisState& st) {
    hist << history_csv_row(rec) << "\n";
    hist.flush();
    std::printf("step %4d  J = %.8e  move = %.4g  res = %.2e/%.2e\n", rec.step, rec.J, rec.move,
                rec.res1, rec.res2);
    std::fflush(stdout);
    if (snap_every > 0 && rec.step % snap_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "/step_%04d.vtk", rec.step);
      write_snapshot(out_dir + name, p.g, psi, st);
    }
  };

  OptimizationResult res = run_optimization(p.g, p.bp, p.analysis, p.opt, sink);
  require(!res.history.empty(), "optimization produced no valid step");

  // final snapshot carries the sensitivity when the adjoint still converges
  AnalysisSettings final_as = p.analysis;
  if (int(res.history.size()) - 1 < p.opt.projection_start) final_as.beta = 0.0;
  const SensitivityReport sens = compute_sensitivity(p.g, p.bp, res.state, final_as);
  write_snapshot(out_dir + "/final.vtk", p.g, res.psi, res.state,
                 sens.converged ? &sens.dJ_dpsi : nullptr);
  return res;
}

int cmd_optimize(const std::string& config, const std::string& preset, std::string out_dir,
                 int snap_every) {
  const CaseConfig cfg = load_config(config, preset);
  if (out_dir.empty()) out_dir = cfg.out_dir;
  const OptimizationResult res = run_case(cfg, out_dir, snap_every);
  print_objective("final", res.state.objective);
  std::printf("steps = %zu  converged = %s  history = %s\n", res.history.size(),
              res.converged ? "yes" : "no", (out_dir + "/history.csv").c_str());
  if (res.aborted) {
    std::fprintf(stderr, "error: solver failed persistently; last valid state exported\n");
    return 2;
  }
  return 0;
}

int cmd_analyze(const std::string& config, const std::string& preset, const std::string& design,
                const std::string& field, double project_beta, std::string out_dir) {
  const CaseConfig cfg = load_config(config, preset);
  Problem p = build_problem(cfg);
  if (project_beta > 0.0) p.analysis.beta = project_beta;

  DensityField psi;
  if (design.empty()) {
    psi = initial_design(p.g, port_buffer(p.g, p.bp));
    std::printf("no design given; analyzing the uniform initial field\n");
  } else {
    psi = read_vtk_scalar(design, p.g, field);
    for (double v : psi)
      require(v >= 0.0 && v <= 1.0, cat("design field '", field, "' leaves [0, 1]"));
  }

  const AnalysisState st = analyze(p.g, p.bp, psi, p.analysis);
  print_objective("analysis", st.objective);
  std::printf("flow residuals = %.3e / %.3e  energy residual = %.3e\n", st.s1.res, st.s2.res,
              st.energy.residual);
  std::printf("T range = [%.6g, %.6g]\n", st.energy.tmin, st.energy.tmax);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_snapshot(out_dir + "/analysis.vtk", p.g, psi, st);
    std::printf("fields written to %s/analysis.vtk\n", out_dir.c_str());
  }
  return st.converged ? 0 : 2;
}

int cmd_reference(const std::string& config, const std::string& preset, std::string out_dir) {
  const CaseConfig cfg = load_config(config, preset);
  const Problem p = build_problem(cfg);
  const DensityField psi = reference_design(p.g, p.ports, cfg.arrangement);
  const AnalysisState st = analyze(p.g, p.bp, psi, p.analysis);
  print_objective("reference", st.objective);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_snapshot(out_dir + "/reference.vtk", p.g, psi, st);
    std::printf("fields written to %s/reference.vtk\n", out_dir.c_str());
  }
  return st.converged ? 0 : 2;
}

int cmd_gradcheck(const std::string& config, const std::string& preset, int probes,
                  uint64_t seed) {
  const CaseConfig cfg = load_config(config, preset);
  const Problem p = build_problem(cfg);
  const OracleReport r = gradient_audit(p, probes, seed);
  std::printf("gradient audit: max relative error = %.3e over %d probes (tolerance %.1e)\n",
              r.measured, probes, r.tol);
  std::printf("%s\n", r.pass ? "PASS" : "FAIL");
  return r.pass ? 0 : 2;
}

int cmd_sweep(const std::vector<std::string>& names, std::string out_dir, int snap_every) {
  if (out_dir.empty()) out_dir = "sweep";
  struct Row {
    std::string name;
    ObjectiveReport obj;
    size_t steps = 0;
    bool converged = false;
  };
  std::vector<Row> rows;
  for (const std::string& name : names) {
    const StudyPreset preset = study_preset(name);
    const std::string dir = out_dir + "/" + name;
    std::printf("== %s ==\n", name.c_str());
    Row row;
    row.name = name;
    if (preset.reference_only) {
      const Problem p = build_problem(preset.config);
      const DensityField psi = reference_design(p.g, p.ports, preset.config.arrangement);
      const AnalysisState st = analyze(p.g, p.bp, psi, p.analysis);
      require(st.converged, cat("reference analysis for '", name, "' did not converge"));
      ensure_dir(dir);
      write_snapshot(dir + "/reference.vtk", p.g, psi, st);
      row.obj = st.objective;
      row.steps = 1;
      row.converged = true;
    } else {
      const OptimizationResult res = run_case(preset.config, dir, snap_every);
      require(!res.aborted, cat("preset '", name, "' aborted on solver failure"));
      row.obj = res.state.objective;
      row.steps = res.history.size();
      row.converged = res.converged;
    }
    rows.push_back(row);
  }
  std::printf("\n%-14s %12s %12s %12s %8s %10s\n", "preset", "J", "Vdot1", "Tout1", "steps",
              "converged");
  for (const Row& r : rows)
    std::printf("%-14s %12.5g %12.5g %12.5g %8zu %10s\n", r.name.c_str(), r.obj.J, r.obj.vdot1,
                r.obj.tout1, r.steps, r.converged ? "yes" : "no");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-fluid heat exchanger topology optimization"};
  app.require_subcommand(1);

  std::string config, preset, out_dir, design, field = "psi";
  int snap_every = 0, probes = 20;
  uint64_t seed = 7;
  double project_beta = 0.0;
  std::vector<std::string> names;

  CLI::App* opt = app.add_subcommand("optimize", "run the design optimization for a case");
  opt->add_option("config", config, "key=value case file (defaults to baseline)");
  opt->add_option("--preset", preset, "named study preset instead of a config file");
  opt->add_option("--out", out_dir, "output directory (default: the case's out_dir)");
  opt->add_option("--snap-every", snap_every, "write a field snapshot every N steps");

  CLI::App* ana = app.add_subcommand("analyze", "evaluate the objective for a saved design");
  ana->add_option("config", config, "key=value case file (defaults to baseline)");
  ana->add_option("--preset", preset, "named study preset instead of a config file");
  ana->add_option("--design", design, "VTK file holding the design field");
  ana->add_option("--field", field, "scalar field name to read (default psi)");
  ana->add_option("--project", project_beta, "re-analyze with sharp projection at this beta");
  ana->add_option("--out", out_dir, "write analysis fields to this directory");

  CLI::App* ref = app.add_subcommand("reference", "evaluate the straight-channel reference");
  ref->add_option("config", config, "key=value case file (defaults to baseline)");
  ref->add_option("--preset", preset, "named study preset instead of a config file");
  ref->add_option("--out", out_dir, "write reference fields to this directory");

  CLI::App* grad = app.add_subcommand("gradcheck", "audit adjoint gradients with differences");
  grad->add_option("config", config, "key=value case file (defaults to baseline)");
  grad->add_option("--preset", preset, "named study preset instead of a config file");
  grad->add_option("--probes", probes, "number of probed design cells (default 20)");
  grad->add_option("--seed", seed, "probe placement seed");

  CLI::App* sweep = app.add_subcommand("sweep", "run a list of study presets and tabulate J");
  sweep->add_option("presets", names, "preset names (default: all)")->expected(-1);
  sweep->add_option("--out", out_dir, "output root (default: sweep/)");
  sweep->add_option("--snap-every", snap_every, "write a field snapshot every N steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (opt->parsed()) return cmd_optimize(config, preset, out_dir, snap_every);
    if (ana->parsed()) return cmd_analyze(config, preset, design, field, project_beta, out_dir);
    if (ref->parsed()) return cmd_reference(config, preset, out_dir);
    if (grad->parsed()) return cmd_gradcheck(config, preset, probes, seed);
    if (sweep->parsed()) {
      if (names.empty()) names = preset_names();
      return cmd_sweep(names, out_dir, snap_every);
    }
  } catch (const hxtopo::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    // configuration problems are usage errors; anything after a successful
    // build is a solver failure
    const std::string msg = e.what();
    const bool usage = msg.rfind("config", 0) == 0 || msg.rfind("cannot open config", 0) == 0 ||
                       msg.rfind("grid", 0) == 0 || msg.rfind("ports", 0) == 0 ||
                       msg.rfind("presets", 0) == 0 || msg.rfind("give either", 0) == 0;
    return usage ? 1 : 2;
  }
  return 1;
}
