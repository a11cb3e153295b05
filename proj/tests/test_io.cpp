#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "hxtopo/hxtopo.hpp"

using namespace hxtopo;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("config: an empty file is the baseline case") {
  const CaseConfig c = parse_config("");
  REQUIRE(c.grid.nx == 48);
  REQUIRE(c.grid.ny == 12);
  REQUIRE(c.grid.nz == 48);
  REQUIRE(c.grid.Lx == 4.0);
  REQUIRE(c.grid.Ly == 1.0);
  REQUIRE(c.grid.Lz == 4.0);
  REQUIRE(c.symmetry == SymmetryPlane::YMinSym);
  REQUIRE(c.arrangement == FlowArrangement::Counter);
  REQUIRE_FALSE(c.custom_ports);
  REQUIRE(c.Re1 == 100.0);
  REQUIRE(c.Re2 == 100.0);
  REQUIRE(c.Pr_f1 == 7.0);
  REQUIRE(c.Pr_f2 == 7.0);
  REQUIRE(c.Pr_s == 3.5);
  REQUIRE(c.alpha_max == 1e4);
  REQUIRE(c.q == 0.01);
  REQUIRE(c.s == 0.1);
  REQUIRE(c.R == 1.0 / 12.0);
  REQUIRE(c.beta == 0.0);
  REQUIRE(c.eta == 0.5);
  REQUIRE(c.opt.move_limit == 0.1);
  REQUIRE(c.opt.conv_tol == 1e-4);
  REQUIRE(c.opt.conv_window == 10);
}

TEST_CASE("config: parsing reports the key and line on bad input") {
  SECTION("negative Reynolds number") {
    REQUIRE_THROWS_WITH(parse_config("# comment\nRe1 = -5\n"),
                        Catch::Matchers::ContainsSubstring("line 2") &&
                            Catch::Matchers::ContainsSubstring("Re1"));
  }
  SECTION("unknown key") {
    REQUIRE_THROWS_WITH(parse_config("Re3 = 10\n"),
                        Catch::Matchers::ContainsSubstring("unknown key 'Re3'"));
  }
  SECTION("malformed number") {
    REQUIRE_THROWS_WITH(parse_config("q = fast\n"),
                        Catch::Matchers::ContainsSubstring("expects a number"));
  }
  SECTION("missing value") {
    REQUIRE_THROWS_AS(parse_config("eta =\n"), Error);
  }
  SECTION("partial custom ports") {
    REQUIRE_THROWS_WITH(parse_config("port.in1 = xmin 0.1 0.5 0.1 0.5\n"),
                        Catch::Matchers::ContainsSubstring("all four"));
  }
  SECTION("arrangement names") {
    REQUIRE(parse_config("arrangement = u-counter\n").arrangement == FlowArrangement::UCounter);
    REQUIRE(parse_config("arrangement = u-parallel\n").arrangement == FlowArrangement::UParallel);
    REQUIRE_THROWS_AS(parse_config("arrangement = crossflow\n"), Error);
  }
}

TEST_CASE("config: render and parse round-trip") {
  CaseConfig c;
  c.grid = {32, 16, 1, 2.0, 1.0, 1.0 / 16.0};
  c.symmetry = SymmetryPlane::None;
  c.arrangement = FlowArrangement::Parallel;
  c.custom_ports = true;
  c.ports.in1 = {XMin, 1.0 / 6.0, 0.5, 0.0, 1.0 / 16.0};
  c.ports.out1 = {XMax, 1.0 / 6.0, 0.5, 0.0, 1.0 / 16.0};
  c.ports.in2 = {XMin, 0.5, 5.0 / 6.0, 0.0, 1.0 / 16.0};
  c.ports.out2 = {XMax, 0.5, 5.0 / 6.0, 0.0, 1.0 / 16.0};
  c.Re1 = 37.5;
  c.Pr_s = 1.75;
  c.R = 0.0625;
  c.beta = 2.5;
  c.opt.move_limit = 0.05;
  c.opt.max_iters = 73;
  c.out_dir = "runs/case7";

  const std::string text = render_config(c);
  const CaseConfig back = parse_config(text);
  REQUIRE(render_config(back) == text);
  REQUIRE(back.grid.nx == c.grid.nx);
  REQUIRE(back.ports.in2.a1 == c.ports.in2.a1);
  REQUIRE(back.Re1 == c.Re1);
  REQUIRE(back.opt.max_iters == c.opt.max_iters);
  REQUIRE(back.out_dir == c.out_dir);
}

TEST_CASE("problem: Peclet numbers derive from Prandtl and Reynolds") {
  const Problem base = build_problem(parse_config(""));
  REQUIRE(base.analysis.materials.pe_f1 == 700.0);
  REQUIRE(base.analysis.materials.pe_f2 == 700.0);
  REQUIRE(base.analysis.materials.pe_s == 350.0);
  REQUIRE(base.analysis.re1 == 100.0);
  REQUIRE(base.g.ncell == 48 * 12 * 48);
  REQUIRE_FALSE(base.bp.in1.empty());

  const Problem re50 = build_problem(study_preset("re50").config);
  REQUIRE(re50.analysis.materials.pe_f1 == 350.0);
  REQUIRE(re50.analysis.materials.pe_s == 175.0);

  const Problem mixed = build_problem(parse_config("Re1 = 200\nRe2 = 100\nPr_s = 2\n"));
  REQUIRE(mixed.analysis.materials.pe_f1 == 1400.0);
  REQUIRE(mixed.analysis.materials.pe_f2 == 700.0);
  REQUIRE(mixed.analysis.materials.pe_s == 300.0);
}

TEST_CASE("presets: every name builds and differs from baseline as labeled") {
  for (const std::string& name : preset_names()) {
    const StudyPreset p = study_preset(name);
    REQUIRE(p.name == name);
    REQUIRE_NOTHROW(build_problem(p.config));
  }
  REQUIRE(study_preset("re200").config.Re1 == 200.0);
  REQUIRE(study_preset("pr14").config.Pr_f1 == 14.0);
  REQUIRE(study_preset("pr14").config.Pr_s == 3.5);
  REQUIRE(study_preset("domain-2x2x4").config.grid.nx == 24);
  REQUIRE(study_preset("domain-4x4x4").config.grid.ny == 24);
  REQUIRE(study_preset("parallel").config.arrangement == FlowArrangement::Parallel);
  REQUIRE(study_preset("reference").reference_only);
  REQUIRE_FALSE(study_preset("baseline").reference_only);
  REQUIRE_THROWS_AS(study_preset("re400"), Error);
}

TEST_CASE("reference design: straight slabs with a one-cell wall") {
  const Grid g = build_grid({12, 12, 6, 1.0, 1.0, 0.5});
  const PortSet ports = default_ports(g, FlowArrangement::Counter);
  const DensityField psi = reference_design(g, ports, FlowArrangement::Counter);

  // fluid-1 slab j in [2,6), fluid-2 slab j in [6,10) minus the wall layer
  // at j = 6; shared z band k in [2,4); everything else solid
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) {
        const double v = psi[size_t(g.cell(i, j, k))];
        const bool zband = k >= 2 && k < 4;
        if (zband && j >= 2 && j < 6) REQUIRE(v == 1.0);
        else if (zband && j == 6) REQUIRE(v == 0.5);
        else if (zband && j >= 7 && j < 10) REQUIRE(v == 0.0);
        else REQUIRE(v == 0.5);
      }

  // the fluid-1 slab must span inlet to outlet unbroken
  const BoundaryPatches bp = resolve_patches(g, ports);
  for (const PortFaceRef& pf : bp.in1) {
    const double v = psi[size_t(pf.cell)];
    REQUIRE((v == 1.0 || v == 0.5));
  }

  SECTION("U arrangements have no straight design") {
    REQUIRE_THROWS_AS(
        reference_design(g, default_ports(g, FlowArrangement::UCounter), FlowArrangement::UCounter),
        Error);
  }
  SECTION("parallel arrangement builds the same slabs") {
    const DensityField par = reference_design(g, default_ports(g, FlowArrangement::Parallel),
                                              FlowArrangement::Parallel);
    REQUIRE(par == psi);
  }
}

TEST_CASE("vtk: snapshot writes and reads back bit for bit") {
  const Grid g = build_grid({4, 4, 4, 1.0, 1.0, 1.0});
  SplitMix64 rng(11);
  DensityField f(size_t(g.ncell));
  for (double& x : f) x = rng.uniform();

  VtkFile vtk(g);
  vtk.add_scalar("psi", f);
  const std::string path = temp_path("hxtopo_vtk_test.vtk");
  vtk.write(path);

  // header shape: one point per cell center
  std::ifstream is(path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  REQUIRE(text.find("DATASET STRUCTURED_POINTS") != std::string::npos);
  REQUIRE(text.find("DIMENSIONS 4 4 4") != std::string::npos);
  REQUIRE(text.find("POINT_DATA 64") != std::string::npos);
  REQUIRE(text.find("SCALARS psi double 1") != std::string::npos);

  const std::vector<double> back = read_vtk_scalar(path, g, "psi");
  REQUIRE(back == f);

  SECTION("missing field and dimension mismatch are errors") {
    REQUIRE_THROWS_WITH(read_vtk_scalar(path, g, "gamma"),
                        Catch::Matchers::ContainsSubstring("not found"));
    const Grid g2 = build_grid({4, 4, 2, 1.0, 1.0, 0.5});
    REQUIRE_THROWS_WITH(read_vtk_scalar(path, g2, "psi"),
                        Catch::Matchers::ContainsSubstring("expected"));
  }
  std::remove(path.c_str());
}

TEST_CASE("history csv: fixed columns, one row per step, deterministic bytes") {
  std::vector<StepRecord> hist(3);
  for (int i = 0; i < 3; ++i) {
    hist[size_t(i)].step = i;
    hist[size_t(i)].J = 1e-3 * (i + 1) / 3.0;
    hist[size_t(i)].res1 = 1e-7;
  }
  const std::string path = temp_path("hxtopo_hist_test.csv");
  write_history_csv(path, hist);
  std::ifstream is(path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  REQUIRE(text.rfind("step,J,J1,J2,Vdot1,Vdot2,Tout1,Tout2,res1,res2\n", 0) == 0);
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 4);

  write_history_csv(path, hist);
  std::ifstream is2(path);
  std::string again((std::istreambuf_iterator<char>(is2)), std::istreambuf_iterator<char>());
  REQUIRE(again == text);
  std::remove(path.c_str());
}

TEST_CASE("verification: analytic flow oracles pass") {
  const OracleReport rest = rest_state_case();
  INFO(rest.name << " measured " << rest.measured);
  REQUIRE(rest.pass);

  const OracleReport pois = poiseuille_case();
  INFO(pois.name << " measured " << pois.measured << " oracle " << pois.oracle);
  REQUIRE(pois.pass);
  REQUIRE(pois.rel_err <= 0.05);

  const OracleReport darcy = darcy_case();
  INFO(darcy.name << " measured " << darcy.measured << " oracle " << darcy.oracle);
  REQUIRE(darcy.pass);
}

TEST_CASE("verification: gradient audit passes on a small 2D case") {
  CaseConfig c;
  c.grid = {16, 8, 1, 2.0, 1.0, 0.125};
  c.symmetry = SymmetryPlane::None;
  c.Re1 = c.Re2 = 20.0;
  c.R = 0.1;
  c.beta = 1.5;
  Problem p = build_problem(c);
  p.analysis.flow.tol = 1e-12;

  const OracleReport audit = gradient_audit(p, 6, 7);
  INFO("max relative gradient error " << audit.measured);
  REQUIRE(audit.pass);
  REQUIRE(audit.measured <= 1e-3);
}

TEST_CASE("verification: sharp re-analysis of a binary design changes nothing") {
  // with the filter off, the reference design is exactly {0, 1/2, 1}; the
  // projection fixes all three values, so the sharp run must reproduce the
  // base run bit for bit
  CaseConfig c;
  c.grid = {12, 12, 6, 1.0, 1.0, 0.5};
  c.symmetry = SymmetryPlane::None;
  c.Re1 = c.Re2 = 20.0;
  c.R = 0.0;
  const Problem p = build_problem(c);
  const DensityField psi = reference_design(p.g, p.ports, c.arrangement);

  const SharpComparison cmp = sharp_reanalysis(p.g, p.bp, psi, p.analysis, 8.0, 0.5);
  REQUIRE(cmp.converged);
  REQUIRE(cmp.base.J > 0.0);
  REQUIRE(cmp.dJ <= 1e-12);
  REQUIRE(cmp.dV1 <= 1e-12);
  REQUIRE(cmp.dT1 <= 1e-12);

  SECTION("separation report sees still walls and sealed ports") {
    // the 1e-2 speed ratio is a property of the full-scale settings (fast
    // open channels at Re=100); this small case only checks the mechanism
    const AnalysisState st = analyze(p.g, p.bp, psi, p.analysis);
    REQUIRE(st.converged);
    const SeparationReport sep = separation_check(p.g, p.bp, st);
    REQUIRE(sep.mid_band_cells > 0);
    REQUIRE(sep.domain_speed > 0.0);
    REQUIRE(sep.mid_band_speed < 0.5 * sep.domain_speed);
    REQUIRE(sep.cross_flux == 0.0);
  }
}

TEST_CASE("io: an exported design re-analyzes to the same objective") {
  CaseConfig c;
  c.grid = {16, 8, 1, 2.0, 1.0, 0.125};
  c.symmetry = SymmetryPlane::None;
  c.Re1 = c.Re2 = 20.0;
  c.R = 0.1;
  const Problem p = build_problem(c);

  const PortBuffer pb = port_buffer(p.g, p.bp);
  DensityField psi = initial_design(p.g, pb);
  SplitMix64 rng(3);
  for (int cidx = 0; cidx < p.g.ncell; ++cidx)
    if (!pb.frozen[size_t(cidx)]) psi[size_t(cidx)] = rng.uniform();

  const AnalysisState st = analyze(p.g, p.bp, psi, p.analysis);
  REQUIRE(st.converged);

  const std::string path = temp_path("hxtopo_roundtrip.vtk");
  write_snapshot(path, p.g, psi, st);
  const DensityField back = read_vtk_scalar(path, p.g, "psi");
  REQUIRE(back == psi);

  const AnalysisState again = analyze(p.g, p.bp, back, p.analysis);
  REQUIRE(again.objective.J == Catch::Approx(st.objective.J).epsilon(1e-12));
  std::remove(path.c_str());
}
