#ifndef HXTOPO_VERIFICATION_HPP
#define HXTOPO_VERIFICATION_HPP

// Packaged oracle cases: analytic flow benchmarks, the finite-difference
// gradient audit, conservation audits, and the sharp-projection re-analysis.
// Each case returns an OracleReport so callers can print one pass/fail line
// per check without re-deriving tolerances.

#include <chrono>

#include "hxtopo/design.hpp"
#include "hxtopo/io.hpp"
#include "hxtopo/problem.hpp"

namespace hxtopo {

struct OracleReport {
  std::string name;
  double measured = 0.0;
  double oracle = 0.0;
  double rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
  double runtime_s = 0.0;
};

namespace vdetail {

inline double rel_to(double measured, double oracle, double scale) {
  return std::abs(measured - oracle) / std::max(std::abs(scale), 1e-300);
}

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline OracleReport report(const std::string& name, double measured, double oracle, double tol,
                           double scale, double runtime) {
  OracleReport r;
  r.name = name;
  r.measured = measured;
  r.oracle = oracle;
  r.tol = tol;
  r.rel_err = rel_to(measured, oracle, scale);
  r.pass = r.rel_err <= tol;
  r.runtime_s = runtime;
  return r;
}

inline double mean_port_velocity(const FlowState& s, const std::vector<PortFaceRef>& faces) {
  double sum = 0.0;
  for (const PortFaceRef& pf : faces) {
    const std::vector<double>& comp = pf.comp == 0 ? s.u : (pf.comp == 1 ? s.v : s.w);
    sum += comp[size_t(pf.face)];
  }
  return sum / double(faces.size());
}

}  // namespace vdetail

// relative defect between inflow and outflow volume rates of one fluid
inline double mass_defect(const Grid& g, const BoundaryPatches& bp, const FlowState& s,
                          int fluid) {
  const double q_in = -flow_rate(g, s, bp.inlet(fluid), true);
  const double q_out = flow_rate(g, s, bp.outlet(fluid), true);
  return std::abs(q_in - q_out) / std::max(std::abs(q_in), 1e-300);
}

// boundary enthalpy closure: advected enthalpy through the ports plus the
// inlet conduction leak, relative to the combined flow rate
inline double enthalpy_defect(const Grid& g, const BoundaryPatches& bp,
                              const std::vector<double>& pe, const FlowState& s1,
                              const ObjectiveReport& obj, const std::vector<double>& T) {
  const double adv_in = flow_rate(g, s1, bp.in1, true) * 1.0;  // fluid-2 inlet carries T=0
  const double adv_out = obj.vdot1 * obj.tout1 + obj.vdot2 * obj.tout2;
  double cond = 0.0;
  const double ah = g.area / g.h;
  for (const PortFaceRef& pf : bp.in1)
    cond += 2.0 * ah / pe[size_t(pf.cell)] * (T[size_t(pf.cell)] - 1.0);
  for (const PortFaceRef& pf : bp.in2)
    cond += 2.0 * ah / pe[size_t(pf.cell)] * (T[size_t(pf.cell)] - 0.0);
  return std::abs(adv_in + adv_out + cond) / std::max(obj.vdot1 + obj.vdot2, 1e-300);
}

// plane Poiseuille: height-1, length-4 channel at Re = 1 under unit pressure
// drop has mean velocity 1/48
inline OracleReport poiseuille_case() {
  const vdetail::Stopwatch sw;
  const Grid g = build_grid({64, 16, 1, 4.0, 1.0, 1.0 / 16.0});
  const BoundaryPatches bp = duct_patches(g);
  const std::vector<double> alpha(size_t(g.ncell), 0.0);
  const FluidSystem sys(g, bp, 0, &alpha, 1.0);
  FlowSettings fs;
  fs.tol = 1e-10;
  const FlowState s = solve_flow(sys, fs);
  const double mean = std::abs(vdetail::mean_port_velocity(s, bp.in1));
  OracleReport r =
      vdetail::report("poiseuille mean velocity", mean, 1.0 / 48.0, 0.05, 1.0 / 48.0,
                      sw.seconds());
  r.pass = r.pass && s.converged;
  return r;
}

// rest state: no pressure drop and no drag leaves the fluid exactly at rest
inline OracleReport rest_state_case() {
  const vdetail::Stopwatch sw;
  const Grid g = build_grid({16, 8, 1, 2.0, 1.0, 0.125});
  const BoundaryPatches bp = duct_patches(g);
  const std::vector<double> alpha(size_t(g.ncell), 0.0);
  FlowBCs bc;
  bc.p_in = 0.0;
  bc.p_out = 0.0;
  const FlowState base = solve_flow(FluidSystem(g, bp, 0, &alpha, 100.0, bc));
  double linf = 0.0;
  for (double u : base.u) linf = std::max(linf, std::abs(u));
  for (double v : base.v) linf = std::max(linf, std::abs(v));
  OracleReport r = vdetail::report("rest state velocity", linf, 0.0, 0.0, 1.0, sw.seconds());
  r.pass = linf == 0.0 && base.converged;
  return r;
}

// Darcy limit: uniform drag alpha = 1e4 over length 4 under unit pressure
// drop gives superficial velocity 1 / (alpha Lx) = 2.5e-5
inline OracleReport darcy_case() {
  const vdetail::Stopwatch sw;
  const Grid g = build_grid({32, 8, 1, 4.0, 1.0, 0.125});
  const BoundaryPatches bp = duct_patches(g);
  const std::vector<double> alpha(size_t(g.ncell), 1e4);
  const FluidSystem sys(g, bp, 0, &alpha, 100.0);
  FlowSettings fs;
  fs.tol = 1e-12;
  const FlowState s = solve_flow(sys, fs);
  const double mean = std::abs(vdetail::mean_port_velocity(s, bp.in1));
  OracleReport r = vdetail::report("darcy superficial velocity", mean, 2.5e-5, 0.05, 2.5e-5,
                                   sw.seconds());
  r.pass = r.pass && s.converged;
  return r;
}

// central-difference probes of the whole design-to-objective chain at random
// free cells; the error is measured against the largest probed gradient so
// near-zero entries cannot inflate the ratio
inline OracleReport gradient_audit(const Problem& p, int n_probes, uint64_t seed = 7) {
  const vdetail::Stopwatch sw;
  require(n_probes >= 1, "gradient audit: need at least one probe");
  const PortBuffer pb = port_buffer(p.g, p.bp);

  // differences of O(1e-4) perturbations only resolve the gradient when the
  // flow residual sits far below them, so tighten past the run default
  AnalysisSettings as = p.analysis;
  as.flow.tol = std::min(as.flow.tol, 1e-12);

  // deterministic smooth start away from the box bounds
  DensityField psi = initial_design(p.g, pb);
  SplitMix64 rng(seed);
  for (int c = 0; c < p.g.ncell; ++c)
    if (!pb.frozen[size_t(c)])
      psi[size_t(c)] = 0.5 + 0.25 * std::sin(7.0 * p.g.xc(c / (p.g.ny * p.g.nz))) *
                                 std::cos(3.0 * p.g.yc((c / p.g.nz) % p.g.ny)) +
                       rng.uniform(-0.05, 0.05);

  const AnalysisState base = analyze(p.g, p.bp, psi, as);
  require(base.converged, "gradient audit: base analysis did not converge");
  const SensitivityReport sens = compute_sensitivity(p.g, p.bp, base, as, &pb.frozen);
  require(sens.converged, "gradient audit: adjoint solves did not converge");
  for (int c = 0; c < p.g.ncell; ++c)
    if (pb.frozen[size_t(c)])
      require(sens.dJ_dpsi[size_t(c)] == 0.0, "gradient audit: frozen cell has nonzero gradient");

  std::vector<int> cells;
  while (int(cells.size()) < n_probes) {
    const int c = int(rng.next() % uint64_t(p.g.ncell));
    if (pb.frozen[size_t(c)]) continue;
    if (std::find(cells.begin(), cells.end(), c) == cells.end()) cells.push_back(c);
  }

  const double step = 1e-4;
  double gmax = 0.0;
  for (int c : cells) gmax = std::max(gmax, std::abs(sens.dJ_dpsi[size_t(c)]));
  double worst = 0.0;
  for (int c : cells) {
    DensityField pert = psi;
    pert[size_t(c)] = psi[size_t(c)] + step;
    const AnalysisState up = analyze(p.g, p.bp, pert, as, &base);
    pert[size_t(c)] = psi[size_t(c)] - step;
    const AnalysisState dn = analyze(p.g, p.bp, pert, as, &base);
    require(up.converged && dn.converged, "gradient audit: probe analysis did not converge");
    const double fd = (up.objective.J - dn.objective.J) / (2.0 * step);
    worst = std::max(worst, std::abs(fd - sens.dJ_dpsi[size_t(c)]) / gmax);
  }
  OracleReport r;
  r.name = "gradient audit";
  r.measured = worst;
  r.oracle = 0.0;
  r.tol = 1e-3;
  r.rel_err = worst;
  r.pass = worst <= r.tol;
  r.runtime_s = sw.seconds();
  return r;
}

// re-evaluates a design with near-binary projection and reports how far the
// smoothed-evaluation figures drift
struct SharpComparison {
  ObjectiveReport base, sharp;
  double dJ = 0.0, dV1 = 0.0, dT1 = 0.0;  // relative discrepancies
  bool converged = false;
};

inline SharpComparison sharp_reanalysis(const Grid& g, const BoundaryPatches& bp,
                                        const DensityField& psi, const AnalysisSettings& as,
                                        double beta = 8.0, double eta = 0.5) {
  SharpComparison cmp;
  const AnalysisState base = analyze(g, bp, psi, as);
  AnalysisSettings sharp_as = as;
  sharp_as.beta = beta;
  sharp_as.eta = eta;
  const AnalysisState sharp = analyze(g, bp, psi, sharp_as, &base);
  cmp.base = base.objective;
  cmp.sharp = sharp.objective;
  cmp.dJ = vdetail::rel_to(sharp.objective.J, base.objective.J, base.objective.J);
  cmp.dV1 = vdetail::rel_to(sharp.objective.vdot1, base.objective.vdot1, base.objective.vdot1);
  cmp.dT1 = vdetail::rel_to(sharp.objective.tout1, base.objective.tout1, base.objective.tout1);
  cmp.converged = base.converged && sharp.converged;
  return cmp;
}

// wall-band leak check: with the filtered design in the solid band, both
// fluids must be still relative to the fastest cell in the domain, and
// fluid 1 must not cross fluid 2's ports at all
struct SeparationReport {
  double mid_band_speed = 0.0;   // fastest mid-band cell, both fluids
  double domain_speed = 0.0;     // fastest cell anywhere
  double cross_flux = 0.0;       // |fluid-1 flux| summed over fluid-2 port faces
  int mid_band_cells = 0;
};

inline SeparationReport separation_check(const Grid& g, const BoundaryPatches& bp,
                                         const AnalysisState& st) {
  SeparationReport rep;
  const CellVectors v1 = cell_velocity(g, st.s1);
  const CellVectors v2 = cell_velocity(g, st.s2);
  for (int c = 0; c < g.ncell; ++c) {
    const size_t u = size_t(c);
    const double sp1 = std::sqrt(sq(v1.x[u]) + sq(v1.y[u]) + sq(v1.z[u]));
    const double sp2 = std::sqrt(sq(v2.x[u]) + sq(v2.y[u]) + sq(v2.z[u]));
    rep.domain_speed = std::max({rep.domain_speed, sp1, sp2});
    if (st.gamma_hat[u] >= 0.4 && st.gamma_hat[u] <= 0.6) {
      rep.mid_band_speed = std::max({rep.mid_band_speed, sp1, sp2});
      ++rep.mid_band_cells;
    }
  }
  auto comp_of = [&](const PortFaceRef& pf) -> const std::vector<double>& {
    return pf.comp == 0 ? st.s1.u : (pf.comp == 1 ? st.s1.v : st.s1.w);
  };
  for (const PortFaceRef& pf : bp.in2) rep.cross_flux += std::abs(comp_of(pf)[size_t(pf.face)]);
  for (const PortFaceRef& pf : bp.out2) rep.cross_flux += std::abs(comp_of(pf)[size_t(pf.face)]);
  return rep;
}

}  // namespace hxtopo

#endif
