#ifndef HXTOPO_ADJOINT_HPP
#define HXTOPO_ADJOINT_HPP

// Discrete adjoint of the analysis chain. With the three residuals
//   R1(x1; alpha1(gh)) = 0,  R2(x2; alpha2(gh)) = 0,  RT(T; x1, x2, Pe(gh)) = 0
// and J(x1, x2, T), the multipliers solve, in reverse dependency order,
//   E^T lamT   = dJ/dT
//   J_i^T lam_i = dJ/dx_i - (dRT/dx_i)^T lamT
// and the design derivative collects every explicit dependence on the
// projected density gh:
//   dJ/dgh = - lamT^T dRT/dPe * dPe/dgh - sum_i lam_i^T dR_i/dalpha_i * dalpha_i/dgh.
// The result is pulled back through the projection and the filter to the raw
// design variable, where frozen cells are masked out.

#include "hxtopo/analysis.hpp"

namespace hxtopo {

struct SensitivityReport {
  std::vector<double> dJ_dpsi;
  std::vector<double> dJ_dgamma_hat;  // before the projection/filter pullback
  bool converged = false;             // all three adjoint solves met tolerance
};

inline SensitivityReport compute_sensitivity(const Grid& g, const BoundaryPatches& bp,
                                             const AnalysisState& st, const AnalysisSettings& as,
                                             const std::vector<uint8_t>* frozen = nullptr) {
  if (frozen)
    require(int(frozen->size()) == g.ncell, "adjoint: frozen mask size mismatch");
  SensitivityReport rep;
  rep.dJ_dgamma_hat.assign(size_t(g.ncell), 0.0);

  // adjoint temperature
  EnergySystem esys(g, bp, &st.pe, &st.s1, &st.s2);
  const std::vector<double> gT = objective_dT(g, bp, st.s1, st.s2);
  const std::vector<double> lamT = esys.adjoint(gT);

  // conduction chain: lamT^T dRT/dPe times dPe/dgh
  std::vector<double> dpe;
  esys.peclet_gradient(st.energy.T, lamT, dpe);
  for (int c = 0; c < g.ncell; ++c)
    rep.dJ_dgamma_hat[size_t(c)] -=
        dpe[size_t(c)] * d_peclet(st.gamma_hat[size_t(c)], as.materials);

  // the energy residual's pull on the advecting flux, shared by both fluids
  // since the flux is their plain sum
  std::array<std::vector<double>, 3> dadv;
  esys.flux_gradient(st.energy.T, lamT, dadv);

  bool ok = true;
  for (int fluid = 0; fluid < 2; ++fluid) {
    const FluidSystem sys(g, bp, fluid, fluid == 0 ? &st.alpha1 : &st.alpha2,
                          fluid == 0 ? as.re1 : as.re2, fluid == 0 ? as.bc1 : as.bc2);
    const FlowState& s = fluid == 0 ? st.s1 : st.s2;

    std::array<std::vector<double>, 3> du;
    objective_du(g, bp, fluid, st.energy.T, du);
    std::vector<double> rhs(size_t(sys.ndof()), 0.0);
    for (int d = 0; d < 3; ++d)
      for (size_t f = 0; f < du[size_t(d)].size(); ++f)
        rhs[size_t(sys.offset(d)) + f] = du[size_t(d)][f] - dadv[size_t(d)][f];

    std::vector<double> lam;
    ok = solve_flow_adjoint(sys, s, rhs, lam, as.flow) && ok;

    std::vector<double> x, dal;
    sys.pack(s, x);
    sys.drag_gradient(x, lam, dal);
    for (int c = 0; c < g.ncell; ++c) {
      const double da = fluid == 0 ? d_alpha1(st.gamma_hat[size_t(c)], as.materials)
                                   : d_alpha2(st.gamma_hat[size_t(c)], as.materials);
      rep.dJ_dgamma_hat[size_t(c)] -= dal[size_t(c)] * da;
    }
  }

  // pull back: projection slope, then the self-adjoint filter, then the mask
  const DensityField dproj = project_derivative(g, st.gamma_filt, as.beta, as.eta);
  std::vector<double> dgf(size_t(g.ncell));
  for (int c = 0; c < g.ncell; ++c)
    dgf[size_t(c)] = rep.dJ_dgamma_hat[size_t(c)] * dproj[size_t(c)];
  rep.dJ_dpsi = filter_adjoint(g, dgf, as.filter);
  if (frozen)
    for (int c = 0; c < g.ncell; ++c)
      if ((*frozen)[size_t(c)]) rep.dJ_dpsi[size_t(c)] = 0.0;

  rep.converged = ok;
  return rep;
}

}  // namespace hxtopo

#endif
