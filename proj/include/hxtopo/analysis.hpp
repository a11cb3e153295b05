#ifndef HXTOPO_ANALYSIS_HPP
#define HXTOPO_ANALYSIS_HPP

// One full forward evaluation of a design: raw density -> smoothing filter
// -> projection -> material fields -> one flow solve per fluid -> shared
// temperature -> objective. This is the map the optimizer differentiates;
// the adjoint chain walks it backwards term by term.

#include "hxtopo/energy.hpp"
#include "hxtopo/filter.hpp"
#include "hxtopo/flow_solve.hpp"
#include "hxtopo/materials.hpp"
#include "hxtopo/objective.hpp"
#include "hxtopo/projection.hpp"

namespace hxtopo {

struct AnalysisSettings {
  InterpolationSettings materials;
  FilterSettings filter;
  double beta = 0.0;  // projection sharpness; 0 keeps the filtered field
  double eta = 0.5;   // projection threshold
  double re1 = 100.0, re2 = 100.0;
  FlowBCs bc1, bc2;  // unit pressure drop across each fluid's ports
  FlowSettings flow;
};

// every intermediate the adjoint needs to revisit, plus the scalar results
struct AnalysisState {
  DensityField gamma_filt;  // after the filter
  DensityField gamma_hat;   // after the projection; the field the PDEs saw
  std::vector<double> alpha1, alpha2, pe;
  FlowState s1, s2;
  EnergyReport energy;
  ObjectiveReport objective;
  bool converged = false;
};

inline AnalysisState analyze(const Grid& g, const BoundaryPatches& bp, const DensityField& psi,
                             const AnalysisSettings& as, const AnalysisState* warm = nullptr) {
  check_cell_field(g, psi, "analysis");
  as.materials.validate();
  check_projection(as.beta, as.eta);

  AnalysisState st;
  st.gamma_filt = helmholtz_filter(g, psi, as.filter);
  st.gamma_hat = project(g, st.gamma_filt, as.beta, as.eta);
  st.alpha1 = alpha_field(st.gamma_hat, as.materials, 0);
  st.alpha2 = alpha_field(st.gamma_hat, as.materials, 1);
  st.pe = peclet_field(st.gamma_hat, as.materials);

  const FluidSystem sys1(g, bp, 0, &st.alpha1, as.re1, as.bc1);
  const FluidSystem sys2(g, bp, 1, &st.alpha2, as.re2, as.bc2);
  st.s1 = solve_flow(sys1, as.flow, warm ? &warm->s1 : nullptr);
  st.s2 = solve_flow(sys2, as.flow, warm ? &warm->s2 : nullptr);

  EnergySystem esys(g, bp, &st.pe, &st.s1, &st.s2);
  st.energy = esys.solve();
  st.objective = evaluate_objective(g, bp, st.s1, st.s2, st.energy.T);
  st.converged = st.s1.converged && st.s2.converged && st.energy.converged;
  return st;
}

}  // namespace hxtopo

#endif
