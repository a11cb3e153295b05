#ifndef HXTOPO_OBJECTIVE_HPP
#define HXTOPO_OBJECTIVE_HPP

// Heat-transfer objective: J is the enthalpy fluid 1 gives up plus the
// enthalpy fluid 2 carries away, both measured as outward advective fluxes
// over the respective outlet ports,
//   J = sum_out1 (u1.n) (1 - T) A  +  sum_out2 (u2.n) T A.
// With adiabatic exterior walls the two terms agree up to the inlet
// conduction leak, so J doubles the transferred heat rather than averaging
// it; maximizing either convention selects the same designs.

#include "hxtopo/flow.hpp"

namespace hxtopo {

struct ObjectiveReport {
  double J = 0.0;
  double J1 = 0.0, J2 = 0.0;      // per-fluid heat terms, J = J1 + J2
  double vdot1 = 0.0, vdot2 = 0.0;  // outlet volume flow per fluid
  double tout1 = 0.0, tout2 = 0.0;  // flux-weighted mean outlet temperature
};

inline ObjectiveReport evaluate_objective(const Grid& g, const BoundaryPatches& bp,
                                          const FlowState& f1, const FlowState& f2,
                                          const std::vector<double>& T) {
  require(int(T.size()) == g.ncell, "objective: temperature field size mismatch");
  ObjectiveReport rep;
  double adv1 = 0.0, adv2 = 0.0;  // advected enthalpy through each outlet
  for (const PortFaceRef& pf : bp.outlet(0)) {
    const double un = pf.sign * (pf.comp == 0 ? f1.u : pf.comp == 1 ? f1.v : f1.w)[size_t(pf.face)];
    rep.vdot1 += un * g.area;
    adv1 += un * g.area * T[size_t(pf.cell)];
  }
  for (const PortFaceRef& pf : bp.outlet(1)) {
    const double un = pf.sign * (pf.comp == 0 ? f2.u : pf.comp == 1 ? f2.v : f2.w)[size_t(pf.face)];
    rep.vdot2 += un * g.area;
    adv2 += un * g.area * T[size_t(pf.cell)];
  }
  rep.J1 = rep.vdot1 - adv1;
  rep.J2 = adv2;
  rep.J = rep.J1 + rep.J2;
  rep.tout1 = rep.vdot1 != 0.0 ? adv1 / rep.vdot1 : 0.0;
  rep.tout2 = rep.vdot2 != 0.0 ? adv2 / rep.vdot2 : 0.0;
  return rep;
}

// dJ/dT as a cell field: outlet cells pick up -u.n A from the fluid 1 term
// and +u.n A from the fluid 2 term
inline std::vector<double> objective_dT(const Grid& g, const BoundaryPatches& bp,
                                        const FlowState& f1, const FlowState& f2) {
  std::vector<double> gT(size_t(g.ncell), 0.0);
  for (const PortFaceRef& pf : bp.outlet(0)) {
    const double un = pf.sign * (pf.comp == 0 ? f1.u : pf.comp == 1 ? f1.v : f1.w)[size_t(pf.face)];
    gT[size_t(pf.cell)] -= un * g.area;
  }
  for (const PortFaceRef& pf : bp.outlet(1)) {
    const double un = pf.sign * (pf.comp == 0 ? f2.u : pf.comp == 1 ? f2.v : f2.w)[size_t(pf.face)];
    gT[size_t(pf.cell)] += un * g.area;
  }
  return gT;
}

// dJ/du for one fluid as per-component face arrays: a fluid 1 outlet face
// carries sign * A * (1 - T), a fluid 2 outlet face sign * A * T
inline void objective_du(const Grid& g, const BoundaryPatches& bp, int fluid,
                         const std::vector<double>& T, std::array<std::vector<double>, 3>& du) {
  du[0].assign(size_t(g.nu), 0.0);
  du[1].assign(size_t(g.nv), 0.0);
  du[2].assign(size_t(g.nw), 0.0);
  for (const PortFaceRef& pf : bp.outlet(fluid)) {
    const double weight = fluid == 0 ? 1.0 - T[size_t(pf.cell)] : T[size_t(pf.cell)];
    du[size_t(pf.comp)][size_t(pf.face)] += pf.sign * g.area * weight;
  }
}

}  // namespace hxtopo

#endif
