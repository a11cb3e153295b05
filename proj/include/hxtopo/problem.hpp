#ifndef HXTOPO_PROBLEM_HPP
#define HXTOPO_PROBLEM_HPP

// Turns a parsed case description into the objects the solvers consume.
// The only derived physics here is the Peclet set: each fluid advects with
// Pe_i = Pr_i * Re_i, and the wall conducts with Pe_s = Pr_s * mean(Re),
// so the baseline (Re=100/100, Pr=7/7/3.5) lands on Pe = 700/700/350.

#include "hxtopo/config.hpp"

namespace hxtopo {

struct Problem {
  Grid g;
  PortSet ports;
  BoundaryPatches bp;
  AnalysisSettings analysis;
  OptimizerSettings opt;
};

inline Problem build_problem(const CaseConfig& c) {
  Problem p;
  p.g = build_grid(c.grid);
  p.ports = c.custom_ports ? c.ports : default_ports(p.g, c.arrangement);
  p.bp = resolve_patches(p.g, p.ports, c.symmetry);

  p.analysis.re1 = c.Re1;
  p.analysis.re2 = c.Re2;
  p.analysis.materials.alpha_max = c.alpha_max;
  p.analysis.materials.q = c.q;
  p.analysis.materials.s = c.s;
  p.analysis.materials.pe_f1 = c.Pr_f1 * c.Re1;
  p.analysis.materials.pe_f2 = c.Pr_f2 * c.Re2;
  p.analysis.materials.pe_s = c.Pr_s * 0.5 * (c.Re1 + c.Re2);
  p.analysis.materials.validate();
  p.analysis.filter.radius = c.R;
  p.analysis.beta = c.beta;
  p.analysis.eta = c.eta;

  p.opt = c.opt;
  p.opt.validate();
  return p;
}

}  // namespace hxtopo

#endif
