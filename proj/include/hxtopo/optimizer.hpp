#ifndef HXTOPO_OPTIMIZER_HPP
#define HXTOPO_OPTIMIZER_HPP

// Sequential linear programming on the box 0 <= psi <= 1. Each step solves
// the linearized subproblem max <grad, dpsi> subject to the move limit and
// the box, which separates per cell into a signed move of fixed size. The
// move limit halves on every third objective decrease and whenever the
// trailing window comes within a decade of the stopping tolerance without
// closing, steps whose PDE solves fail are rejected and retried with a
// smaller move, and the loop stops once the relative objective change stays
// inside the tolerance over the whole window.

#include <functional>

#include "hxtopo/adjoint.hpp"

namespace hxtopo {

struct OptimizerSettings {
  double move_limit = 0.1;   // per-step box trust region on psi
  int max_iters = 200;
  double conv_tol = 1e-4;    // on |dJ| / |J| over the trailing window
  int conv_window = 10;
  int projection_start = 0;  // first step index that applies the configured beta

  void validate() const {
    require(move_limit > 0.0 && move_limit <= 1.0,
            cat("optimizer: move_limit must lie in (0,1], got ", move_limit));
    require(max_iters >= 1, cat("optimizer: max_iters must be at least 1, got ", max_iters));
    require(conv_tol > 0.0, cat("optimizer: conv_tol must be positive, got ", conv_tol));
    require(conv_window >= 1, cat("optimizer: conv_window must be at least 1, got ", conv_window));
    require(projection_start >= 0,
            cat("optimizer: projection_start must be nonnegative, got ", projection_start));
  }
};

// one cell layer adjacent to every port, pinned to the owning fluid's pure
// phase so each port always opens into its own fluid
struct PortBuffer {
  std::vector<uint8_t> frozen;  // 1 where psi is not a design variable
  DensityField value;           // pinned value where frozen
};

inline PortBuffer port_buffer(const Grid& g, const BoundaryPatches& bp) {
  PortBuffer pb;
  pb.frozen.assign(size_t(g.ncell), 0);
  pb.value.assign(size_t(g.ncell), 0.0);
  auto pin = [&](const std::vector<PortFaceRef>& faces, double v) {
    for (const PortFaceRef& pf : faces) {
      pb.frozen[size_t(pf.cell)] = 1;
      pb.value[size_t(pf.cell)] = v;
    }
  };
  pin(bp.in1, 1.0);
  pin(bp.out1, 1.0);
  pin(bp.in2, 0.0);
  pin(bp.out2, 0.0);
  return pb;
}

// uniform midpoint start with the buffer pinned
inline DensityField initial_design(const Grid& g, const PortBuffer& pb) {
  DensityField psi(size_t(g.ncell), 0.5);
  for (int c = 0; c < g.ncell; ++c)
    if (pb.frozen[size_t(c)]) psi[size_t(c)] = pb.value[size_t(c)];
  return psi;
}

// the per-cell solution of the linearized subproblem; zero gradient holds
inline DensityField slp_update(const DensityField& psi, const std::vector<double>& grad,
                               double move_limit) {
  require(psi.size() == grad.size(), "optimizer: design and gradient sizes differ");
  require(move_limit > 0.0 && move_limit <= 1.0,
          cat("optimizer: move_limit must lie in (0,1], got ", move_limit));
  DensityField out(psi.size());
  for (size_t c = 0; c < psi.size(); ++c) {
    const double s = grad[c] > 0.0 ? 1.0 : (grad[c] < 0.0 ? -1.0 : 0.0);
    out[c] = std::clamp(psi[c] + move_limit * s, 0.0, 1.0);
  }
  return out;
}

struct StepRecord {
  int step = 0;
  double J = 0.0, J1 = 0.0, J2 = 0.0;
  double vdot1 = 0.0, vdot2 = 0.0;
  double tout1 = 0.0, tout2 = 0.0;
  double move = 0.0;  // move limit in force when leaving this step
  double res1 = 0.0, res2 = 0.0;
};

struct OptimizationResult {
  DensityField psi;
  AnalysisState state;  // analysis of the returned design
  std::vector<StepRecord> history;
  bool converged = false;  // trailing-window test met before the iteration cap
  bool aborted = false;    // persistent solver failure
};

// called after each accepted step, e.g. to write field snapshots and history
using StepSink = std::function<void(const StepRecord&, const DensityField&, const AnalysisState&)>;

inline OptimizationResult run_optimization(const Grid& g, const BoundaryPatches& bp,
                                           const AnalysisSettings& as,
                                           const OptimizerSettings& os,
                                           const StepSink& on_step = {}) {
  os.validate();
  const PortBuffer pb = port_buffer(g, bp);

  OptimizationResult res;
  res.psi = initial_design(g, pb);

  double move = os.move_limit;
  int decrease_run = 0;
  int steps_at_move = 0;  // accepted steps since the move limit last shrank
  int rejects = 0;
  DensityField psi_prev;
  std::vector<double> grad_prev;
  bool have_state = false;

  for (int step = 0; step < os.max_iters; ++step) {
    AnalysisSettings step_as = as;
    if (step < os.projection_start) step_as.beta = 0.0;

    AnalysisState st = analyze(g, bp, res.psi, step_as, have_state ? &res.state : nullptr);

    if (!st.converged) {
      // reject: shrink the trust region and retry from the previous design
      if (!have_state || rejects >= 8) {
        res.aborted = true;
        break;
      }
      ++rejects;
      move *= 0.5;
      steps_at_move = 0;
      res.psi = slp_update(psi_prev, grad_prev, move);
      continue;
    }
    rejects = 0;
    res.state = std::move(st);
    have_state = true;

    StepRecord rec;
    rec.step = int(res.history.size());
    rec.J = res.state.objective.J;
    rec.J1 = res.state.objective.J1;
    rec.J2 = res.state.objective.J2;
    rec.vdot1 = res.state.objective.vdot1;
    rec.vdot2 = res.state.objective.vdot2;
    rec.tout1 = res.state.objective.tout1;
    rec.tout2 = res.state.objective.tout2;
    rec.res1 = res.state.s1.res;
    rec.res2 = res.state.s2.res;

    // adaptive trust region: the third objective decrease since the last
    // halving shrinks the move; counting non-consecutively matters because
    // the sign step settles into period-two cycles whose decreases alternate
    // with increases and would otherwise never trip the trigger
    const size_t n = res.history.size();
    ++steps_at_move;
    if (n >= 1 && rec.J < res.history[n - 1].J && ++decrease_run >= 3) {
      move *= 0.5;
      decrease_run = 0;
      steps_at_move = 0;
    }
    rec.move = move;
    res.history.push_back(rec);
    if (on_step) on_step(rec, res.psi, res.state);

    // trailing-window convergence on the relative objective change
    if (int(res.history.size()) > os.conv_window) {
      bool settled = true, nearly = true;
      for (size_t i = res.history.size() - size_t(os.conv_window); i < res.history.size(); ++i) {
        const double dj = std::abs(res.history[i].J - res.history[i - 1].J);
        if (dj > os.conv_tol * std::abs(res.history[i].J)) settled = false;
        if (dj > 10.0 * os.conv_tol * std::abs(res.history[i].J)) {
          nearly = false;
          break;
        }
      }
      if (settled) {
        res.converged = true;
        break;
      }
      // continuation: per-step progress has collapsed at this move size yet
      // the window cannot close, so refine the trust region; demanding a
      // full window at the current size keeps overlapping windows from
      // cascading the halvings
      if (nearly && steps_at_move >= os.conv_window) {
        move *= 0.5;
        decrease_run = 0;
        steps_at_move = 0;
      }
    }

    if (step + 1 == os.max_iters) break;  // keep psi consistent with state

    const SensitivityReport sens = compute_sensitivity(g, bp, res.state, step_as, &pb.frozen);
    if (!sens.converged) {
      res.aborted = true;
      break;
    }
    psi_prev = res.psi;
    grad_prev = sens.dJ_dpsi;
    res.psi = slp_update(res.psi, grad_prev, move);
  }

  return res;
}

}  // namespace hxtopo

#endif
