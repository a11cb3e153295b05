#ifndef HXTOPO_FLOW_SOLVE_HPP
#define HXTOPO_FLOW_SOLVE_HPP

// Drivers for the discrete flow problem. A pressure-correction smoother
// (upwind matrix + deferred limited correction) takes the state to a modest
// residual; Newton with the exact Jacobian finishes to tight tolerance.
// Small systems factorize directly, large ones run FGMRES with a
// pressure-correction block preconditioner. The transposed solve reuses the
// same machinery, which is what makes the adjoint exact.

#include "hxtopo/flow.hpp"

namespace hxtopo {

class LinearizedFlowOperator {
 public:
  LinearizedFlowOperator(const FluidSystem& sys, const std::vector<double>& x) : n_(sys.ndof()) {
    std::vector<double> r;
    std::vector<Triplet> trip;
    sys.residual_and_jacobian(x, r, trip);
    A_.resize(n_, n_);
    A_.setFromTriplets(trip.begin(), trip.end());
    AT_ = A_.transpose();
  }

  int size() const { return n_; }
  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(size_t(n_));
    spmv(A_, x, y);
  }
  void apply_transpose(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(size_t(n_));
    spmv(AT_, x, y);
  }
  const SpMat& matrix() const { return A_; }
  const SpMat& matrix_transpose() const { return AT_; }

 private:
  int n_;
  SpMat A_, AT_;
};

inline LinearizedFlowOperator linearized_flow_operator(const FluidSystem& sys,
                                                       const FlowState& state) {
  std::vector<double> x;
  sys.pack(state, x);
  return LinearizedFlowOperator(sys, x);
}

namespace fdetail {

// one smoother pass: relaxed momentum sweeps, then a pressure correction
inline void simple_pass(const FluidSystem& sys, const FlowSettings& fs, std::vector<double>& x,
                        FluidSystem::PicardParts& pp, std::vector<double>& pcorr,
                        std::vector<double>& prhs, std::vector<double>& seg,
                        std::vector<double>& gq) {
  const Grid& g = sys.grid();
  sys.picard(x, pp);

  for (int d = 0; d < 3; ++d) {
    Stencil7& M = pp.mom[d];
    std::vector<double>& b = pp.rhs[d];
    const int base = sys.offset(d);
    for (int f = 0; f < M.n; ++f) {
      if (sys.kind(d, f) == FaceKind::Fixed) continue;
      const double relaxed = M.diag[size_t(f)] / fs.relax_u;
      b[size_t(f)] += (relaxed - M.diag[size_t(f)]) * x[size_t(base + f)];
      M.diag[size_t(f)] = relaxed;
    }
    seg.assign(x.begin() + base, x.begin() + base + M.n);
    for (int sweep = 0; sweep < fs.sweeps; ++sweep) M.sgs_sweep(b, seg, false);
    std::copy(seg.begin(), seg.end(), x.begin() + base);
  }

  // mass defect of the tentative field drives the pressure correction
  sys.apply_div(x, prhs);
  for (double& v : prhs) v = -v;
  pcorr.assign(size_t(g.ncell), 0.0);
  stencil_cg(pp.schur, prhs, pcorr, 1e-2, 500);

  sys.apply_grad(pcorr, gq);
  for (int d = 0; d < 3; ++d) {
    const int base = sys.offset(d);
    const int nf = pp.mom[d].n;
    for (int f = 0; f < nf; ++f) {
      if (sys.kind(d, f) == FaceKind::Fixed) continue;
      x[size_t(base + f)] -= pp.dcoef[d][size_t(f)] * gq[size_t(base + f)] / g.area;
    }
  }
  const int offp = sys.offset(3);
  for (int c = 0; c < g.ncell; ++c) x[size_t(offp + c)] += fs.relax_p * pcorr[size_t(c)];
}

// block preconditioner around the (transposed) saddle Jacobian; pp must hold
// unrelaxed Picard parts assembled at the linearization state
inline void simple_precond(const FluidSystem& sys, const FluidSystem::PicardParts& pp,
                           const std::vector<double>& r, std::vector<double>& z, bool transpose,
                           std::vector<double>& seg, std::vector<double>& zp,
                           std::vector<double>& srhs, std::vector<double>& gq) {
  const Grid& g = sys.grid();
  z.assign(r.size(), 0.0);

  for (int d = 0; d < 3; ++d) {
    const Stencil7& M = pp.mom[d];
    const int base = sys.offset(d);
    seg.assign(size_t(M.n), 0.0);
    std::vector<double> bseg(r.begin() + base, r.begin() + base + M.n);
    for (int sweep = 0; sweep < 2; ++sweep) M.sgs_sweep(bseg, seg, transpose);
    std::copy(seg.begin(), seg.end(), z.begin() + base);
  }

  const int offp = sys.offset(3);
  sys.apply_div(z, srhs);  // uses only the velocity blocks of z
  for (int c = 0; c < g.ncell; ++c) {
    const double rp = r[size_t(offp + c)];
    srhs[size_t(c)] = transpose ? rp + srhs[size_t(c)] : rp - srhs[size_t(c)];
  }
  zp.assign(size_t(g.ncell), 0.0);
  stencil_cg(pp.schur, srhs, zp, 5e-2, 80);

  sys.apply_grad(zp, gq);
  const double sgn = transpose ? +1.0 : -1.0;
  for (int d = 0; d < 3; ++d) {
    const int base = sys.offset(d);
    const int nf = pp.mom[d].n;
    for (int f = 0; f < nf; ++f) {
      if (sys.kind(d, f) == FaceKind::Fixed) continue;
      z[size_t(base + f)] += sgn * gq[size_t(base + f)] / pp.mom[d].diag[size_t(f)];
    }
  }
  for (int c = 0; c < g.ncell; ++c) z[size_t(offp + c)] = zp[size_t(c)];
}

// solve (J + shift I_vel) dx = rhs (or the transpose) at the given state;
// shift > 0 is the backward-Euler mass term of pseudo-transient continuation
inline bool solve_linearized(const FluidSystem& sys, const std::vector<double>& x,
                             const std::vector<double>& rhs, std::vector<double>& dx,
                             const FlowSettings& fs, double rel_tol, bool transpose,
                             double shift = 0.0) {
  std::vector<double> r;
  std::vector<Triplet> trip;
  sys.residual_and_jacobian(x, r, trip);
  const int n = sys.ndof();

  if (shift > 0.0)
    for (int d = 0; d < 3; ++d) {
      const int nf = d == 0 ? sys.grid().nu : (d == 1 ? sys.grid().nv : sys.grid().nw);
      for (int f = 0; f < nf; ++f)
        if (sys.kind(d, f) != FaceKind::Fixed)
          trip.emplace_back(sys.offset(d) + f, sys.offset(d) + f, shift);
    }

  if (n <= fs.lu_max_dofs) {
    Eigen::SparseMatrix<double> A(n, n);
    if (transpose) {
      std::vector<Triplet> tt;
      tt.reserve(trip.size());
      for (const auto& t : trip) tt.emplace_back(t.col(), t.row(), t.value());
      A.setFromTriplets(tt.begin(), tt.end());
    } else {
      A.setFromTriplets(trip.begin(), trip.end());
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) return false;
    Eigen::Map<const Eigen::VectorXd> bm(rhs.data(), n);
    Eigen::VectorXd sol = lu.solve(bm);
    if (lu.info() != Eigen::Success) return false;
    dx.assign(sol.data(), sol.data() + n);
    return true;
  }

  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  SpMat AT;
  if (transpose) AT = A.transpose();
  const SpMat& op = transpose ? AT : A;

  FluidSystem::PicardParts pp;
  sys.picard(x, pp);
  if (shift > 0.0)
    for (int d = 0; d < 3; ++d)
      for (int f = 0; f < pp.mom[d].n; ++f)
        if (sys.kind(d, f) != FaceKind::Fixed) pp.mom[d].diag[size_t(f)] += shift;
  std::vector<double> seg, zp, srhs, gq;
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    out.resize(size_t(n));
    spmv(op, in, out);
  };
  auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    out.resize(size_t(n));
    simple_precond(sys, pp, in, out, transpose, seg, zp, srhs, gq);
  };
  dx.assign(size_t(n), 0.0);
  FgmresResult res = fgmres(n, apply, precond, rhs, dx, rel_tol, fs.krylov_restart,
                            fs.krylov_maxit);
  return res.converged;
}

}  // namespace fdetail

// J^T lambda = rhs at a converged state; the adjoint entry point
inline bool solve_flow_adjoint(const FluidSystem& sys, const FlowState& state,
                               const std::vector<double>& rhs, std::vector<double>& lambda,
                               const FlowSettings& fs, double rel_tol = 1e-8) {
  std::vector<double> x;
  sys.pack(state, x);
  return fdetail::solve_linearized(sys, x, rhs, lambda, fs, rel_tol, true);
}

inline FlowState solve_flow(const FluidSystem& sys, const FlowSettings& fs = {},
                            const FlowState* warm = nullptr) {
  FlowState st = warm ? *warm : sys.zero_state();
  require(int(st.u.size()) == sys.grid().nu && int(st.p.size()) == sys.grid().ncell,
          "flow: warm-start state does not match the grid");
  // a warm start adopts only the iterate, not the donor's solve bookkeeping
  st.history.clear();
  st.outer_iters = 0;
  st.newton_iters = 0;
  st.converged = false;
  std::vector<double> x;
  sys.pack(st, x);

  FluidSystem::PicardParts pp;
  std::vector<double> pcorr, prhs, seg, gq, r;

  double res = 0.0;
  auto measure = [&] {
    sys.residual(x, r);
    res = sys.res_norm(r);
    st.history.push_back(res);
  };
  measure();

  // the smoother is not guaranteed to contract at every state, so remember
  // the best iterate and stop feeding passes once progress stalls
  double best_res = res;
  std::vector<double> x_best = x;
  auto track_best = [&] {
    if (res < best_res) {
      best_res = res;
      x_best = x;
    }
  };
  auto restore_best = [&] {
    if (res > best_res) {
      x = x_best;
      sys.residual(x, r);
      res = sys.res_norm(r);
    }
  };

  const double handoff = fs.allow_newton ? std::max(fs.newton_switch, fs.tol) : fs.tol;
  int outer = 0, since_best = 0;
  while (res > handoff && outer < fs.max_outer && since_best < 100) {
    fdetail::simple_pass(sys, fs, x, pp, pcorr, prhs, seg, gq);
    measure();
    ++outer;
    since_best = res < 0.999 * best_res ? 0 : since_best + 1;
    track_best();
  }
  restore_best();
  st.outer_iters = outer;

  if (res > fs.tol && fs.allow_newton) {
    // pseudo-transient Newton: each step is one backward-Euler update, taken
    // unconditionally so the iterate can ride a physical transient through
    // residual bumps; the pseudo-time step grows with the residual drop
    // (switched-evolution relaxation) until the update is plain Newton
    double dtau = fs.ptc_tau0;
    int cutbacks = 0;
    std::vector<double> rhs, dx, xprev;
    while (res > fs.tol && st.newton_iters < fs.newton_max && cutbacks < 30) {
      rhs.assign(r.begin(), r.end());
      for (double& v : rhs) v = -v;
      // tighter linear solves near the finish line
      const double lin_tol = std::min(fs.krylov_tol, std::max(1e-4, 0.01 * fs.tol / res));
      if (!fdetail::solve_linearized(sys, x, rhs, dx, fs, lin_tol, false,
                                     sys.grid().vol / dtau)) {
        dtau *= 0.2;
        ++cutbacks;
        continue;
      }
      ++st.newton_iters;
      xprev = x;
      for (size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
      sys.residual(x, r);
      const double rnew = sys.res_norm(r);
      if (!std::isfinite(rnew) || rnew > 10.0 * res) {
        x.swap(xprev);
        sys.residual(x, r);
        dtau *= 0.2;
        ++cutbacks;
        continue;
      }
      dtau = std::clamp(dtau * std::max(res / std::max(rnew, 1e-300), 0.3), 1e-9, 1e12);
      res = rnew;
      st.history.push_back(res);
      cutbacks = 0;
      track_best();
    }
    restore_best();
  }

  st.res = res;
  st.converged = res <= fs.tol;
  sys.unpack(x, st);
  return st;
}

// signed volumetric rate through a port: positive when fluid crosses the
// patch in the stated direction (outward = leaving the domain)
inline double flow_rate(const Grid& g, const FlowState& s, const std::vector<PortFaceRef>& faces,
                        bool outward = true) {
  double q = 0.0;
  for (const PortFaceRef& ref : faces) {
    const std::vector<double>& comp = ref.comp == 0 ? s.u : (ref.comp == 1 ? s.v : s.w);
    q += (outward ? ref.sign : -ref.sign) * comp[size_t(ref.face)] * g.area;
  }
  return q;
}

}  // namespace hxtopo

#endif
