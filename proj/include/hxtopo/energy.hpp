#ifndef HXTOPO_ENERGY_HPP
#define HXTOPO_ENERGY_HPP

// Shared temperature field advected by both fluids. The two velocity fields
// are summed face by face into one advecting flux: Brinkman drag makes each
// vanish outside its own phase, so the sum is the single velocity the energy
// balance sees. Conduction uses 1/Pe(gamma) per cell with harmonic face
// averaging, which gives the correct series resistance across fluid/solid
// interfaces.
//
// The advection stencil is first-order upwind written in deferred-continuity
// form: each face contributes flux * (T_donor - T_cell) and outflow faces
// drop out entirely. Row sums are then nonnegative regardless of the small
// mass defect left by the flow solver, so the discrete maximum principle
// holds unconditionally: T stays inside the inlet range [0, 1].
//
// Boundary conditions: T = 1 on fluid 1 inlets and T = 0 on fluid 2 inlets
// (Dirichlet at the port plane, conduction over the half cell plus the
// advected inflow), zero normal gradient on outlets, walls, and symmetry
// planes. The system is linear in T and solved directly; the factorization
// is reused for the transposed (adjoint) solve.

#include <Eigen/SparseLU>

#include "hxtopo/flow.hpp"

namespace hxtopo {

struct EnergyReport {
  std::vector<double> T;
  bool converged = false;
  double residual = 0.0;  // |E T - b|_inf relative to |b|_inf
  double tmin = 0.0, tmax = 0.0;
};

class EnergySystem {
 public:
  EnergySystem(const Grid& grid, const BoundaryPatches& patches, const std::vector<double>* pe,
               const FlowState* flow1, const FlowState* flow2)
      : g_(&grid), bp_(&patches), pe_(pe), f1_(flow1), f2_(flow2) {
    require(int(pe->size()) == grid.ncell, "energy: Peclet field size mismatch");
    for (double p : *pe) require(p > 0.0, cat("energy: Peclet must be positive, got ", p));
    check_state(*flow1);
    check_state(*flow2);
    assemble();
  }

  const Grid& grid() const { return *g_; }
  const SpMat& matrix() const { return mat_; }
  const std::vector<double>& rhs() const { return b_; }

  // combined advecting face velocity, both fluids summed
  double flux(int comp, int face) const {
    const std::vector<double>& a = comp == 0 ? f1_->u : comp == 1 ? f1_->v : f1_->w;
    const std::vector<double>& b = comp == 0 ? f2_->u : comp == 1 ? f2_->v : f2_->w;
    return a[size_t(face)] + b[size_t(face)];
  }

  EnergyReport solve() {
    factorize();
    EnergyReport rep;
    const int n = g_->ncell;
    Eigen::Map<const Eigen::VectorXd> bb(b_.data(), n);
    Eigen::VectorXd x = lu_.solve(bb);
    Eigen::VectorXd r = mat_ * x - bb;
    const double bscale = bb.lpNorm<Eigen::Infinity>();
    rep.residual = bscale > 0.0 ? r.lpNorm<Eigen::Infinity>() / bscale : 0.0;
    rep.converged = lu_.info() == Eigen::Success && rep.residual <= 1e-8;
    rep.T.assign(x.data(), x.data() + n);
    rep.tmin = *std::min_element(rep.T.begin(), rep.T.end());
    rep.tmax = *std::max_element(rep.T.begin(), rep.T.end());
    return rep;
  }

  // solve E^T lam = g, the adjoint of the temperature equation
  std::vector<double> adjoint(const std::vector<double>& gT) {
    factorize();
    require(int(gT.size()) == g_->ncell, "energy: adjoint source size mismatch");
    Eigen::Map<const Eigen::VectorXd> gg(gT.data(), g_->ncell);
    Eigen::VectorXd lam = lu_.transpose().solve(gg);
    return std::vector<double>(lam.data(), lam.data() + g_->ncell);
  }

  // accumulate lam^T dR/du into per-component face arrays. The derivative is
  // taken with respect to the combined face velocity, and since the flux is
  // the plain sum u1 + u2 the same array serves either fluid's chain rule.
  void flux_gradient(const std::vector<double>& T, const std::vector<double>& lam,
                     std::array<std::vector<double>, 3>& du) const {
    du[0].assign(size_t(g_->nu), 0.0);
    du[1].assign(size_t(g_->nv), 0.0);
    du[2].assign(size_t(g_->nw), 0.0);
    walk([&](const Side& sd) {
      if (lam[size_t(sd.c)] == 0.0) return;
      const double m = sd.s * g_->area * flux(sd.d, sd.f);
      if (sd.n >= 0) {
        if (m < 0.0) du[size_t(sd.d)][size_t(sd.f)] +=
            sd.s * g_->area * (T[size_t(sd.n)] - T[size_t(sd.c)]) * lam[size_t(sd.c)];
      } else if (sd.cls == BFace::In1 || sd.cls == BFace::In2) {
        const double tb = sd.cls == BFace::In1 ? 1.0 : 0.0;
        if (m < 0.0) du[size_t(sd.d)][size_t(sd.f)] +=
            sd.s * g_->area * (tb - T[size_t(sd.c)]) * lam[size_t(sd.c)];
      }
    });
  }

  // accumulate lam^T dR/dPe per cell (conduction coefficients only; the
  // advecting flux does not depend on Pe)
  void peclet_gradient(const std::vector<double>& T, const std::vector<double>& lam,
                       std::vector<double>& dpe) const {
    dpe.assign(size_t(g_->ncell), 0.0);
    const double ah = g_->area / g_->h;
    const std::vector<double>& pe = *pe_;
    walk([&](const Side& sd) {
      const double lc = lam[size_t(sd.c)];
      if (lc == 0.0) return;
      if (sd.n >= 0) {
        const double kf = 2.0 / (pe[size_t(sd.c)] + pe[size_t(sd.n)]);
        // d(2/(pc+pn))/dp is -kf^2/2 for either endpoint
        const double dterm = lc * ah * (T[size_t(sd.c)] - T[size_t(sd.n)]) * (-0.5 * kf * kf);
        dpe[size_t(sd.c)] += dterm;
        dpe[size_t(sd.n)] += dterm;
      } else if (sd.cls == BFace::In1 || sd.cls == BFace::In2) {
        const double tb = sd.cls == BFace::In1 ? 1.0 : 0.0;
        const double pc = pe[size_t(sd.c)];
        dpe[size_t(sd.c)] += lc * 2.0 * ah * (T[size_t(sd.c)] - tb) * (-1.0 / (pc * pc));
      }
    });
  }

 private:
  // one side of one cell: owning cell, component, face index, outward sign,
  // neighbor cell (or -1 at the boundary), boundary class when n < 0
  struct Side {
    int c, d, f, s, n;
    BFace cls;
  };

  void check_state(const FlowState& st) const {
    require(int(st.u.size()) == g_->nu && int(st.v.size()) == g_->nv &&
                int(st.w.size()) == g_->nw,
            "energy: flow state does not match the grid");
  }

  template <class F>
  void walk(F&& fn) const {
    const Grid& g = *g_;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        for (int k = 0; k < g.nz; ++k) {
          const int c = g.cell(i, j, k);
          Side sd;
          sd.c = c;
          // x- side
          sd.d = 0, sd.f = g.fx(i, j, k), sd.s = -1;
          sd.n = i > 0 ? g.cell(i - 1, j, k) : -1;
          sd.cls = i > 0 ? BFace::Wall : bp_->at(XMin, j, k);
          fn(sd);
          // x+ side
          sd.f = g.fx(i + 1, j, k), sd.s = +1;
          sd.n = i + 1 < g.nx ? g.cell(i + 1, j, k) : -1;
          sd.cls = i + 1 < g.nx ? BFace::Wall : bp_->at(XMax, j, k);
          fn(sd);
          // y- side
          sd.d = 1, sd.f = g.fy(i, j, k), sd.s = -1;
          sd.n = j > 0 ? g.cell(i, j - 1, k) : -1;
          sd.cls = j > 0 ? BFace::Wall : bp_->at(YMin, i, k);
          fn(sd);
          // y+ side
          sd.f = g.fy(i, j + 1, k), sd.s = +1;
          sd.n = j + 1 < g.ny ? g.cell(i, j + 1, k) : -1;
          sd.cls = j + 1 < g.ny ? BFace::Wall : bp_->at(YMax, i, k);
          fn(sd);
          // z- side
          sd.d = 2, sd.f = g.fz(i, j, k), sd.s = -1;
          sd.n = k > 0 ? g.cell(i, j, k - 1) : -1;
          sd.cls = k > 0 ? BFace::Wall : bp_->at(ZMin, i, j);
          fn(sd);
          // z+ side
          sd.f = g.fz(i, j, k + 1), sd.s = +1;
          sd.n = k + 1 < g.nz ? g.cell(i, j, k + 1) : -1;
          sd.cls = k + 1 < g.nz ? BFace::Wall : bp_->at(ZMax, i, j);
          fn(sd);
        }
  }

  void assemble() {
    const Grid& g = *g_;
    const double ah = g.area / g.h;
    const std::vector<double>& pe = *pe_;
    std::vector<Triplet> trip;
    trip.reserve(size_t(g.ncell) * 7);
    b_.assign(size_t(g.ncell), 0.0);
    walk([&](const Side& sd) {
      const double m = sd.s * g.area * flux(sd.d, sd.f);
      if (sd.n >= 0) {
        if (m < 0.0) {
          trip.emplace_back(sd.c, sd.c, -m);
          trip.emplace_back(sd.c, sd.n, m);
        }
        const double kf = 2.0 / (pe[size_t(sd.c)] + pe[size_t(sd.n)]);
        trip.emplace_back(sd.c, sd.c, kf * ah);
        trip.emplace_back(sd.c, sd.n, -kf * ah);
      } else if (sd.cls == BFace::In1 || sd.cls == BFace::In2) {
        const double tb = sd.cls == BFace::In1 ? 1.0 : 0.0;
        const double kb = 2.0 * ah / pe[size_t(sd.c)];
        trip.emplace_back(sd.c, sd.c, kb);
        b_[size_t(sd.c)] += kb * tb;
        if (m < 0.0) {
          trip.emplace_back(sd.c, sd.c, -m);
          b_[size_t(sd.c)] += -m * tb;
        }
      }
      // outlets carry no conduction and, in deferred form, no outflow term;
      // walls and symmetry planes are adiabatic with zero face flux
    });
    mat_.resize(g.ncell, g.ncell);
    mat_.setFromTriplets(trip.begin(), trip.end());
    mat_.makeCompressed();
    factored_ = false;
  }

  void factorize() {
    if (factored_) return;
    lu_.compute(mat_);
    require(lu_.info() == Eigen::Success, "energy: temperature matrix is singular");
    factored_ = true;
  }

  const Grid* g_;
  const BoundaryPatches* bp_;
  const std::vector<double>* pe_;
  const FlowState* f1_;
  const FlowState* f2_;
  SpMat mat_;
  std::vector<double> b_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool factored_ = false;
};

// convenience wrapper matching the solver call chain: flows in, temperature out
inline EnergyReport solve_energy(const Grid& g, const BoundaryPatches& bp,
                                 const std::vector<double>& pe, const FlowState& f1,
                                 const FlowState& f2) {
  EnergySystem sys(g, bp, &pe, &f1, &f2);
  return sys.solve();
}

}  // namespace hxtopo

#endif
