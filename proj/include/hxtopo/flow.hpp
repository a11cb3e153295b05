#ifndef HXTOPO_FLOW_HPP
#define HXTOPO_FLOW_HPP

// Steady incompressible flow of one fluid through the Brinkman-penalized
// design, on the staggered grid. Unknowns are packed x = [u, v, w, p].
//
// Momentum balance per active velocity face (finite volume over the face CV):
//   conv(x) + diff(x) + vol*alpha*u + area*(p_E - p_W) = 0
// with convection interpolated by a smooth van Albada limited MUSCL scheme
// and diffusion by central differences (one-sided 2/h gradients at no-slip
// boundaries, zero shear at symmetry planes). Continuity per cell closes the
// saddle system. Ports prescribe total pressure on the boundary side of a
// half CV and leave the normal velocity free; tangential velocity at every
// non-symmetry boundary (ports included) is pinned to zero.
//
// The same traversal emits the residual and, on demand, exact Jacobian
// entries, so the linearization used by Newton and the adjoint is the
// derivative of this residual and nothing else.

#include "hxtopo/linalg.hpp"
#include "hxtopo/patches.hpp"

namespace hxtopo {

struct FlowBCs {
  double p_in = 1.0;  // nondimensional: inlet total pressure 1, outlet 0
  double p_out = 0.0;
};

struct FlowSettings {
  double tol = 1e-6;            // Linf of residual over face area
  int max_outer = 12000;        // pressure-correction iteration cap
  double relax_u = 0.7;
  double relax_p = 0.3;
  int sweeps = 3;               // SGS passes per momentum stage
  double newton_switch = 5e-4;  // hand off to Newton below this residual
  int newton_max = 30;
  bool allow_newton = true;
  double ptc_tau0 = 0.1;        // initial pseudo-time step for the Newton phase
  int lu_max_dofs = 60000;      // direct sparse factorization threshold
  double krylov_tol = 1e-2;     // linear tolerance inside Newton
  int krylov_restart = 60;
  int krylov_maxit = 800;
};

struct FlowState {
  std::vector<double> u, v, w, p;
  bool converged = false;
  double res = 1.0;
  int outer_iters = 0;
  int newton_iters = 0;
  std::vector<double> history;  // residual trace, one entry per outer pass
};

enum class FaceKind : uint8_t { Fixed = 0, Interior = 1, Port = 2 };

namespace fdetail {

// Smooth van Albada slope average. eps blends the weights toward a plain
// central average once both slopes drop below ~1e-4, which keeps the scheme
// differentiable through stagnant regions where the slope ratio is noise.
inline void muscl_weights(double a, double b, double& s, double& dsda, double& dsdb) {
  const double eps = 1e-8;
  const double num = a * b * (a + b) + eps * (a + b);
  const double den = a * a + b * b + 2.0 * eps;
  s = num / den;
  const double dnum_a = 2.0 * a * b + b * b + eps;
  const double dnum_b = a * a + 2.0 * a * b + eps;
  dsda = (dnum_a * den - num * 2.0 * a) / (den * den);
  dsdb = (dnum_b * den - num * 2.0 * b) / (den * den);
}

// residual-only emitter: derivative callbacks compile away
struct ResidualEmitter {
  static constexpr bool wants_jacobian = false;
  std::vector<double>* r;
  void value(int row, double val) { (*r)[size_t(row)] += val; }
  void deriv(int, int, double) {}
};

struct JacobianEmitter {
  static constexpr bool wants_jacobian = true;
  std::vector<double>* r;
  std::vector<Triplet>* trip;
  void value(int row, double val) { (*r)[size_t(row)] += val; }
  void deriv(int row, int col, double val) { trip->emplace_back(row, col, val); }
};

}  // namespace fdetail

// Per-fluid discrete problem: geometry, face classification, drag field.
class FluidSystem {
 public:
  FluidSystem(const Grid& grid, const BoundaryPatches& patches, int fluid,
              const std::vector<double>* alpha, double Re, FlowBCs bc = {})
      : g_(&grid), bp_(&patches), fluid_(fluid), alpha_(alpha), re_(Re), bc_(bc) {
    require(fluid == 0 || fluid == 1, "flow: fluid index must be 0 or 1");
    require(Re > 0.0, cat("flow: Reynolds number must be positive, got ", Re));
    require(int(alpha->size()) == grid.ncell, "flow: drag field size mismatch");
    off_[0] = 0;
    off_[1] = grid.nu;
    off_[2] = grid.nu + grid.nv;
    off_[3] = grid.nu + grid.nv + grid.nw;
    ndof_ = off_[3] + grid.ncell;
    classify();
  }

  const Grid& grid() const { return *g_; }
  const BoundaryPatches& patches() const { return *bp_; }
  int fluid() const { return fluid_; }
  double reynolds() const { return re_; }
  int ndof() const { return ndof_; }
  int offset(int block) const { return off_[block]; }
  FaceKind kind(int comp, int face) const { return kind_[comp][size_t(face)]; }
  double port_pressure(int comp, int face) const { return pb_[comp][size_t(face)]; }
  const std::vector<double>& alpha() const { return *alpha_; }

  int face_id(int comp, const int c[3]) const {
    switch (comp) {
      case 0: return g_->fx(c[0], c[1], c[2]);
      case 1: return g_->fy(c[0], c[1], c[2]);
      default: return g_->fz(c[0], c[1], c[2]);
    }
  }

  // pack helpers -------------------------------------------------------
  void pack(const FlowState& s, std::vector<double>& x) const {
    x.resize(size_t(ndof_));
    std::copy(s.u.begin(), s.u.end(), x.begin() + off_[0]);
    std::copy(s.v.begin(), s.v.end(), x.begin() + off_[1]);
    std::copy(s.w.begin(), s.w.end(), x.begin() + off_[2]);
    std::copy(s.p.begin(), s.p.end(), x.begin() + off_[3]);
  }
  void unpack(const std::vector<double>& x, FlowState& s) const {
    s.u.assign(x.begin() + off_[0], x.begin() + off_[1]);
    s.v.assign(x.begin() + off_[1], x.begin() + off_[2]);
    s.w.assign(x.begin() + off_[2], x.begin() + off_[3]);
    s.p.assign(x.begin() + off_[3], x.end());
  }
  FlowState zero_state() const {
    FlowState s;
    s.u.assign(size_t(g_->nu), 0.0);
    s.v.assign(size_t(g_->nv), 0.0);
    s.w.assign(size_t(g_->nw), 0.0);
    s.p.assign(size_t(g_->ncell), 0.0);
    return s;
  }

  // full residual; r sized ndof
  void residual(const std::vector<double>& x, std::vector<double>& r) const {
    r.assign(size_t(ndof_), 0.0);
    fdetail::ResidualEmitter em{&r};
    assemble(x, em);
  }

  // residual plus exact Jacobian triplets
  void residual_and_jacobian(const std::vector<double>& x, std::vector<double>& r,
                             std::vector<Triplet>& trip) const {
    r.assign(size_t(ndof_), 0.0);
    trip.clear();
    trip.reserve(size_t(ndof_) * 18);
    fdetail::JacobianEmitter em{&r, &trip};
    assemble(x, em);
  }

  // Linf residual normalized by face area (momentum rows scale with
  // area*delta_p = area, continuity rows with area*U = area)
  double res_norm(const std::vector<double>& r) const { return linf(r) / g_->area; }

  // SIMPLE-style upwind (Picard) coefficients; used as smoother, as the
  // block preconditioner inside Newton/adjoint Krylov solves, and to form
  // the pressure-correction Schur complement.
  struct PicardParts {
    std::array<Stencil7, 3> mom;           // unrelaxed upwind momentum blocks
    std::array<std::vector<double>, 3> rhs;  // -pressure - deferred correction
    Stencil7 schur;                        // D diag(M)^-1 G on cells
    std::array<std::vector<double>, 3> dcoef;  // area / diag, per active face
  };

  void picard(const std::vector<double>& x, PicardParts& out) const;

  // continuity applied to a velocity-space vector (active faces only)
  void apply_div(const std::vector<double>& z, std::vector<double>& out) const;
  // pressure-gradient contribution to momentum rows (active faces only)
  void apply_grad(const std::vector<double>& q, std::vector<double>& out) const;
  // lambda^T dR/dalpha per cell; x and lambda in packed layout
  void drag_gradient(const std::vector<double>& x, const std::vector<double>& lam,
                     std::vector<double>& dalpha) const;

 private:
  const Grid* g_;
  const BoundaryPatches* bp_;
  int fluid_;
  const std::vector<double>* alpha_;
  double re_;
  FlowBCs bc_;
  int off_[4];
  int ndof_ = 0;
  std::array<std::vector<FaceKind>, 3> kind_;
  std::array<std::vector<double>, 3> pb_;

  static int axis_of(int plane) { return plane / 2; }
  static int plane_of(int axis, int side) { return 2 * axis + (side > 0 ? 1 : 0); }

  int ncells(int axis) const { return axis == 0 ? g_->nx : (axis == 1 ? g_->ny : g_->nz); }

  // boundary classification for the cell-face of cell cc on the given plane
  BFace bclass(int plane, const int cc[3]) const {
    const int ax = axis_of(plane);
    int a, b;
    if (ax == 0) {
      a = cc[1];
      b = cc[2];
    } else if (ax == 1) {
      a = cc[0];
      b = cc[2];
    } else {
      a = cc[0];
      b = cc[1];
    }
    return bp_->at(plane, a, b);
  }

  void classify() {
    const int nf[3] = {g_->nu, g_->nv, g_->nw};
    for (int d = 0; d < 3; ++d) {
      kind_[d].assign(size_t(nf[d]), FaceKind::Interior);
      pb_[d].assign(size_t(nf[d]), 0.0);
      int fdim[3] = {g_->nx, g_->ny, g_->nz};
      fdim[d] += 1;
      int c[3];
      for (c[0] = 0; c[0] < fdim[0]; ++c[0])
        for (c[1] = 0; c[1] < fdim[1]; ++c[1])
          for (c[2] = 0; c[2] < fdim[2]; ++c[2]) {
            if (c[d] > 0 && c[d] < ncells(d)) continue;  // interior along d
            const int id = face_id(d, c);
            const int side = (c[d] == 0) ? -1 : +1;
            int cc[3] = {c[0], c[1], c[2]};
            cc[d] = (side < 0) ? 0 : ncells(d) - 1;
            const BFace cls = bclass(plane_of(d, side), cc);
            if ((fluid_ == 0 && cls == BFace::In1) || (fluid_ == 1 && cls == BFace::In2)) {
              kind_[d][size_t(id)] = FaceKind::Port;
              pb_[d][size_t(id)] = bc_.p_in;
            } else if ((fluid_ == 0 && cls == BFace::Out1) ||
                       (fluid_ == 1 && cls == BFace::Out2)) {
              kind_[d][size_t(id)] = FaceKind::Port;
              pb_[d][size_t(id)] = bc_.p_out;
            } else {
              kind_[d][size_t(id)] = FaceKind::Fixed;
            }
          }
    }
  }

  template <class Emitter>
  void assemble(const std::vector<double>& x, Emitter& em) const;
};

// ---------------------------------------------------------------------------

template <class Emitter>
void FluidSystem::assemble(const std::vector<double>& x, Emitter& em) const {
  const Grid& g = *g_;
  const double A = g.area, V = g.vol, h = g.h, nu = 1.0 / re_;
  const std::vector<double>& al = *alpha_;

  auto val = [&](int d, const int c[3]) { return x[size_t(off_[d] + face_id(d, c))]; };
  auto gid = [&](int d, const int c[3]) { return off_[d] + face_id(d, c); };

  for (int d = 0; d < 3; ++d) {
    int fdim[3] = {g.nx, g.ny, g.nz};
    fdim[d] += 1;
    const int nd = ncells(d);

    int c[3];
    for (c[0] = 0; c[0] < fdim[0]; ++c[0])
      for (c[1] = 0; c[1] < fdim[1]; ++c[1])
        for (c[2] = 0; c[2] < fdim[2]; ++c[2]) {
          const int fid = face_id(d, c);
          const int row = off_[d] + fid;
          const FaceKind kd = kind_[d][size_t(fid)];

          if (kd == FaceKind::Fixed) {
            em.value(row, x[size_t(row)]);
            em.deriv(row, row, 1.0);
            continue;
          }

          const double uf = x[size_t(row)];

          if (kd == FaceKind::Port) {
            const int side = (c[d] == 0) ? -1 : +1;
            int cadj[3] = {c[0], c[1], c[2]};
            cadj[d] = (side < 0) ? 0 : nd - 1;
            const int cajd = g.cell(cadj[0], cadj[1], cadj[2]);
            const double pb = pb_[d][size_t(fid)];

            // half-CV drag and prescribed boundary pressure
            em.value(row, 0.5 * V * al[size_t(cajd)] * uf);
            em.deriv(row, row, 0.5 * V * al[size_t(cajd)]);
            const double padj = x[size_t(off_[3] + cajd)];
            if (side < 0) {
              em.value(row, A * (padj - pb));
              em.deriv(row, off_[3] + cajd, A);
            } else {
              em.value(row, A * (pb - padj));
              em.deriv(row, off_[3] + cajd, -A);
            }

            // one-sided diffusion toward the interior
            int nbc[3] = {c[0], c[1], c[2]};
            nbc[d] -= side;
            em.value(row, nu * A / h * (uf - val(d, nbc)));
            em.deriv(row, row, nu * A / h);
            em.deriv(row, gid(d, nbc), -nu * A / h);

            // tangential shear over the half CV
            for (int a = 0; a < 3; ++a) {
              if (a == d) continue;
              for (int s = -1; s <= 1; s += 2) {
                const bool at_boundary = (s < 0 && c[a] == 0) || (s > 0 && c[a] == ncells(a) - 1);
                if (at_boundary) {
                  if (bclass(plane_of(a, s), cadj) != BFace::Symmetry) {
                    // no-slip at distance h/2 over half the side area
                    em.value(row, nu * A / h * uf);
                    em.deriv(row, row, nu * A / h);
                  }
                } else {
                  int sb[3] = {c[0], c[1], c[2]};
                  sb[a] += s;
                  em.value(row, 0.5 * nu * A / h * (uf - val(d, sb)));
                  em.deriv(row, row, 0.5 * nu * A / h);
                  em.deriv(row, gid(d, sb), -0.5 * nu * A / h);
                }
              }
            }
            continue;
          }

          // ----- interior momentum face -----
          int cw[3] = {c[0], c[1], c[2]};
          cw[d] -= 1;
          const int cellW = g.cell(cw[0], cw[1], cw[2]);
          const int cellE = g.cell(c[0], c[1], c[2]);

          // Brinkman drag, face value averaged from the two adjacent cells
          const double ab = 0.5 * (al[size_t(cellW)] + al[size_t(cellE)]);
          em.value(row, V * ab * uf);
          em.deriv(row, row, V * ab);

          // pressure force
          em.value(row, A * (x[size_t(off_[3] + cellE)] - x[size_t(off_[3] + cellW)]));
          em.deriv(row, off_[3] + cellE, A);
          em.deriv(row, off_[3] + cellW, -A);

          // diffusion
          for (int a = 0; a < 3; ++a) {
            for (int s = -1; s <= 1; s += 2) {
              if (a == d) {
                int nb[3] = {c[0], c[1], c[2]};
                nb[a] += s;
                em.value(row, nu * A / h * (uf - val(d, nb)));
                em.deriv(row, row, nu * A / h);
                em.deriv(row, gid(d, nb), -nu * A / h);
              } else {
                const bool at_boundary = (s < 0 && c[a] == 0) || (s > 0 && c[a] == ncells(a) - 1);
                if (at_boundary) {
                  // two half-faces, one per adjacent cell column
                  for (const int* cc : {cw, c}) {
                    if (bclass(plane_of(a, s), cc) != BFace::Symmetry) {
                      em.value(row, nu * A / h * uf);  // (A/2)/(h/2)
                      em.deriv(row, row, nu * A / h);
                    }
                  }
                } else {
                  int nb[3] = {c[0], c[1], c[2]};
                  nb[a] += s;
                  em.value(row, nu * A / h * (uf - val(d, nb)));
                  em.deriv(row, row, nu * A / h);
                  em.deriv(row, gid(d, nb), -nu * A / h);
                }
              }
            }
          }

          // convection over the six CV sides
          for (int a = 0; a < 3; ++a) {
            const int alim = (a == d) ? nd : ncells(a) - 1;  // max face coord along a
            for (int s = -1; s <= 1; s += 2) {
              if (a != d) {
                const bool at_boundary = (s < 0 && c[a] == 0) || (s > 0 && c[a] == ncells(a) - 1);
                if (at_boundary) continue;  // convected tangential velocity is zero there
              }

              // mass flux through this side, oriented along +a
              double m;
              int mcol[2];
              if (a == d) {
                int nb[3] = {c[0], c[1], c[2]};
                nb[a] += s;
                m = 0.5 * A * (uf + val(d, nb));
                mcol[0] = row;
                mcol[1] = gid(d, nb);
              } else {
                const int ft = c[a] + (s > 0 ? 1 : 0);
                int t1[3] = {cw[0], cw[1], cw[2]};
                t1[a] = ft;
                int t2[3] = {c[0], c[1], c[2]};
                t2[a] = ft;
                m = 0.5 * A * (val(a, t1) + val(a, t2));
                mcol[0] = gid(a, t1);
                mcol[1] = gid(a, t2);
              }

              // upwind-biased MUSCL stencil along a, faces of component d
              int lo[3] = {c[0], c[1], c[2]}, hi[3] = {c[0], c[1], c[2]};
              if (s > 0) hi[a] += 1;
              else lo[a] -= 1;
              int C[3], D[3], U[3];
              if (m >= 0.0) {
                std::copy(lo, lo + 3, C);
                std::copy(hi, hi + 3, D);
                std::copy(lo, lo + 3, U);
                U[a] -= 1;
              } else {
                std::copy(hi, hi + 3, C);
                std::copy(lo, lo + 3, D);
                std::copy(hi, hi + 3, U);
                U[a] += 1;
              }
              const bool haveU = U[a] >= 0 && U[a] <= alim;

              const double vC = val(d, C), vD = val(d, D);
              double phi, wU = 0.0, wC = 1.0, wD = 0.0;
              if (haveU) {
                const double vU = val(d, U);
                double sl, dsda, dsdb;
                fdetail::muscl_weights(vC - vU, vD - vC, sl, dsda, dsdb);
                phi = vC + 0.5 * sl;
                wU = -0.5 * dsda;
                wC = 1.0 + 0.5 * (dsda - dsdb);
                wD = 0.5 * dsdb;
              } else {
                phi = vC;  // first order when the far-upwind face leaves the grid
              }

              em.value(row, s * m * phi);
              if (Emitter::wants_jacobian) {
                em.deriv(row, mcol[0], s * 0.5 * A * phi);
                em.deriv(row, mcol[1], s * 0.5 * A * phi);
                em.deriv(row, gid(d, C), s * m * wC);
                em.deriv(row, gid(d, D), s * m * wD);
                if (haveU) em.deriv(row, gid(d, U), s * m * wU);
              }
            }
          }
        }
  }

  // continuity rows
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) {
        const int row = off_[3] + g.cell(i, j, k);
        const int c[3] = {i, j, k};
        for (int d = 0; d < 3; ++d) {
          for (int s = -1; s <= 1; s += 2) {
            int fc[3] = {c[0], c[1], c[2]};
            if (s > 0) fc[d] += 1;
            em.value(row, s * A * val(d, fc));
            em.deriv(row, gid(d, fc), s * A);
          }
        }
      }
}

// ---------------------------------------------------------------------------

inline void FluidSystem::apply_div(const std::vector<double>& z, std::vector<double>& out) const {
  const Grid& g = *g_;
  out.assign(size_t(g.ncell), 0.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) {
        const int cc = g.cell(i, j, k);
        double acc = 0.0;
        const int c[3] = {i, j, k};
        for (int d = 0; d < 3; ++d)
          for (int s = -1; s <= 1; s += 2) {
            int fc[3] = {c[0], c[1], c[2]};
            if (s > 0) fc[d] += 1;
            const int fidx = face_id(d, fc);
            if (kind_[d][size_t(fidx)] == FaceKind::Fixed) continue;
            acc += s * g.area * z[size_t(off_[d] + fidx)];
          }
        out[size_t(cc)] = acc;
      }
}

inline void FluidSystem::apply_grad(const std::vector<double>& q, std::vector<double>& out) const {
  const Grid& g = *g_;
  out.assign(size_t(off_[3]), 0.0);
  for (int d = 0; d < 3; ++d) {
    int fdim[3] = {g.nx, g.ny, g.nz};
    fdim[d] += 1;
    int c[3];
    for (c[0] = 0; c[0] < fdim[0]; ++c[0])
      for (c[1] = 0; c[1] < fdim[1]; ++c[1])
        for (c[2] = 0; c[2] < fdim[2]; ++c[2]) {
          const int fidx = face_id(d, c);
          const FaceKind kd = kind_[d][size_t(fidx)];
          if (kd == FaceKind::Fixed) continue;
          const int row = off_[d] + fidx;
          if (kd == FaceKind::Port) {
            const int side = (c[d] == 0) ? -1 : +1;
            int cadj[3] = {c[0], c[1], c[2]};
            cadj[d] = (side < 0) ? 0 : ncells(d) - 1;
            const double padj = q[size_t(g.cell(cadj[0], cadj[1], cadj[2]))];
            out[size_t(row)] = (side < 0) ? g.area * padj : -g.area * padj;
          } else {
            int cw[3] = {c[0], c[1], c[2]};
            cw[d] -= 1;
            out[size_t(row)] = g.area * (q[size_t(g.cell(c[0], c[1], c[2]))] -
                                         q[size_t(g.cell(cw[0], cw[1], cw[2]))]);
          }
        }
  }
}

inline void FluidSystem::drag_gradient(const std::vector<double>& x, const std::vector<double>& lam,
                                       std::vector<double>& dalpha) const {
  const Grid& g = *g_;
  dalpha.assign(size_t(g.ncell), 0.0);
  // the drag term is linear in alpha: interior rows carry vol * u times the
  // mean of the two adjacent cells, port rows half the volume times the one
  // adjacent cell, so every (face, cell) incidence weighs vol/2 * u
  for (int d = 0; d < 3; ++d) {
    int fdim[3] = {g.nx, g.ny, g.nz};
    fdim[d] += 1;
    int c[3];
    for (c[0] = 0; c[0] < fdim[0]; ++c[0])
      for (c[1] = 0; c[1] < fdim[1]; ++c[1])
        for (c[2] = 0; c[2] < fdim[2]; ++c[2]) {
          const int fidx = face_id(d, c);
          const FaceKind kd = kind_[d][size_t(fidx)];
          if (kd == FaceKind::Fixed) continue;
          const int row = off_[d] + fidx;
          const double w = 0.5 * g.vol * x[size_t(row)] * lam[size_t(row)];
          if (kd == FaceKind::Port) {
            int cadj[3] = {c[0], c[1], c[2]};
            cadj[d] = (c[d] == 0) ? 0 : ncells(d) - 1;
            dalpha[size_t(g.cell(cadj[0], cadj[1], cadj[2]))] += w;
          } else {
            int cw[3] = {c[0], c[1], c[2]};
            cw[d] -= 1;
            dalpha[size_t(g.cell(c[0], c[1], c[2]))] += w;
            dalpha[size_t(g.cell(cw[0], cw[1], cw[2]))] += w;
          }
        }
  }
}

inline void FluidSystem::picard(const std::vector<double>& x, PicardParts& out) const {
  const Grid& g = *g_;
  const double A = g.area, V = g.vol, h = g.h, nu = 1.0 / re_;
  const std::vector<double>& al = *alpha_;
  const int nf[3] = {g.nu, g.nv, g.nw};

  auto val = [&](int d, const int c[3]) { return x[size_t(off_[d] + face_id(d, c))]; };

  for (int d = 0; d < 3; ++d) {
    out.mom[d].resize(nf[d]);
    out.rhs[d].assign(size_t(nf[d]), 0.0);
    out.dcoef[d].assign(size_t(nf[d]), 0.0);
    const int nd = ncells(d);
    int fdim[3] = {g.nx, g.ny, g.nz};
    fdim[d] += 1;

    int c[3];
    for (c[0] = 0; c[0] < fdim[0]; ++c[0])
      for (c[1] = 0; c[1] < fdim[1]; ++c[1])
        for (c[2] = 0; c[2] < fdim[2]; ++c[2]) {
          const int fid = face_id(d, c);
          Stencil7& M = out.mom[d];
          const FaceKind kd = kind_[d][size_t(fid)];

          if (kd == FaceKind::Fixed) {
            M.diag[size_t(fid)] = 1.0;
            out.rhs[d][size_t(fid)] = 0.0;
            continue;
          }

          double diag = 0.0, rhs = 0.0;

          if (kd == FaceKind::Port) {
            const int side = (c[d] == 0) ? -1 : +1;
            int cadj[3] = {c[0], c[1], c[2]};
            cadj[d] = (side < 0) ? 0 : nd - 1;
            const int cajd = g.cell(cadj[0], cadj[1], cadj[2]);
            diag += 0.5 * V * al[size_t(cajd)];
            const double pb = pb_[d][size_t(fid)];
            const double padj = x[size_t(off_[3] + cajd)];
            rhs -= (side < 0) ? A * (padj - pb) : A * (pb - padj);

            int nbc[3] = {c[0], c[1], c[2]};
            nbc[d] -= side;
            diag += nu * A / h;
            const int leg = 2 * d + (side < 0 ? 1 : 0);
            M.off[leg][size_t(fid)] = -nu * A / h;
            M.nbr[leg][size_t(fid)] = face_id(d, nbc);

            for (int a = 0; a < 3; ++a) {
              if (a == d) continue;
              for (int s = -1; s <= 1; s += 2) {
                const bool at_boundary = (s < 0 && c[a] == 0) || (s > 0 && c[a] == ncells(a) - 1);
                if (at_boundary) {
                  if (bclass(plane_of(a, s), cadj) != BFace::Symmetry) diag += nu * A / h;
                } else {
                  int sb[3] = {c[0], c[1], c[2]};
                  sb[a] += s;
                  diag += 0.5 * nu * A / h;
                  const int tleg = 2 * a + (s > 0 ? 1 : 0);
                  M.off[tleg][size_t(fid)] = -0.5 * nu * A / h;
                  M.nbr[tleg][size_t(fid)] = face_id(d, sb);
                }
              }
            }
            M.diag[size_t(fid)] = diag;
            out.rhs[d][size_t(fid)] = rhs;
            out.dcoef[d][size_t(fid)] = A / diag;
            continue;
          }

          // interior face
          int cw[3] = {c[0], c[1], c[2]};
          cw[d] -= 1;
          const int cellW = g.cell(cw[0], cw[1], cw[2]);
          const int cellE = g.cell(c[0], c[1], c[2]);
          diag += V * 0.5 * (al[size_t(cellW)] + al[size_t(cellE)]);
          rhs -= A * (x[size_t(off_[3] + cellE)] - x[size_t(off_[3] + cellW)]);

          for (int a = 0; a < 3; ++a)
            for (int s = -1; s <= 1; s += 2) {
              const int leg = 2 * a + (s > 0 ? 1 : 0);
              if (a == d) {
                int nb[3] = {c[0], c[1], c[2]};
                nb[a] += s;
                diag += nu * A / h;
                M.off[leg][size_t(fid)] -= nu * A / h;
                M.nbr[leg][size_t(fid)] = face_id(d, nb);
              } else {
                const bool at_boundary = (s < 0 && c[a] == 0) || (s > 0 && c[a] == ncells(a) - 1);
                if (at_boundary) {
                  for (const int* cc : {cw, c})
                    if (bclass(plane_of(a, s), cc) != BFace::Symmetry) diag += nu * A / h;
                } else {
                  int nb[3] = {c[0], c[1], c[2]};
                  nb[a] += s;
                  diag += nu * A / h;
                  M.off[leg][size_t(fid)] -= nu * A / h;
                  M.nbr[leg][size_t(fid)] = face_id(d, nb);
                }
              }
            }

          // upwind convection in the matrix, limited correction in the rhs
          const double uf = val(d, c);
          for (int a = 0; a < 3; ++a) {
            const int alim = (a == d) ? nd : ncells(a) - 1;
            for (int s = -1; s <= 1; s += 2) {
              if (a != d) {
                const bool at_boundary = (s < 0 && c[a] == 0) || (s > 0 && c[a] == ncells(a) - 1);
                if (at_boundary) continue;
              }
              double m;
              if (a == d) {
                int nb[3] = {c[0], c[1], c[2]};
                nb[a] += s;
                m = 0.5 * A * (uf + val(d, nb));
              } else {
                const int ft = c[a] + (s > 0 ? 1 : 0);
                int t1[3] = {cw[0], cw[1], cw[2]};
                t1[a] = ft;
                int t2[3] = {c[0], c[1], c[2]};
                t2[a] = ft;
                m = 0.5 * A * (val(a, t1) + val(a, t2));
              }

              int lo[3] = {c[0], c[1], c[2]}, hi[3] = {c[0], c[1], c[2]};
              if (s > 0) hi[a] += 1;
              else lo[a] -= 1;
              int C[3], D[3], U[3];
              if (m >= 0.0) {
                std::copy(lo, lo + 3, C);
                std::copy(hi, hi + 3, D);
                std::copy(lo, lo + 3, U);
                U[a] -= 1;
              } else {
                std::copy(hi, hi + 3, C);
                std::copy(lo, lo + 3, D);
                std::copy(hi, hi + 3, U);
                U[a] += 1;
              }

              // implicit upwind
              const bool c_is_self = (C[0] == c[0] && C[1] == c[1] && C[2] == c[2]);
              if (c_is_self) {
                diag += s * m;
              } else {
                const int leg = 2 * a + (s > 0 ? 1 : 0);
                M.off[leg][size_t(fid)] += s * m;
                M.nbr[leg][size_t(fid)] = face_id(d, C);
              }

              // deferred correction: limited value minus upwind value
              const bool haveU = U[a] >= 0 && U[a] <= alim;
              if (haveU) {
                const double vC = val(d, C), vD = val(d, D), vU = val(d, U);
                double sl, dsda, dsdb;
                fdetail::muscl_weights(vC - vU, vD - vC, sl, dsda, dsdb);
                rhs -= s * m * 0.5 * sl;
              }
            }
          }

          M.diag[size_t(fid)] = diag;
          out.rhs[d][size_t(fid)] = rhs;
          out.dcoef[d][size_t(fid)] = A / diag;
        }
  }

  // Schur complement for pressure: D diag(M)^-1 G, SPD with port pinning
  out.schur.resize(g.ncell);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) {
        const int cc = g.cell(i, j, k);
        const int c[3] = {i, j, k};
        for (int d = 0; d < 3; ++d)
          for (int s = -1; s <= 1; s += 2) {
            int fc[3] = {c[0], c[1], c[2]};
            if (s > 0) fc[d] += 1;
            const int fidx = face_id(d, fc);
            const FaceKind kd = kind_[d][size_t(fidx)];
            if (kd == FaceKind::Fixed) continue;
            const double w = A * A / out.mom[d].diag[size_t(fidx)];
            out.schur.diag[size_t(cc)] += w;
            if (kd == FaceKind::Interior) {
              int nbcell[3] = {c[0], c[1], c[2]};
              nbcell[d] += s;
              const int leg = 2 * d + (s > 0 ? 1 : 0);
              out.schur.off[leg][size_t(cc)] -= w;
              out.schur.nbr[leg][size_t(cc)] = g.cell(nbcell[0], nbcell[1], nbcell[2]);
            }
            // port faces leave only the diagonal: boundary pressure is pinned
          }
      }
}

}  // namespace hxtopo

#endif
