#ifndef HXTOPO_PATCHES_HPP
#define HXTOPO_PATCHES_HPP

// Boundary decomposition of the box into walls, an optional symmetry plane,
// and the four flow ports (inlet/outlet per fluid). Ports are axis-aligned
// rectangles on boundary planes, snapped to whole cell faces. Every boundary
// face belongs to exactly one class; overlaps are configuration errors.

#include <array>
#include <vector>

#include "hxtopo/grid.hpp"

namespace hxtopo {

enum Plane : int { XMin = 0, XMax, YMin, YMax, ZMin, ZMax };

enum class BFace : uint8_t { Wall = 0, Symmetry, In1, Out1, In2, Out2 };

enum class SymmetryPlane : int { None = -1, XMinSym = 0, XMaxSym, YMinSym, YMaxSym, ZMinSym, ZMaxSym };

enum class FlowArrangement { Counter, Parallel, UCounter, UParallel };

// Rectangle on a boundary plane. (a0,a1) and (b0,b1) are half-open intervals
// along the two tangential axes taken in (x,y,z) order with the normal skipped.
struct PortRect {
  Plane plane = XMin;
  double a0 = 0, a1 = 0, b0 = 0, b1 = 0;
};

struct PortSet {
  PortRect in1, out1, in2, out2;
};

// One port face: which velocity component, its face index, the adjacent
// interior cell, and the sign of the outward normal along that component.
struct PortFaceRef {
  int comp = 0;  // 0=u, 1=v, 2=w
  int face = 0;
  int cell = 0;
  int sign = 0;  // +1 on a max plane, -1 on a min plane
};

struct BoundaryPatches {
  int nx = 0, ny = 0, nz = 0;
  SymmetryPlane sym = SymmetryPlane::None;
  // classification per plane; x planes indexed j*nz+k, y planes i*nz+k, z planes i*ny+j
  std::array<std::vector<BFace>, 6> cls;
  std::vector<PortFaceRef> in1, out1, in2, out2;

  BFace at(int plane, int a, int b) const {
    const int stride = (plane <= XMax) ? nz : (plane <= YMax ? nz : ny);
    return cls[plane][a * stride + b];
  }

  const std::vector<PortFaceRef>& inlet(int fluid) const { return fluid == 0 ? in1 : in2; }
  const std::vector<PortFaceRef>& outlet(int fluid) const { return fluid == 0 ? out1 : out2; }

  bool owns(BFace f, int fluid) const {
    return fluid == 0 ? (f == BFace::In1 || f == BFace::Out1)
                      : (f == BFace::In2 || f == BFace::Out2);
  }
};

namespace detail {

inline int plane_count(const Grid& g, int p) {
  if (p <= XMax) return g.ny * g.nz;
  if (p <= YMax) return g.nx * g.nz;
  return g.nx * g.ny;
}

// snap a physical coordinate to the nearest face index along an axis
inline int snap_index(double x, double h, int n, const char* what) {
  const int i = int(std::lround(x / h));
  require(i >= 0 && i <= n, cat("ports: ", what, " coordinate ", x, " is outside the domain"));
  return i;
}

inline PortFaceRef make_ref(const Grid& g, int plane, int a, int b) {
  PortFaceRef r;
  const int side = plane % 2;
  r.sign = side ? +1 : -1;
  switch (plane / 2) {
    case 0:
      r.comp = 0;
      r.face = g.fx(side ? g.nx : 0, a, b);
      r.cell = g.cell(side ? g.nx - 1 : 0, a, b);
      break;
    case 1:
      r.comp = 1;
      r.face = g.fy(a, side ? g.ny : 0, b);
      r.cell = g.cell(a, side ? g.ny - 1 : 0, b);
      break;
    default:
      r.comp = 2;
      r.face = g.fz(a, b, side ? g.nz : 0);
      r.cell = g.cell(a, b, side ? g.nz - 1 : 0);
      break;
  }
  return r;
}

inline void mark_port(const Grid& g, BoundaryPatches& bp, const PortRect& r, BFace tag,
                      std::vector<PortFaceRef>& out, const char* name) {
  // bounds along the two tangential axes of r.plane
  int na, nb;
  if (r.plane <= XMax) {
    na = g.ny;
    nb = g.nz;
  } else if (r.plane <= YMax) {
    na = g.nx;
    nb = g.nz;
  } else {
    na = g.nx;
    nb = g.ny;
  }
  const int a0 = snap_index(r.a0, g.h, na, name);
  const int a1 = snap_index(r.a1, g.h, na, name);
  const int b0 = snap_index(r.b0, g.h, nb, name);
  const int b1 = snap_index(r.b1, g.h, nb, name);
  require(a1 > a0 && b1 > b0, cat("ports: ", name, " rectangle is empty after snapping"));
  const int stride = (r.plane <= XMax) ? g.nz : (r.plane <= YMax ? g.nz : g.ny);
  for (int a = a0; a < a1; ++a)
    for (int b = b0; b < b1; ++b) {
      BFace& c = bp.cls[r.plane][a * stride + b];
      require(c == BFace::Wall, cat("ports: ", name, " overlaps another port or the symmetry plane"));
      c = tag;
      out.push_back(make_ref(g, r.plane, a, b));
    }
}

}  // namespace detail

inline BoundaryPatches resolve_patches(const Grid& g, const PortSet& ports,
                                       SymmetryPlane sym = SymmetryPlane::None) {
  BoundaryPatches bp;
  bp.nx = g.nx;
  bp.ny = g.ny;
  bp.nz = g.nz;
  bp.sym = sym;
  for (int p = 0; p < 6; ++p) bp.cls[p].assign(detail::plane_count(g, p), BFace::Wall);

  // in 2D the z planes act as symmetry planes and accept no ports
  if (g.two_d()) {
    for (auto& c : bp.cls[ZMin]) c = BFace::Symmetry;
    for (auto& c : bp.cls[ZMax]) c = BFace::Symmetry;
    require(sym != SymmetryPlane::ZMinSym && sym != SymmetryPlane::ZMaxSym,
            "patches: z symmetry is implicit when nz=1");
  }
  if (sym != SymmetryPlane::None)
    for (auto& c : bp.cls[int(sym)]) c = BFace::Symmetry;

  detail::mark_port(g, bp, ports.in1, BFace::In1, bp.in1, "fluid-1 inlet");
  detail::mark_port(g, bp, ports.out1, BFace::Out1, bp.out1, "fluid-1 outlet");
  detail::mark_port(g, bp, ports.in2, BFace::In2, bp.in2, "fluid-2 inlet");
  detail::mark_port(g, bp, ports.out2, BFace::Out2, bp.out2, "fluid-2 outlet");
  return bp;
}

// Default port layout. Fluid 1 always runs left to right along x: inlet on
// XMin, outlet on XMax, in the lower-y band. Fluid 2 occupies the upper-y
// band; its routing depends on the arrangement:
//   Counter    in on XMax, out on XMin (opposes fluid 1)
//   Parallel   in on XMin, out on XMax (tracks fluid 1)
//   UCounter   both on XMax, split along z (enters facing the fluid-1 outlet)
//   UParallel  both on XMin, split along z (enters beside the fluid-1 inlet)
inline PortSet default_ports(const Grid& g, FlowArrangement arr) {
  PortSet p;
  const double y10 = g.Ly / 6.0, y11 = g.Ly / 2.0;       // fluid-1 band
  const double y20 = g.Ly / 2.0, y21 = 5.0 * g.Ly / 6.0; // fluid-2 band
  const double z0 = g.Lz / 3.0, z1 = 2.0 * g.Lz / 3.0;   // shared central z band
  const double zin = g.Lz / 6.0, zmid = g.Lz / 2.0, zout = 5.0 * g.Lz / 6.0;  // U split

  p.in1 = {XMin, y10, y11, z0, z1};
  p.out1 = {XMax, y10, y11, z0, z1};
  switch (arr) {
    case FlowArrangement::Counter:
      p.in2 = {XMax, y20, y21, z0, z1};
      p.out2 = {XMin, y20, y21, z0, z1};
      break;
    case FlowArrangement::Parallel:
      p.in2 = {XMin, y20, y21, z0, z1};
      p.out2 = {XMax, y20, y21, z0, z1};
      break;
    case FlowArrangement::UCounter:
      p.in2 = {XMax, y20, y21, zin, zmid};
      p.out2 = {XMax, y20, y21, zmid, zout};
      break;
    case FlowArrangement::UParallel:
      p.in2 = {XMin, y20, y21, zin, zmid};
      p.out2 = {XMin, y20, y21, zmid, zout};
      break;
  }
  return p;
}

// Degenerate single-fluid layout for verification ducts: the whole x- plane
// feeds the chosen fluid, the whole x+ plane drains it, every other boundary
// is a wall. The idle fluid has no ports and stays at rest.
inline BoundaryPatches duct_patches(const Grid& g, int fluid = 0) {
  BoundaryPatches bp;
  bp.nx = g.nx;
  bp.ny = g.ny;
  bp.nz = g.nz;
  for (int p = 0; p < 6; ++p) bp.cls[p].assign(detail::plane_count(g, p), BFace::Wall);
  if (g.two_d()) {
    for (auto& c : bp.cls[ZMin]) c = BFace::Symmetry;
    for (auto& c : bp.cls[ZMax]) c = BFace::Symmetry;
  }
  auto& inlet = fluid == 0 ? bp.in1 : bp.in2;
  auto& outlet = fluid == 0 ? bp.out1 : bp.out2;
  const BFace in_tag = fluid == 0 ? BFace::In1 : BFace::In2;
  const BFace out_tag = fluid == 0 ? BFace::Out1 : BFace::Out2;
  for (int j = 0; j < g.ny; ++j)
    for (int k = 0; k < g.nz; ++k) {
      bp.cls[XMin][j * g.nz + k] = in_tag;
      bp.cls[XMax][j * g.nz + k] = out_tag;
      inlet.push_back(detail::make_ref(g, XMin, j, k));
      outlet.push_back(detail::make_ref(g, XMax, j, k));
    }
  return bp;
}

}  // namespace hxtopo

#endif
