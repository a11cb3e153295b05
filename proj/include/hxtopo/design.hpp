#ifndef HXTOPO_DESIGN_HPP
#define HXTOPO_DESIGN_HPP

// Straight-channel reference design: each fluid's inlet rectangle is
// extruded along x into a prismatic duct to its outlet, everything else is
// solid, and wherever the two ducts would touch, one cell layer on the
// fluid-2 side is converted to solid so a wall always separates them.

#include "hxtopo/fields.hpp"
#include "hxtopo/patches.hpp"

namespace hxtopo {

inline DensityField reference_design(const Grid& g, const PortSet& ports, FlowArrangement arr) {
  require(arr == FlowArrangement::Counter || arr == FlowArrangement::Parallel,
          "reference design: U arrangements have no straight inlet-to-outlet path");
  auto aligned = [](const PortRect& a, const PortRect& b) {
    return a.a0 == b.a0 && a.a1 == b.a1 && a.b0 == b.b0 && a.b1 == b.b1;
  };
  require(ports.in1.plane <= XMax && ports.out1.plane <= XMax && ports.in2.plane <= XMax &&
              ports.out2.plane <= XMax,
          "reference design: ports must sit on x planes");
  require(aligned(ports.in1, ports.out1) && aligned(ports.in2, ports.out2),
          "reference design: inlet and outlet rectangles must match per fluid");

  auto band = [&](double lo, double hi, int n, const char* what) {
    const int a = detail::snap_index(lo, g.h, n, what);
    const int b = detail::snap_index(hi, g.h, n, what);
    require(b > a, cat("reference design: ", what, " band is empty after snapping"));
    return std::pair<int, int>(a, b);
  };
  const auto [j10, j11] = band(ports.in1.a0, ports.in1.a1, g.ny, "fluid-1 y");
  const auto [k10, k11] = band(ports.in1.b0, ports.in1.b1, g.nz, "fluid-1 z");
  const auto [j20, j21] = band(ports.in2.a0, ports.in2.a1, g.ny, "fluid-2 y");
  const auto [k20, k21] = band(ports.in2.b0, ports.in2.b1, g.nz, "fluid-2 z");

  DensityField psi(size_t(g.ncell), 0.5);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) {
        const bool f1 = j >= j10 && j < j11 && k >= k10 && k < k11;
        const bool f2 = j >= j20 && j < j21 && k >= k20 && k < k21;
        require(!(f1 && f2), "reference design: port rectangles overlap");
        if (f1) psi[size_t(g.cell(i, j, k))] = 1.0;
        if (f2) psi[size_t(g.cell(i, j, k))] = 0.0;
      }

  // separating wall: demote fluid-2 cells that touch fluid 1 face-on
  DensityField out = psi;
  auto is1 = [&](int i, int j, int k) {
    if (i < 0 || i >= g.nx || j < 0 || j >= g.ny || k < 0 || k >= g.nz) return false;
    return psi[size_t(g.cell(i, j, k))] == 1.0;
  };
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) {
        if (psi[size_t(g.cell(i, j, k))] != 0.0) continue;
        if (is1(i - 1, j, k) || is1(i + 1, j, k) || is1(i, j - 1, k) || is1(i, j + 1, k) ||
            is1(i, j, k - 1) || is1(i, j, k + 1))
          out[size_t(g.cell(i, j, k))] = 0.5;
      }
  return out;
}

}  // namespace hxtopo

#endif
