#ifndef HXTOPO_GRID_HPP
#define HXTOPO_GRID_HPP

// Uniform staggered Cartesian grid. Scalars (pressure, temperature, design
// density) live at cell centers; each velocity component lives on the faces
// normal to it, so component d has one extra layer of faces along d.

#include "hxtopo/core.hpp"

namespace hxtopo {

struct GridSpec {
  int nx = 0, ny = 0, nz = 0;
  double Lx = 0.0, Ly = 0.0, Lz = 0.0;
};

struct Grid {
  int nx = 0, ny = 0, nz = 0;
  double Lx = 0, Ly = 0, Lz = 0;
  double h = 0;     // uniform spacing, enforced identical in all directions
  double vol = 0;   // cell volume h^3
  double area = 0;  // face area h^2
  int ncell = 0;
  int nu = 0, nv = 0, nw = 0;  // face counts per velocity component

  bool two_d() const { return nz == 1; }

  // cell (i,j,k), k fastest
  int cell(int i, int j, int k) const { return (i * ny + j) * nz + k; }
  // x-face between cells (i-1,j,k) and (i,j,k); i in [0,nx]
  int fx(int i, int j, int k) const { return (i * ny + j) * nz + k; }
  // y-face; j in [0,ny]
  int fy(int i, int j, int k) const { return (i * (ny + 1) + j) * nz + k; }
  // z-face; k in [0,nz]
  int fz(int i, int j, int k) const { return (i * ny + j) * (nz + 1) + k; }

  double xc(int i) const { return (i + 0.5) * h; }
  double yc(int j) const { return (j + 0.5) * h; }
  double zc(int k) const { return (k + 0.5) * h; }
};

inline Grid build_grid(const GridSpec& s) {
  require(s.nx > 0 && s.ny > 0 && s.nz > 0,
          cat("grid: cell counts must be positive, got ", s.nx, "x", s.ny, "x", s.nz));
  require(s.Lx > 0 && s.Ly > 0 && s.Lz > 0,
          cat("grid: extents must be positive, got ", s.Lx, " ", s.Ly, " ", s.Lz));
  Grid g;
  g.nx = s.nx;
  g.ny = s.ny;
  g.nz = s.nz;
  g.Lx = s.Lx;
  g.Ly = s.Ly;
  g.Lz = s.Lz;
  const double hx = s.Lx / s.nx, hy = s.Ly / s.ny, hz = s.Lz / s.nz;
  const double tol = 1e-9 * hx;
  require(std::abs(hx - hy) <= tol && std::abs(hx - hz) <= tol,
          cat("grid: spacing must be uniform in all directions, got hx=", hx, " hy=", hy,
              " hz=", hz));
  g.h = hx;
  g.vol = hx * hx * hx;
  g.area = hx * hx;
  g.ncell = s.nx * s.ny * s.nz;
  g.nu = (s.nx + 1) * s.ny * s.nz;
  g.nv = s.nx * (s.ny + 1) * s.nz;
  g.nw = s.nx * s.ny * (s.nz + 1);
  return g;
}

}  // namespace hxtopo

#endif
