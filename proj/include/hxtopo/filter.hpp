#ifndef HXTOPO_FILTER_HPP
#define HXTOPO_FILTER_HPP

// Helmholtz smoothing of the design field: gamma solves
//   -R^2 lap(gamma) + gamma = psi,  d(gamma)/dn = 0 on the boundary,
// discretized with cell-centered finite volumes. The operator is symmetric
// positive definite, so conjugate gradients converge and the adjoint of the
// smoothing map is the same solve applied to the incoming sensitivity.

#include "hxtopo/fields.hpp"

namespace hxtopo {

struct FilterSettings {
  double radius = 0.0;  // R, in domain length units; 0 disables smoothing
  double tol = 1e-10;   // relative residual for the CG solve
  int max_iter = 20000;
};

namespace detail {

// y = (vol*I + R^2 * L) x with L the Neumann FV Laplacian (positive semi-definite)
inline void filter_apply(const Grid& g, double R2, const std::vector<double>& x,
                         std::vector<double>& y) {
  const double w = R2 * g.area / g.h;  // conductance per interior face
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) {
        const int c = g.cell(i, j, k);
        double acc = g.vol * x[c];
        if (i > 0) acc += w * (x[c] - x[g.cell(i - 1, j, k)]);
        if (i < g.nx - 1) acc += w * (x[c] - x[g.cell(i + 1, j, k)]);
        if (j > 0) acc += w * (x[c] - x[g.cell(i, j - 1, k)]);
        if (j < g.ny - 1) acc += w * (x[c] - x[g.cell(i, j + 1, k)]);
        if (k > 0) acc += w * (x[c] - x[g.cell(i, j, k - 1)]);
        if (k < g.nz - 1) acc += w * (x[c] - x[g.cell(i, j, k + 1)]);
        y[c] = acc;
      }
}

inline DensityField filter_solve(const Grid& g, const DensityField& rhs_field,
                                 const FilterSettings& fs) {
  check_cell_field(g, rhs_field, "filter");
  require(fs.radius >= 0.0, "filter: radius must be nonnegative");
  if (fs.radius == 0.0) return rhs_field;

  const double R2 = fs.radius * fs.radius;
  const int n = g.ncell;
  std::vector<double> b(n), x(rhs_field), r(n), p(n), ap(n);
  for (int c = 0; c < n; ++c) b[c] = g.vol * rhs_field[c];

  filter_apply(g, R2, x, ap);
  double bnorm = 0.0;
  for (int c = 0; c < n; ++c) {
    r[c] = b[c] - ap[c];
    bnorm += b[c] * b[c];
  }
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) return DensityField(size_t(n), 0.0);

  p = r;
  double rr = dot(r, r);
  for (int it = 0; it < fs.max_iter; ++it) {
    if (std::sqrt(rr) <= fs.tol * bnorm) return x;
    filter_apply(g, R2, p, ap);
    const double alpha = rr / dot(p, ap);
    for (int c = 0; c < n; ++c) {
      x[c] += alpha * p[c];
      r[c] -= alpha * ap[c];
    }
    const double rr_new = dot(r, r);
    for (int c = 0; c < n; ++c) p[c] = r[c] + (rr_new / rr) * p[c];
    rr = rr_new;
  }
  fail(cat("filter: CG stalled above tolerance ", fs.tol, " after ", fs.max_iter, " iterations"));
}

}  // namespace detail

inline DensityField helmholtz_filter(const Grid& g, const DensityField& psi,
                                     const FilterSettings& fs) {
  return detail::filter_solve(g, psi, fs);
}

// The smoothing map is K^{-1} V with K symmetric and V = vol*I, so its
// transpose is the identical solve. Kept as a named entry point so callers
// state intent when pulling sensitivities back through the filter.
inline DensityField filter_adjoint(const Grid& g, const DensityField& dJ_dgamma,
                                   const FilterSettings& fs) {
  return detail::filter_solve(g, dJ_dgamma, fs);
}

}  // namespace hxtopo

#endif
