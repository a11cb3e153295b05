#ifndef HXTOPO_LINALG_HPP
#define HXTOPO_LINALG_HPP

// Linear-solver kit for the staggered solvers. Structured 7-point systems
// (momentum sweeps, pressure corrections, Schur complements) get dedicated
// storage and hand-rolled SGS/CG; general sparse systems go through Eigen.
// FGMRES is written out here because the flexible variant (changing
// preconditioner per iteration) is not part of Eigen's stable API.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>

#include "hxtopo/core.hpp"

namespace hxtopo {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// 7-point operator on a structured index set: diag plus one coefficient per
// signed axis direction (0:x- 1:x+ 2:y- 3:y+ 4:z- 5:z+). nbr[k][i] < 0 marks
// a missing neighbor. Row i reads: diag[i]*x[i] + sum_k off[k][i]*x[nbr[k][i]].
struct Stencil7 {
  int n = 0;
  std::vector<double> diag;
  std::array<std::vector<double>, 6> off;
  std::array<std::vector<int>, 6> nbr;

  void resize(int size) {
    n = size;
    diag.assign(size_t(size), 0.0);
    for (int k = 0; k < 6; ++k) {
      off[k].assign(size_t(size), 0.0);
      nbr[k].assign(size_t(size), -1);
    }
  }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    for (int i = 0; i < n; ++i) {
      double acc = diag[i] * x[i];
      for (int k = 0; k < 6; ++k)
        if (nbr[k][i] >= 0) acc += off[k][i] * x[size_t(nbr[k][i])];
      y[i] = acc;
    }
  }

  // one symmetric Gauss-Seidel pass (forward then backward)
  void sgs_sweep(const std::vector<double>& b, std::vector<double>& x, bool transpose) const {
    auto relax_row = [&](int i) {
      double acc = b[i];
      for (int k = 0; k < 6; ++k) {
        const int j = nbr[k][i];
        if (j < 0) continue;
        // transpose swaps the role of the off-diagonal: coefficient stored on
        // the neighbor's opposite leg applies to this row
        const double c = transpose ? off[k ^ 1][j] : off[k][i];
        acc -= c * x[size_t(j)];
      }
      x[size_t(i)] = acc / diag[i];
    };
    for (int i = 0; i < n; ++i) relax_row(i);
    for (int i = n - 1; i >= 0; --i) relax_row(i);
  }
};

// CG with Jacobi scaling for SPD 7-point systems. Returns iterations used,
// or -1 when the target was not reached.
inline int stencil_cg(const Stencil7& A, const std::vector<double>& b, std::vector<double>& x,
                      double rel_tol, int max_iter) {
  const int n = A.n;
  std::vector<double> r(n), z(n), p(n), ap(n);
  A.apply(x, ap);
  double bnorm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    r[i] = b[i] - ap[i];
    bnorm2 += b[i] * b[i];
  }
  if (bnorm2 == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return 0;
  }
  const double target2 = rel_tol * rel_tol * bnorm2;
  auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (int i = 0; i < n; ++i) out[i] = in[i] / A.diag[i];
  };
  precond(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    double rr = dot(r, r);
    if (rr <= target2) return it;
    A.apply(p, ap);
    const double alpha = rz / dot(p, ap);
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    precond(r, z);
    const double rz_new = dot(r, z);
    for (int i = 0; i < n; ++i) p[i] = z[i] + (rz_new / rz) * p[i];
    rz = rz_new;
  }
  double rr = dot(r, r);
  return rr <= target2 ? max_iter : -1;
}

// Flexible GMRES with right preconditioning: solves A x = b given callables
// apply(x, y) for y = A x and precond(r, z) for z ~= A^{-1} r. The
// preconditioner may be nonlinear/iterative, hence the stored Z basis.
struct FgmresResult {
  bool converged = false;
  int iters = 0;
  double rel_res = 1.0;
};

template <class Apply, class Precond>
FgmresResult fgmres(int n, Apply&& apply, Precond&& precond, const std::vector<double>& b,
                    std::vector<double>& x, double rel_tol, int restart, int max_iter) {
  std::vector<std::vector<double>> V, Z;
  std::vector<double> w(n), r(n);
  FgmresResult out;

  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    out.converged = true;
    out.rel_res = 0.0;
    return out;
  }

  int total = 0;
  while (total < max_iter) {
    apply(x, w);
    for (int i = 0; i < n; ++i) r[i] = b[i] - w[i];
    double beta = std::sqrt(dot(r, r));
    out.rel_res = beta / bnorm;
    if (out.rel_res <= rel_tol) {
      out.converged = true;
      return out;
    }

    const int m = std::min(restart, max_iter - total);
    V.assign(1, r);
    for (double& v : V[0]) v /= beta;
    Z.clear();
    // Hessenberg factors updated by Givens rotations
    std::vector<std::vector<double>> H(size_t(m + 1), std::vector<double>(size_t(m), 0.0));
    std::vector<double> cs(size_t(m), 0.0), sn(size_t(m), 0.0), g(size_t(m + 1), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m; ++k) {
      Z.emplace_back(n);
      precond(V[size_t(k)], Z.back());
      apply(Z.back(), w);
      for (int i = 0; i <= k; ++i) {
        const double hik = dot(w, V[size_t(i)]);
        H[size_t(i)][size_t(k)] = hik;
        for (int j = 0; j < n; ++j) w[j] -= hik * V[size_t(i)][j];
      }
      const double hnext = std::sqrt(dot(w, w));
      H[size_t(k + 1)][size_t(k)] = hnext;

      for (int i = 0; i < k; ++i) {
        const double t = cs[size_t(i)] * H[size_t(i)][size_t(k)] + sn[size_t(i)] * H[size_t(i) + 1][size_t(k)];
        H[size_t(i) + 1][size_t(k)] =
            -sn[size_t(i)] * H[size_t(i)][size_t(k)] + cs[size_t(i)] * H[size_t(i) + 1][size_t(k)];
        H[size_t(i)][size_t(k)] = t;
      }
      const double denom = std::hypot(H[size_t(k)][size_t(k)], hnext);
      if (denom == 0.0) break;
      cs[size_t(k)] = H[size_t(k)][size_t(k)] / denom;
      sn[size_t(k)] = hnext / denom;
      H[size_t(k)][size_t(k)] = denom;
      g[size_t(k + 1)] = -sn[size_t(k)] * g[size_t(k)];
      g[size_t(k)] = cs[size_t(k)] * g[size_t(k)];
      ++total;

      out.iters = total;
      out.rel_res = std::abs(g[size_t(k + 1)]) / bnorm;
      if (out.rel_res <= rel_tol || hnext == 0.0) {
        ++k;
        break;
      }
      if (total >= max_iter) {
        ++k;
        break;
      }
      V.emplace_back(w);
      for (double& v : V.back()) v /= hnext;
    }

    // back-substitute and update x through the preconditioned basis
    std::vector<double> y(size_t(k), 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double acc = g[size_t(i)];
      for (int j = i + 1; j < k; ++j) acc -= H[size_t(i)][size_t(j)] * y[size_t(j)];
      y[size_t(i)] = acc / H[size_t(i)][size_t(i)];
    }
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < n; ++j) x[j] += y[size_t(i)] * Z[size_t(i)][j];

    if (out.rel_res <= rel_tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

inline void spmv(const SpMat& A, const std::vector<double>& x, std::vector<double>& y) {
  Eigen::Map<const Eigen::VectorXd> xm(x.data(), long(x.size()));
  Eigen::Map<Eigen::VectorXd> ym(y.data(), long(y.size()));
  ym = A * xm;
}

}  // namespace hxtopo

#endif
