#ifndef HXTOPO_IO_HPP
#define HXTOPO_IO_HPP

// Result export and re-import. Fields go to legacy ASCII VTK structured
// points with one point per cell center (DIMENSIONS = cell counts, ORIGIN at
// the first center), printed with %.17g so a re-imported design reproduces
// the run bit for bit. Histories go to a fixed-column CSV.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hxtopo/optimizer.hpp"

namespace hxtopo {

struct CellVectors {
  std::vector<double> x, y, z;
};

// face velocities averaged to the cell center, for export only
inline CellVectors cell_velocity(const Grid& g, const FlowState& s) {
  CellVectors v;
  v.x.resize(size_t(g.ncell));
  v.y.resize(size_t(g.ncell));
  v.z.resize(size_t(g.ncell));
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) {
        const size_t c = size_t(g.cell(i, j, k));
        v.x[c] = 0.5 * (s.u[size_t(g.fx(i, j, k))] + s.u[size_t(g.fx(i + 1, j, k))]);
        v.y[c] = 0.5 * (s.v[size_t(g.fy(i, j, k))] + s.v[size_t(g.fy(i, j + 1, k))]);
        v.z[c] = 0.5 * (s.w[size_t(g.fz(i, j, k))] + s.w[size_t(g.fz(i, j, k + 1))]);
      }
  return v;
}

class VtkFile {
 public:
  explicit VtkFile(const Grid& g) : g_(g) {}

  void add_scalar(const std::string& name, const std::vector<double>& f) {
    check_cell_field(g_, f, name.c_str());
    scalars_.emplace_back(name, f);
  }

  void add_vector(const std::string& name, const CellVectors& v) {
    check_cell_field(g_, v.x, name.c_str());
    check_cell_field(g_, v.y, name.c_str());
    check_cell_field(g_, v.z, name.c_str());
    vectors_.emplace_back(name, v);
  }

  void write(const std::string& path) const {
    std::ofstream os(path);
    require(os.good(), cat("vtk: cannot open '", path, "' for writing"));
    char buf[32];
    auto num = [&](double x) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return std::string(buf);
    };
    os << "# vtk DataFile Version 3.0\n";
    os << "hxtopo fields\n";
    os << "ASCII\n";
    os << "DATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g_.nx << " " << g_.ny << " " << g_.nz << "\n";
    os << "ORIGIN " << num(0.5 * g_.h) << " " << num(0.5 * g_.h) << " " << num(0.5 * g_.h)
       << "\n";
    os << "SPACING " << num(g_.h) << " " << num(g_.h) << " " << num(g_.h) << "\n";
    os << "POINT_DATA " << g_.ncell << "\n";
    // VTK wants x fastest; cell storage is k fastest
    for (const auto& [name, f] : scalars_) {
      os << "SCALARS " << name << " double 1\n";
      os << "LOOKUP_TABLE default\n";
      for (int k = 0; k < g_.nz; ++k)
        for (int j = 0; j < g_.ny; ++j)
          for (int i = 0; i < g_.nx; ++i) os << num(f[size_t(g_.cell(i, j, k))]) << "\n";
    }
    for (const auto& [name, v] : vectors_) {
      os << "VECTORS " << name << " double\n";
      for (int k = 0; k < g_.nz; ++k)
        for (int j = 0; j < g_.ny; ++j)
          for (int i = 0; i < g_.nx; ++i) {
            const size_t c = size_t(g_.cell(i, j, k));
            os << num(v.x[c]) << " " << num(v.y[c]) << " " << num(v.z[c]) << "\n";
          }
    }
    os.flush();
    require(os.good(), cat("vtk: write to '", path, "' failed"));
  }

 private:
  Grid g_;
  std::vector<std::pair<std::string, std::vector<double>>> scalars_;
  std::vector<std::pair<std::string, CellVectors>> vectors_;
};

// reads one scalar field back from a file this writer produced
inline std::vector<double> read_vtk_scalar(const std::string& path, const Grid& g,
                                           const std::string& name) {
  std::ifstream is(path);
  require(is.good(), cat("vtk: cannot open '", path, "'"));
  std::string line;
  bool dims_ok = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "DIMENSIONS") {
      int nx = 0, ny = 0, nz = 0;
      ls >> nx >> ny >> nz;
      require(nx == g.nx && ny == g.ny && nz == g.nz,
              cat("vtk: '", path, "' is ", nx, "x", ny, "x", nz, ", expected ", g.nx, "x", g.ny,
                  "x", g.nz));
      dims_ok = true;
    } else if (word == "SCALARS") {
      std::string fname;
      ls >> fname;
      if (fname != name) continue;
      require(dims_ok, cat("vtk: '", path, "' has no DIMENSIONS before data"));
      std::getline(is, line);  // LOOKUP_TABLE
      std::vector<double> f(size_t(g.ncell));
      for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
          for (int i = 0; i < g.nx; ++i) {
            double x;
            require(bool(is >> x), cat("vtk: field '", name, "' in '", path, "' is truncated"));
            f[size_t(g.cell(i, j, k))] = x;
          }
      return f;
    }
  }
  fail(cat("vtk: field '", name, "' not found in '", path, "'"));
}

// everything the analysis produced for one design, in one snapshot file
inline void write_snapshot(const std::string& path, const Grid& g, const DensityField& psi,
                           const AnalysisState& st, const std::vector<double>* dJ_dpsi = nullptr) {
  VtkFile vtk(g);
  vtk.add_scalar("psi", psi);
  vtk.add_scalar("gamma", st.gamma_filt);
  vtk.add_scalar("gamma_hat", st.gamma_hat);
  vtk.add_scalar("p1", st.s1.p);
  vtk.add_scalar("p2", st.s2.p);
  vtk.add_scalar("T", st.energy.T);
  if (dJ_dpsi) vtk.add_scalar("dJ_dpsi", *dJ_dpsi);
  vtk.add_vector("velocity1", cell_velocity(g, st.s1));
  vtk.add_vector("velocity2", cell_velocity(g, st.s2));
  vtk.write(path);
}

inline std::string history_csv_header() {
  return "step,J,J1,J2,Vdot1,Vdot2,Tout1,Tout2,res1,res2";
}

inline std::string history_csv_row(const StepRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.step, r.J, r.J1,
                r.J2, r.vdot1, r.vdot2, r.tout1, r.tout2, r.res1, r.res2);
  return buf;
}

inline void write_history_csv(const std::string& path, const std::vector<StepRecord>& hist) {
  std::ofstream os(path);
  require(os.good(), cat("history: cannot open '", path, "' for writing"));
  os << history_csv_header() << "\n";
  for (const StepRecord& r : hist) os << history_csv_row(r) << "\n";
  os.flush();
  require(os.good(), cat("history: write to '", path, "' failed"));
}

}  // namespace hxtopo

#endif
