#ifndef HXTOPO_CONFIG_HPP
#define HXTOPO_CONFIG_HPP

// Plain key=value case description. Every key has a default equal to the
// baseline study (counter flow in the half box at Re=100/100, Pr=7/7/3.5),
// so an empty file is a complete, runnable case. Unknown keys are errors,
// and every parse error carries the offending line number.

#include <sstream>
#include <string>

#include "hxtopo/optimizer.hpp"

namespace hxtopo {

struct CaseConfig {
  GridSpec grid{48, 12, 48, 4.0, 1.0, 4.0};
  SymmetryPlane symmetry = SymmetryPlane::YMinSym;
  FlowArrangement arrangement = FlowArrangement::Counter;
  bool custom_ports = false;  // when set, `ports` overrides the arrangement layout
  PortSet ports;
  double Re1 = 100.0, Re2 = 100.0;
  double Pr_f1 = 7.0, Pr_f2 = 7.0, Pr_s = 3.5;
  double alpha_max = 1e4, q = 0.01, s = 0.1;
  double R = 1.0 / 12.0;  // filter radius in units of L
  double beta = 0.0, eta = 0.5;
  OptimizerSettings opt;
  std::string out_dir = "out";
};

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] inline void bad(int line, const std::string& msg) {
  fail(cat("config line ", line, ": ", msg));
}

inline double parse_num(const std::string& v, const std::string& key, int line) {
  size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    bad(line, cat(key, " expects a number, got '", v, "'"));
  }
  if (trim(v.substr(used)) != "") bad(line, cat(key, " expects a number, got '", v, "'"));
  return x;
}

inline int parse_int(const std::string& v, const std::string& key, int line) {
  const double x = parse_num(v, key, line);
  const int i = int(std::lround(x));
  if (double(i) != x) bad(line, cat(key, " expects an integer, got '", v, "'"));
  return i;
}

inline double parse_pos(const std::string& v, const std::string& key, int line) {
  const double x = parse_num(v, key, line);
  if (!(x > 0.0)) bad(line, cat(key, " must be positive, got ", x));
  return x;
}

inline Plane parse_plane(const std::string& v, const std::string& key, int line) {
  if (v == "xmin") return XMin;
  if (v == "xmax") return XMax;
  if (v == "ymin") return YMin;
  if (v == "ymax") return YMax;
  if (v == "zmin") return ZMin;
  if (v == "zmax") return ZMax;
  bad(line, cat(key, " expects a plane in {xmin,xmax,ymin,ymax,zmin,zmax}, got '", v, "'"));
}

inline PortRect parse_port(const std::string& v, const std::string& key, int line) {
  std::istringstream is(v);
  std::string plane;
  PortRect r;
  if (!(is >> plane >> r.a0 >> r.a1 >> r.b0 >> r.b1))
    bad(line, cat(key, " expects 'plane a0 a1 b0 b1', got '", v, "'"));
  std::string rest;
  if (is >> rest) bad(line, cat(key, " has trailing tokens after the rectangle"));
  r.plane = parse_plane(plane, key, line);
  return r;
}

inline const char* plane_name(Plane p) {
  static const char* names[] = {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};
  return names[int(p)];
}

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace cfgdetail

inline CaseConfig parse_config(const std::string& text) {
  using namespace cfgdetail;
  CaseConfig c;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const size_t eq = s.find('=');
    if (eq == std::string::npos) bad(line, cat("expected 'key = value', got '", s, "'"));
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty()) bad(line, "empty key");
    if (val.empty()) bad(line, cat("key '", key, "' has no value"));

    if (key == "nx") c.grid.nx = parse_int(val, key, line);
    else if (key == "ny") c.grid.ny = parse_int(val, key, line);
    else if (key == "nz") c.grid.nz = parse_int(val, key, line);
    else if (key == "Lx") c.grid.Lx = parse_pos(val, key, line);
    else if (key == "Ly") c.grid.Ly = parse_pos(val, key, line);
    else if (key == "Lz") c.grid.Lz = parse_pos(val, key, line);
    else if (key == "symmetry") {
      if (val == "none") c.symmetry = SymmetryPlane::None;
      else c.symmetry = SymmetryPlane(int(parse_plane(val, key, line)));
    } else if (key == "arrangement") {
      if (val == "counter") c.arrangement = FlowArrangement::Counter;
      else if (val == "parallel") c.arrangement = FlowArrangement::Parallel;
      else if (val == "u-counter") c.arrangement = FlowArrangement::UCounter;
      else if (val == "u-parallel") c.arrangement = FlowArrangement::UParallel;
      else bad(line, cat("unknown arrangement '", val, "'"));
    } else if (key == "port.in1") { c.ports.in1 = parse_port(val, key, line); c.custom_ports = true; }
    else if (key == "port.out1") { c.ports.out1 = parse_port(val, key, line); c.custom_ports = true; }
    else if (key == "port.in2") { c.ports.in2 = parse_port(val, key, line); c.custom_ports = true; }
    else if (key == "port.out2") { c.ports.out2 = parse_port(val, key, line); c.custom_ports = true; }
    else if (key == "Re1") c.Re1 = parse_pos(val, key, line);
    else if (key == "Re2") c.Re2 = parse_pos(val, key, line);
    else if (key == "Pr_f1") c.Pr_f1 = parse_pos(val, key, line);
    else if (key == "Pr_f2") c.Pr_f2 = parse_pos(val, key, line);
    else if (key == "Pr_s") c.Pr_s = parse_pos(val, key, line);
    else if (key == "alpha_max") {
      c.alpha_max = parse_num(val, key, line);
      if (c.alpha_max < 0.0) bad(line, cat("alpha_max must be nonnegative, got ", c.alpha_max));
    } else if (key == "q") c.q = parse_pos(val, key, line);
    else if (key == "s") c.s = parse_pos(val, key, line);
    else if (key == "R") {
      c.R = parse_num(val, key, line);
      if (c.R < 0.0) bad(line, cat("R must be nonnegative, got ", c.R));
    } else if (key == "beta") c.beta = parse_num(val, key, line);
    else if (key == "eta") {
      c.eta = parse_num(val, key, line);
      if (c.eta < 0.0 || c.eta > 1.0) bad(line, cat("eta must lie in [0,1], got ", c.eta));
    } else if (key == "projection_start") {
      c.opt.projection_start = parse_int(val, key, line);
      if (c.opt.projection_start < 0) bad(line, "projection_start must be nonnegative");
    } else if (key == "move_limit") {
      c.opt.move_limit = parse_num(val, key, line);
      if (!(c.opt.move_limit > 0.0 && c.opt.move_limit <= 1.0))
        bad(line, cat("move_limit must lie in (0,1], got ", c.opt.move_limit));
    } else if (key == "max_iters") {
      c.opt.max_iters = parse_int(val, key, line);
      if (c.opt.max_iters < 1) bad(line, "max_iters must be at least 1");
    } else if (key == "conv_tol") c.opt.conv_tol = parse_pos(val, key, line);
    else if (key == "conv_window") {
      c.opt.conv_window = parse_int(val, key, line);
      if (c.opt.conv_window < 1) bad(line, "conv_window must be at least 1");
    } else if (key == "out_dir") c.out_dir = val;
    else bad(line, cat("unknown key '", key, "'"));

    if (key == "nx" || key == "ny" || key == "nz") {
      const int n = key == "nx" ? c.grid.nx : (key == "ny" ? c.grid.ny : c.grid.nz);
      if (n < 1) bad(line, cat(key, " must be at least 1, got ", n));
    }
  }
  if (c.custom_ports) {
    // a partial override would silently mix layouts, so demand all four
    auto empty = [](const PortRect& r) { return r.a1 <= r.a0 || r.b1 <= r.b0; };
    require(!empty(c.ports.in1) && !empty(c.ports.out1) && !empty(c.ports.in2) &&
                !empty(c.ports.out2),
            "config: custom ports require all four of port.in1/out1/in2/out2");
  }
  return c;
}

inline std::string render_config(const CaseConfig& c) {
  using namespace cfgdetail;
  std::ostringstream os;
  os << "nx = " << c.grid.nx << "\nny = " << c.grid.ny << "\nnz = " << c.grid.nz << "\n";
  os << "Lx = " << num(c.grid.Lx) << "\nLy = " << num(c.grid.Ly) << "\nLz = " << num(c.grid.Lz)
     << "\n";
  os << "symmetry = "
     << (c.symmetry == SymmetryPlane::None ? "none" : plane_name(Plane(int(c.symmetry)))) << "\n";
  const char* arr = c.arrangement == FlowArrangement::Counter    ? "counter"
                    : c.arrangement == FlowArrangement::Parallel ? "parallel"
                    : c.arrangement == FlowArrangement::UCounter ? "u-counter"
                                                                 : "u-parallel";
  os << "arrangement = " << arr << "\n";
  if (c.custom_ports) {
    auto port = [&](const char* key, const PortRect& r) {
      os << key << " = " << plane_name(r.plane) << " " << num(r.a0) << " " << num(r.a1) << " "
         << num(r.b0) << " " << num(r.b1) << "\n";
    };
    port("port.in1", c.ports.in1);
    port("port.out1", c.ports.out1);
    port("port.in2", c.ports.in2);
    port("port.out2", c.ports.out2);
  }
  os << "Re1 = " << num(c.Re1) << "\nRe2 = " << num(c.Re2) << "\n";
  os << "Pr_f1 = " << num(c.Pr_f1) << "\nPr_f2 = " << num(c.Pr_f2) << "\nPr_s = " << num(c.Pr_s)
     << "\n";
  os << "alpha_max = " << num(c.alpha_max) << "\nq = " << num(c.q) << "\ns = " << num(c.s) << "\n";
  os << "R = " << num(c.R) << "\nbeta = " << num(c.beta) << "\neta = " << num(c.eta) << "\n";
  os << "projection_start = " << c.opt.projection_start << "\n";
  os << "move_limit = " << num(c.opt.move_limit) << "\nmax_iters = " << c.opt.max_iters << "\n";
  os << "conv_tol = " << num(c.opt.conv_tol) << "\nconv_window = " << c.opt.conv_window << "\n";
  os << "out_dir = " << c.out_dir << "\n";
  return os.str();
}

}  // namespace hxtopo

#endif
