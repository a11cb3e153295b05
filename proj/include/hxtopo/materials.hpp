#ifndef HXTOPO_MATERIALS_HPP
#define HXTOPO_MATERIALS_HPP

// Single-field material model. One density gamma encodes three states:
//   gamma = 1   fluid 1 (zero drag for fluid 1, full drag for fluid 2)
//   gamma = 0   fluid 2 (the mirror image)
//   in between  solid wall: both fluids heavily penalized, and the thermal
//               mass transitions through the solid value via a Gaussian bump
//               centered at gamma = 1/2.
// There is no mixing penalty anywhere; intermediate states price themselves
// out because they block both flows while conducting less than either fluid.

#include "hxtopo/fields.hpp"

namespace hxtopo {

struct InterpolationSettings {
  double alpha_max = 1e4;  // peak Brinkman drag
  double q = 0.01;         // convexity of the drag interpolation
  double s = 0.1;          // width of the Gaussian thermal-mass bump
  double pe_f1 = 700.0;    // Peclet numbers carried by the energy equation
  double pe_f2 = 700.0;
  double pe_s = 350.0;

  void validate() const {
    require(alpha_max >= 0.0, cat("materials: alpha_max must be nonnegative, got ", alpha_max));
    require(q > 0.0, cat("materials: q must be positive, got ", q));
    require(s > 0.0, cat("materials: s must be positive, got ", s));
    require(pe_f1 > 0.0 && pe_f2 > 0.0 && pe_s > 0.0, "materials: Peclet numbers must be positive");
  }
};

// drag felt by fluid 1: zero in its own phase, alpha_max in fluid 2's phase
inline double alpha1(double gamma, const InterpolationSettings& m) {
  return m.alpha_max * m.q * (1.0 - gamma) / (m.q + gamma);
}

inline double d_alpha1(double gamma, const InterpolationSettings& m) {
  return -m.alpha_max * m.q * (m.q + 1.0) / sq(m.q + gamma);
}

// fluid 2 sees the mirrored profile; written as alpha1(1-gamma) so the
// mirror identity holds exactly rather than through a second fit
inline double alpha2(double gamma, const InterpolationSettings& m) {
  return alpha1(1.0 - gamma, m);
}

inline double d_alpha2(double gamma, const InterpolationSettings& m) {
  return -d_alpha1(1.0 - gamma, m);
}

// thermal mass: linear blend between the fluids plus a Gaussian dip to the
// solid value at gamma = 1/2
inline double peclet(double gamma, const InterpolationSettings& m) {
  const double mean = 0.5 * (m.pe_f1 + m.pe_f2);
  return (m.pe_s - mean) * std::exp(-sq(gamma - 0.5) / (2.0 * sq(m.s))) + m.pe_f2 +
         (m.pe_f1 - m.pe_f2) * gamma;
}

inline double d_peclet(double gamma, const InterpolationSettings& m) {
  const double mean = 0.5 * (m.pe_f1 + m.pe_f2);
  return (m.pe_s - mean) * std::exp(-sq(gamma - 0.5) / (2.0 * sq(m.s))) *
             (-(gamma - 0.5) / sq(m.s)) +
         (m.pe_f1 - m.pe_f2);
}

// cellwise evaluations used by the solvers
inline std::vector<double> alpha_field(const DensityField& gamma, const InterpolationSettings& m,
                                       int fluid) {
  std::vector<double> a(gamma.size());
  for (size_t c = 0; c < gamma.size(); ++c)
    a[c] = fluid == 0 ? alpha1(gamma[c], m) : alpha2(gamma[c], m);
  return a;
}

inline std::vector<double> peclet_field(const DensityField& gamma,
                                        const InterpolationSettings& m) {
  std::vector<double> p(gamma.size());
  for (size_t c = 0; c < gamma.size(); ++c) p[c] = peclet(gamma[c], m);
  return p;
}

}  // namespace hxtopo

#endif
