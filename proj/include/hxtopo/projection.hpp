#ifndef HXTOPO_PROJECTION_HPP
#define HXTOPO_PROJECTION_HPP

// Smoothed threshold pushing the filtered density toward 0/1:
//   proj(g) = (tanh(beta*eta) + tanh(beta*(g-eta))) / (tanh(beta*eta) + tanh(beta*(1-eta)))
// Monotone, fixes 0 and 1, and tends to the identity as beta -> 0.

#include "hxtopo/fields.hpp"

namespace hxtopo {

inline double project_value(double gamma, double beta, double eta) {
  if (beta <= 0.0) return gamma;
  const double den = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  return (std::tanh(beta * eta) + std::tanh(beta * (gamma - eta))) / den;
}

inline double project_derivative_value(double gamma, double beta, double eta) {
  if (beta <= 0.0) return 1.0;
  const double den = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  const double c = std::cosh(beta * (gamma - eta));
  return beta / (c * c * den);
}

inline void check_projection(double beta, double eta) {
  require(beta >= 0.0, cat("projection: beta must be nonnegative, got ", beta));
  require(eta > 0.0 && eta < 1.0, cat("projection: eta must lie in (0,1), got ", eta));
}

inline DensityField project(const Grid& g, const DensityField& gamma, double beta, double eta) {
  check_cell_field(g, gamma, "project");
  check_projection(beta, eta);
  DensityField out(gamma.size());
  for (size_t c = 0; c < gamma.size(); ++c) out[c] = project_value(gamma[c], beta, eta);
  return out;
}

inline DensityField project_derivative(const Grid& g, const DensityField& gamma, double beta,
                                       double eta) {
  check_cell_field(g, gamma, "project_derivative");
  check_projection(beta, eta);
  DensityField out(gamma.size());
  for (size_t c = 0; c < gamma.size(); ++c)
    out[c] = project_derivative_value(gamma[c], beta, eta);
  return out;
}

}  // namespace hxtopo

#endif
