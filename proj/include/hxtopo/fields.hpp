#ifndef HXTOPO_FIELDS_HPP
#define HXTOPO_FIELDS_HPP

// Cell-centered fields are flat vectors indexed by Grid::cell. The design
// density psi and its filtered/projected forms all use the same layout.

#include <vector>

#include "hxtopo/grid.hpp"

namespace hxtopo {

using DensityField = std::vector<double>;

inline DensityField make_cell_field(const Grid& g, double value = 0.0) {
  return DensityField(size_t(g.ncell), value);
}

inline void check_cell_field(const Grid& g, const DensityField& f, const char* what) {
  require(int(f.size()) == g.ncell, cat(what, ": field size ", f.size(),
                                        " does not match cell count ", g.ncell));
}

}  // namespace hxtopo

#endif
