#ifndef HXTOPO_HXTOPO_HPP
#define HXTOPO_HXTOPO_HPP

// Umbrella header: the whole pipeline from a key=value case description to
// an optimized design and its exported fields.

#include "hxtopo/design.hpp"
#include "hxtopo/io.hpp"
#include "hxtopo/presets.hpp"
#include "hxtopo/verification.hpp"

#endif
