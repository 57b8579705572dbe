#pragma once

#include <cstddef>
#include <string>

#include "gisim/simulator.hpp"

namespace gisim {

/// Built-in binary test objects:
///   "gi"   - the letters G and I in a block font, centred
///   "disk" - a centred disk of radius width/4
ObjectScene builtin_scene(const std::string& name, std::size_t width, std::size_t height);

}  // namespace gisim
