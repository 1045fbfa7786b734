#pragma once

#include <string>
#include <vector>

#include "circorb/generator_system.hpp"

namespace circorb {

// Static SVG of the generator graphs over a unit-square viewport with the given
// points marked on the horizontal axis and the designated points marked apart.
// Line systems are drawn over a window spanning the marked points.
std::string render_svg(const GeneratorSystem& system, const std::vector<Rational>& points);

}  // namespace circorb
