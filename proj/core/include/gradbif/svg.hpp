#pragma once

#include <string>
#include <vector>

#include "gradbif/bifurcation.hpp"
#include "gradbif/caustic.hpp"
#include "gradbif/flow.hpp"

namespace gradbif {

/// All figures use the viewBox 0 0 800 800 mapped from the plotted window
/// (y axis pointing up) and embed their own stylesheet.
std::string caustic_svg(const CausticCurve& c, const Window& base);
std::string portrait_svg(const PhasePortrait& p);
std::string diagram_svg(const BifurcationDiagram& d);
/// Overlays several caustics, one stroke class per slice.
std::string slices_svg(const std::vector<CausticCurve>& slices, const Window& base);

}  // namespace gradbif
