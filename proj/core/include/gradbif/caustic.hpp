#pragma once

#include <string>
#include <vector>

#include "gradbif/field.hpp"
#include "gradbif/geometry.hpp"

namespace gradbif {

struct LocusOptions {
    double tol_locus = 1e-9;      ///< |det Hess f| bound after Newton refinement
    double tol_singular = 1e-12;  ///< |det| bound for singular points of the locus
    /// Fractional shift of interior grid lines; keeps symmetric loci off grid nodes.
    double grid_jitter = 0.0731;
    int workers = 0;
};

/// Zero set of det Hess f inside a fiber window.
struct CriticalLocus {
    std::vector<Polyline> components;
    std::vector<bool> closed;
    /// Isolated zeros of det Hess f (no sign change around them).
    std::vector<Vec2> degenerate_points;
    /// Singular points where several branches of the locus meet.
    std::vector<Vec2> junctions;
    bool coarse_warning = false;
    std::vector<std::string> warnings;
};

enum class CausticLabel { fold, cusp, non_morse };
std::string_view to_string(CausticLabel label);

/// Image of the critical locus under the Lagrangian map.
struct CausticCurve {
    std::vector<Polyline> components;  ///< base-plane polylines
    std::vector<bool> closed;
    std::vector<Polyline> preimages;   ///< fiber polylines, vertex-aligned with components
    std::vector<std::vector<CausticLabel>> labels;  ///< empty until classified
    std::vector<Vec2> cusp_points;
    std::vector<Vec2> cusp_preimages;
    std::vector<Vec2> non_morse_points;
    bool coarse_warning = false;
    std::vector<std::string> warnings;

    bool labeled() const { return labels.size() == components.size() && !components.empty(); }
    int cusp_count() const { return static_cast<int>(cusp_points.size()); }
    bool empty() const { return components.empty() && non_morse_points.empty(); }
    /// Distance from a base point to the nearest caustic arc or non-Morse point.
    double distance_to(Vec2 x) const;
};

/// Contours det Hess f = 0 over `w` with marching squares and Newton-refines
/// every vertex. Throws std::invalid_argument for invalid windows.
CriticalLocus critical_locus(const GeneratingFunction& f, const Window& w,
                             const LocusOptions& opts = {});

/// Maps every locus vertex through y -> grad f(y); labels are left unset.
CausticCurve push_forward(const GeneratingFunction& f, const CriticalLocus& locus);

/// Pushes the locus forward and labels vertices fold / cusp / non-Morse.
/// Cusps are where the Hessian kernel is tangent to the locus; each is
/// refined along its polyline edge and inserted as a vertex.
CausticCurve classify_caustic(const GeneratingFunction& f, const CriticalLocus& locus,
                              const LocusOptions& opts = {});

/// critical_locus followed by classify_caustic.
CausticCurve compute_caustic(const GeneratingFunction& f, const Window& w,
                             const LocusOptions& opts = {});

/// Caustics of the slices y1^3/3 - y1*y2^2 + t*y1^2 of the 3D elliptic umbilic.
std::vector<CausticCurve> pyramid_slices(const std::vector<double>& t_values,
                                         const Window& w = Window::square({0.0, 0.0}, 2.0, 128),
                                         const LocusOptions& opts = {});

/// Newton projection of y onto det Hess f = 0 along the gradient of det.
Vec2 project_to_locus(const GeneratingFunction& f, Vec2 y, int max_iter = 60);

}  // namespace gradbif
