#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "gradbif/bifurcation.hpp"
#include "gradbif/caustic.hpp"
#include "gradbif/flow.hpp"

namespace gradbif {

using Json = nlohmann::ordered_json;

/// Rounds to a multiple of 1e-12 and maps -0 to 0, so equal runs print
/// equal bytes.
double round_fixed(double v);

Json to_json(Vec2 p);
Json to_json(const Window& w);
Json to_json(const CausticCurve& c);
Json to_json(const PhasePortrait& p);
Json to_json(const ValidationReport& r);
Json to_json(const BifurcationDiagram& d);

Window window_from_json(const Json& j);

/// Rebuilds a diagram from its document. Per-vertex saddle contexts are not
/// stored, so the result validates with the recorded witnesses only.
/// Throws std::invalid_argument on malformed input.
BifurcationDiagram diagram_from_json(const Json& j);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);

/// One row per trajectory vertex: saddle,branch,limit,index,y1,y2,fx.
std::string trajectories_csv(const PhasePortrait& p, const GeneratingFunction& f);

/// Human-readable validation summary; ends with "all checks passed" on success.
std::string report_text(const ValidationReport& r);

}  // namespace gradbif
