#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gradbif/caustic.hpp"
#include "gradbif/flow.hpp"

namespace gradbif {

struct SplittingOptions {
    double tol_psi = 1e-6;
    double section_factor = 0.25;  ///< transversal half-length as a fraction of the saddle distance
    double bracket_tol = 1e-10;
    double tol_corrector = 1e-10;
    double caustic_margin = 1e-3;
    double step_min = 1e-3;
    double step_max = 1e-2;
    double fd_step = 1e-6;
    int max_vertices = 20000;
    FlowOptions flow;
};

/// Which unstable branch of the source saddle and which stable branch of
/// the target saddle meet on the transversal.
struct BranchPair {
    Branch unstable = Branch::unstable_plus;
    Branch stable = Branch::stable_plus;
    friend bool operator==(const BranchPair&, const BranchPair&) = default;
};
std::string to_string(const BranchPair& b);
inline constexpr std::array<BranchPair, 4> kBranchPairs = {{
    {Branch::unstable_plus, Branch::stable_plus},
    {Branch::unstable_plus, Branch::stable_minus},
    {Branch::unstable_minus, Branch::stable_plus},
    {Branch::unstable_minus, Branch::stable_minus},
}};

/// Continuation state of a saddle pair: tracked critical point positions
/// (i and j index into `points`) and the last selected branch directions.
struct PairContext {
    int i = -1;
    int j = -1;
    std::vector<Vec2> points;
    Vec2 dir_unstable;
    Vec2 dir_stable;

    static PairContext from_portrait(const PhasePortrait& p, int i, int j, BranchPair b);
    Vec2 source() const { return points.at(static_cast<std::size_t>(i)); }
    Vec2 target() const { return points.at(static_cast<std::size_t>(j)); }
};

struct SplittingSample {
    Vec2 x;
    int i = -1;
    int j = -1;
    BranchPair branches;
    double value = 0.0;
    bool valid = false;
    std::string reason;       ///< why the sample is invalid
    Vec2 section_a, section_b;  ///< transversal endpoints
    Vec2 cross_unstable, cross_stable;
};

/// Signed offset along the transversal between the unstable branch of
/// saddle i and the stable branch of saddle j. Saddles are followed from
/// `ctx` by Newton continuation; on success `ctx` is updated to x.
SplittingSample splitting(const GeneratingFunction& f, Vec2 x, PairContext& ctx, const Window& fiber,
                          const SplittingOptions& opts = {});

/// Same quantity read off the stored separatrix polylines of a portrait.
SplittingSample splitting_from_portrait(const PhasePortrait& p, int i, int j, BranchPair b,
                                        const SplittingOptions& opts = {});

/// Raised when a bisection probe produces an invalid splitting sample.
class InvalidSampleError : public std::runtime_error {
public:
    InvalidSampleError(double parameter, const std::string& reason)
        : std::runtime_error("invalid splitting sample at s=" + std::to_string(parameter) + ": " + reason),
          parameter_(parameter) {}
    double parameter() const { return parameter_; }

private:
    double parameter_;
};

struct LocateResult {
    Vec2 x;
    double psi = 0.0;
    double bracket = 0.0;  ///< final bracket length in the base plane
    PairContext context;
};

/// Bisection for a zero of the splitting function on [x0, x1]. Returns
/// nullopt when the end values share a sign or the final value exceeds
/// tol_psi (a jump rather than a zero). Throws std::invalid_argument for
/// x0 == x1 or a segment meeting `caustic`, InvalidSampleError otherwise.
std::optional<LocateResult> locate_on_segment(const GeneratingFunction& f, Vec2 x0, Vec2 x1,
                                              const PairContext& ctx0, const Window& fiber,
                                              const CausticCurve* caustic = nullptr,
                                              const SplittingOptions& opts = {});

enum class CurveEnd { caustic_contact, window_exit, stratum_intersection };
std::string_view to_string(CurveEnd e);

struct BifurcationCurve {
    std::pair<int, int> pair{-1, -1};  ///< ordered saddle labels (source, target)
    BranchPair branches;
    Polyline points;
    std::vector<double> psi;               ///< splitting value at each vertex
    std::vector<PairContext> contexts;     ///< tracked saddles at each vertex
    std::array<CurveEnd, 2> ends{CurveEnd::window_exit, CurveEnd::window_exit};
    bool closed = false;
    bool fold_flag = false;  ///< gradient of psi vanished during tracing
};

/// Pseudo-arclength continuation of psi = 0 from a seed in both directions.
BifurcationCurve trace_curve(const GeneratingFunction& f, Vec2 seed, const PairContext& ctx,
                             const Window& base, const Window& fiber,
                             const CausticCurve* caustic = nullptr, const SplittingOptions& opts = {});

struct Codim2Point {
    Vec2 x;
    std::pair<int, int> first;
    std::pair<int, int> second;
    int curve_a = -1;
    int curve_b = -1;
};

struct Region {
    Vec2 sample;
    std::string signature;
    int sample_count = 0;
    bool consistent = true;  ///< verification samples agree with the representative
    std::vector<Vec2> checked;
};

/// One side-by-side probe across a stratum (x_minus and x_plus straddle it).
struct CrossingWitness {
    int curve = -1;
    Vec2 x_on;
    Vec2 x_minus, x_plus;
    std::string signature_minus, signature_plus;
    std::vector<std::string> changed;  ///< branch records whose limit toggled
    bool toggle_ok = false;
    bool admissible = false;
};

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string message;
    std::vector<Vec2> witnesses;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    std::vector<std::string> notes;
    bool passed() const;
    const CheckResult* find(const std::string& name) const;
};

struct DiagramOptions {
    Window base = Window::square({0.0, 0.0}, 1.0, 64);
    Window fiber = Window::square({0.0, 0.0}, 3.0, 128);
    int workers = 0;
    std::uint64_t seed = 1;
    int region_samples = 3;
    LocusOptions locus;
    SplittingOptions splitting;
};

struct BifurcationDiagram {
    CausticCurve caustic;
    std::vector<BifurcationCurve> strata;
    std::vector<Codim2Point> codim2_points;
    std::vector<Region> regions;
    std::vector<CrossingWitness> witnesses;
    ValidationReport report;
    Window base;
    Window fiber;
    double grid_step = 0.0;
    long exclusion_checks = 0;
    long exclusion_violations = 0;
    long located_zeros = 0;
    double max_bracket = 0.0;
    std::vector<Vec2> unresolved;  ///< midpoints of grid edges with an unexplained signature change
    std::vector<std::string> warnings;
};

/// Scans the base window, locates and traces all detected strata, finds
/// codimension-2 points, samples regions and runs validate_diagram.
BifurcationDiagram assemble_diagram(const GeneratingFunction& f, const DiagramOptions& opts = {});

/// Structural checks on a diagram. With `f`, crossing witnesses are
/// recomputed; without it the stored witnesses are used.
ValidationReport validate_diagram(const BifurcationDiagram& d, const GeneratingFunction* f = nullptr,
                                  const SplittingOptions& opts = {});

/// Probes both sides of a stratum at vertex `vertex` of curve `curve`.
CrossingWitness crossing_witness(const GeneratingFunction& f, const BifurcationDiagram& d, int curve,
                                 std::size_t vertex, const SplittingOptions& opts = {});

}  // namespace gradbif
