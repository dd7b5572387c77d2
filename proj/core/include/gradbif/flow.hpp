#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gradbif/field.hpp"
#include "gradbif/geometry.hpp"

namespace gradbif {

/// Numerical knobs for critical-point solving and separatrix integration.
struct FlowOptions {
    double tol_root = 1e-10;        ///< |grad f_x| at a polished critical point
    double tol_degenerate = 1e-7;   ///< |eigenvalue| below this is degenerate
    double dedup_radius = 1e-6;
    int seed_resolution = 24;       ///< Newton seeds per axis
    int max_seed_refinements = 2;   ///< seed-grid doublings on census mismatch
    double delta0 = 1e-5;           ///< separatrix offset, times the local length scale
    double tol_capture = 1e-4;
    double tol_align_deg = 5.0;
    double rtol = 1e-9;
    double atol = 1e-12;
    long max_steps = 1'000'000;
};

enum class PointKind { unstable_node, saddle, stable_node, degenerate };
std::string_view to_string(PointKind kind);

struct MorseClass {
    int index = -1;  ///< number of negative eigenvalues; -1 if degenerate
    PointKind kind = PointKind::degenerate;
};

/// Morse index and flow type of a critical point under dy/dt = +grad f_x.
MorseClass classify(std::array<double, 2> eigenvalues, double tol_degenerate = 1e-7);

struct CriticalPoint {
    Vec2 position;
    std::array<double, 2> eigenvalues{};  ///< ascending
    std::array<Vec2, 2> eigenvectors{};   ///< canonically oriented, matching eigenvalues
    int morse_index = -1;
    PointKind kind = PointKind::degenerate;
    int id = -1;

    bool is_node() const { return kind == PointKind::unstable_node || kind == PointKind::stable_node; }
    bool is_saddle() const { return kind == PointKind::saddle; }
    /// Eigenvector of the positive eigenvalue of a saddle.
    Vec2 unstable_direction() const { return eigenvectors[1]; }
    Vec2 stable_direction() const { return eigenvectors[0]; }
};

struct CriticalPointSet {
    std::vector<CriticalPoint> points;
    int boundary_index = 0;   ///< winding of grad f_x along the window boundary
    int index_sum = 0;        ///< +1 per node, -1 per saddle
    bool census_consistent = false;
    bool any_degenerate = false;

    int count(PointKind kind) const;
};

/// All solutions of grad f(y) = x inside `w`, by multi-start Newton,
/// deduplicated and sorted by position; ids follow that order. The census
/// is cross-checked against the boundary winding and the seed grid is
/// refined on mismatch.
CriticalPointSet solve_critical_points(const GeneratingFunction& f, Vec2 x, const Window& w,
                                       const FlowOptions& opts = {});

/// Winding number of grad f_x along a closed loop (last point joins the first).
/// Throws std::runtime_error when the loop passes too close to a zero.
int poincare_index(const GeneratingFunction& f, Vec2 x, const Polyline& loop);

enum class Branch { unstable_plus, unstable_minus, stable_plus, stable_minus };
std::string_view to_string(Branch b);
inline bool is_unstable(Branch b) { return b == Branch::unstable_plus || b == Branch::unstable_minus; }

enum class LimitKind { node, saddle, window_exit, max_steps };

struct Limit {
    LimitKind kind = LimitKind::max_steps;
    int id = -1;  ///< critical point id for node/saddle limits
    friend bool operator==(const Limit&, const Limit&) = default;
};
std::string to_string(const Limit& l);

struct Separatrix {
    int saddle_id = -1;
    Branch branch = Branch::unstable_plus;
    Vec2 direction;       ///< initial unit direction away from the saddle
    Polyline trajectory;  ///< in integration order (backward in time for stable branches)
    Limit limit;
    long steps = 0;
    bool stopped = false;  ///< ended by a caller-supplied stop test
};

/// Early-stop test applied after each accepted step (previous point, new point).
using StepStop = std::function<bool(Vec2, Vec2)>;

/// f_x(y) = f(y) - x.y
inline double fx_value(const GeneratingFunction& f, Vec2 x, Vec2 y) { return f.eval(y) - dot(x, y); }

/// Integrates one branch of a saddle: unstable branches forward along
/// +grad f_x, stable branches backward. Stops on node capture, alignment
/// with another saddle's invariant direction, window exit, or step budget.
Separatrix integrate_branch(const GeneratingFunction& f, Vec2 x, const CriticalPoint& saddle,
                            Branch branch, const std::vector<CriticalPoint>& cps, const Window& w,
                            const FlowOptions& opts = {}, const StepStop& stop = {});

/// Builds a classified critical point at y (id left unset).
CriticalPoint make_critical_point(const GeneratingFunction& f, Vec2 y, double tol_degenerate = 1e-7);

/// Newton iteration for grad f(y) = x from `start`; nullopt if it diverges
/// or the residual stays above tol_root.
std::optional<Vec2> newton_critical_point(const GeneratingFunction& f, Vec2 x, Vec2 start,
                                          double tol_root = 1e-10, double max_radius = 1e6);

/// Four branches per saddle. Throws std::invalid_argument if `cps` holds a
/// degenerate point.
std::vector<Separatrix> separatrices(const GeneratingFunction& f, Vec2 x,
                                     const std::vector<CriticalPoint>& cps, const Window& w,
                                     const FlowOptions& opts = {});

struct PhasePortrait {
    Vec2 x;
    Window window;
    std::vector<CriticalPoint> critical_points;
    std::vector<Separatrix> separatrices;
    /// (i, j): an unstable branch of saddle i reaches saddle j
    std::vector<std::pair<int, int>> connections;
    /// (n, s): a stable branch of saddle s emanates from node n
    std::vector<std::pair<int, int>> node_saddle_lines;
    std::string signature;            ///< label-dependent, sorted branch records
    std::string canonical_signature;  ///< invariant under relabeling
    bool on_caustic = false;
    bool census_consistent = false;
    int boundary_index = 0;

    const CriticalPoint* point(int id) const;
    const Separatrix* branch(int saddle_id, Branch b) const;
    int saddle_count() const;
};

PhasePortrait portrait(const GeneratingFunction& f, Vec2 x, const Window& w,
                       const FlowOptions& opts = {});

/// Expected dimension of the space of unparametrized gradient lines from
/// `from` to `to`: u(from) - u(to) - 1 with u the number of positive
/// Hessian eigenvalues (the unstable-manifold dimension).
int moduli_dimension(const CriticalPoint& from, const CriticalPoint& to);

/// Builds both signatures of a portrait from its critical points and separatrices.
void compute_signatures(PhasePortrait& p);

}  // namespace gradbif
