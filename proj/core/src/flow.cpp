#include "gradbif/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gradbif/ode.hpp"

namespace gradbif {

std::string_view to_string(PointKind kind) {
    switch (kind) {
        case PointKind::unstable_node: return "unstable-node";
        case PointKind::saddle: return "saddle";
        case PointKind::stable_node: return "stable-node";
        case PointKind::degenerate: return "degenerate";
    }
    return "unknown";
}

std::string_view to_string(Branch b) {
    switch (b) {
        case Branch::unstable_plus: return "u+";
        case Branch::unstable_minus: return "u-";
        case Branch::stable_plus: return "s+";
        case Branch::stable_minus: return "s-";
    }
    return "?";
}

std::string to_string(const Limit& l) {
    switch (l.kind) {
        case LimitKind::node: return "node(" + std::to_string(l.id) + ")";
        case LimitKind::saddle: return "saddle(" + std::to_string(l.id) + ")";
        case LimitKind::window_exit: return "window-exit";
        case LimitKind::max_steps: return "max-steps";
    }
    return "?";
}

MorseClass classify(std::array<double, 2> eigenvalues, double tol_degenerate) {
    if (std::abs(eigenvalues[0]) < tol_degenerate || std::abs(eigenvalues[1]) < tol_degenerate) {
        return {-1, PointKind::degenerate};
    }
    const int negatives = (eigenvalues[0] < 0.0) + (eigenvalues[1] < 0.0);
    static constexpr PointKind kinds[3] = {PointKind::unstable_node, PointKind::saddle,
                                           PointKind::stable_node};
    return {negatives, kinds[negatives]};
}

int CriticalPointSet::count(PointKind kind) const {
    return static_cast<int>(std::count_if(points.begin(), points.end(),
                                          [&](const CriticalPoint& p) { return p.kind == kind; }));
}

namespace {

Vec2 canonical_orientation(Vec2 v) {
    if (std::abs(v.x) < 1e-14) v.x = 0.0;
    if (std::abs(v.y) < 1e-14) v.y = 0.0;
    return (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) ? -v : v;
}

double quantize(double v) { return std::round(v * 1e9) / 1e9; }

std::vector<CriticalPoint> find_roots(const GeneratingFunction& f, Vec2 x, const Window& w,
                                      const FlowOptions& opts, int seeds_per_axis) {
    std::vector<Vec2> roots;
    const double box = 3.0 * std::max(w.half_width1, w.half_width2);
    for (int j = 0; j < seeds_per_axis; ++j) {
        for (int i = 0; i < seeds_per_axis; ++i) {
            const Vec2 seed{w.lo1() + (i + 0.5) * 2.0 * w.half_width1 / seeds_per_axis,
                            w.lo2() + (j + 0.5) * 2.0 * w.half_width2 / seeds_per_axis};
            const auto root = newton_critical_point(f, x, seed, opts.tol_root, box);
            if (!root || !w.contains(*root)) continue;
            const bool dup = std::any_of(roots.begin(), roots.end(), [&](Vec2 r) {
                return distance(r, *root) < opts.dedup_radius;
            });
            if (!dup) roots.push_back(*root);
        }
    }
    std::sort(roots.begin(), roots.end(), [](Vec2 a, Vec2 b) {
        return std::pair(quantize(a.x), quantize(a.y)) < std::pair(quantize(b.x), quantize(b.y));
    });
    std::vector<CriticalPoint> out;
    for (Vec2 r : roots) {
        CriticalPoint cp = make_critical_point(f, r, opts.tol_degenerate);
        cp.id = static_cast<int>(out.size());
        out.push_back(cp);
    }
    return out;
}

double wrap_angle(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

double winding_along(const GeneratingFunction& f, Vec2 x, Vec2 a, Vec2 b, Vec2 va, Vec2 vb, int depth) {
    const double da = wrap_angle(std::atan2(vb.y, vb.x) - std::atan2(va.y, va.x));
    if (std::abs(da) < 0.5 * std::numbers::pi) return da;
    if (depth >= 40) throw std::runtime_error("poincare_index: loop passes too close to a zero");
    const Vec2 m = 0.5 * (a + b);
    const Vec2 vm = f.gradient(m) - x;
    if (norm(vm) == 0.0) throw std::runtime_error("poincare_index: zero of the field on the loop");
    return winding_along(f, x, a, m, va, vm, depth + 1) + winding_along(f, x, m, b, vm, vb, depth + 1);
}

}  // namespace

std::optional<Vec2> newton_critical_point(const GeneratingFunction& f, Vec2 x, Vec2 y, double tol_root,
                                          double max_radius) {
    const Vec2 origin = y;
    Vec2 residual = f.gradient(y) - x;
    for (int it = 0; it < 60; ++it) {
        const auto step = solve(f.hessian(y), residual);
        if (!step) return std::nullopt;
        double alpha = 1.0;
        Vec2 trial = y - *step;
        Vec2 trial_res = f.gradient(trial) - x;
        while (norm(trial_res) >= norm(residual) && alpha > 1e-4) {
            alpha *= 0.5;
            trial = y - alpha * *step;
            trial_res = f.gradient(trial) - x;
        }
        if (norm(trial_res) >= norm(residual)) break;  // stagnated: converged or no nearby root
        y = trial;
        residual = trial_res;
        if (distance(y, origin) > max_radius) return std::nullopt;
        if (norm(alpha * *step) <= 1e-14 * (1.0 + norm(y))) break;
    }
    if (!(norm(residual) <= tol_root)) return std::nullopt;
    return y;
}

CriticalPoint make_critical_point(const GeneratingFunction& f, Vec2 y, double tol_degenerate) {
    CriticalPoint cp;
    cp.position = y;
    const SymEigen e = eigen(f.hessian(y));
    cp.eigenvalues = e.values;
    cp.eigenvectors = {canonical_orientation(e.vectors[0]), canonical_orientation(e.vectors[1])};
    const MorseClass mc = classify(e.values, tol_degenerate);
    cp.morse_index = mc.index;
    cp.kind = mc.kind;
    return cp;
}

int poincare_index(const GeneratingFunction& f, Vec2 x, const Polyline& loop) {
    if (loop.size() < 3) throw std::invalid_argument("poincare_index: loop needs at least 3 points");
    double total = 0.0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
        const Vec2 a = loop[k];
        const Vec2 b = loop[(k + 1) % loop.size()];
        const Vec2 va = f.gradient(a) - x;
        const Vec2 vb = f.gradient(b) - x;
        if (norm(va) == 0.0 || norm(vb) == 0.0) {
            throw std::runtime_error("poincare_index: zero of the field on the loop");
        }
        total += winding_along(f, x, a, b, va, vb, 0);
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

CriticalPointSet solve_critical_points(const GeneratingFunction& f, Vec2 x, const Window& w,
                                       const FlowOptions& opts) {
    w.validate(1);
    CriticalPointSet set;
    int boundary = 0;
    bool boundary_ok = true;
    try {
        boundary = poincare_index(f, x, w.boundary_loop(64));
    } catch (const std::runtime_error&) {
        boundary_ok = false;
    }
    int seeds = opts.seed_resolution;
    for (int attempt = 0; attempt <= opts.max_seed_refinements; ++attempt, seeds *= 2) {
        set.points = find_roots(f, x, w, opts, seeds);
        set.boundary_index = boundary;
        set.index_sum = 0;
        set.any_degenerate = false;
        for (const auto& p : set.points) {
            if (p.kind == PointKind::degenerate) set.any_degenerate = true;
            if (p.is_node()) set.index_sum += 1;
            if (p.is_saddle()) set.index_sum -= 1;
        }
        set.census_consistent = boundary_ok && !set.any_degenerate && set.index_sum == boundary;
        if (set.census_consistent || set.any_degenerate || !boundary_ok) break;
    }
    return set;
}

Separatrix integrate_branch(const GeneratingFunction& f, Vec2 x, const CriticalPoint& saddle,
                            Branch branch, const std::vector<CriticalPoint>& cps, const Window& w,
                            const FlowOptions& opts, const StepStop& stop) {
    Separatrix sep;
    sep.saddle_id = saddle.id;
    sep.branch = branch;
    const bool forward = is_unstable(branch);
    const Vec2 axis = forward ? saddle.unstable_direction() : saddle.stable_direction();
    const bool plus = branch == Branch::unstable_plus || branch == Branch::stable_plus;
    sep.direction = plus ? axis : -axis;

    double scale = 1.0;
    for (const auto& cp : cps) {
        if (cp.id != saddle.id) scale = std::min(scale, distance(cp.position, saddle.position));
    }
    const double delta = opts.delta0 * scale;
    const double sign = forward ? 1.0 : -1.0;
    const DormandPrince stepper([&](Vec2 y) { return sign * (f.gradient(y) - x); }, opts.rtol,
                                opts.atol);
    const double cos_align = std::cos(opts.tol_align_deg * std::numbers::pi / 180.0);

    Vec2 y = saddle.position + delta * sep.direction;
    sep.trajectory.push_back(y);
    double speed = norm(stepper.eval(y));
    double h = speed > 0.0 ? 0.25 * delta / speed : 1e-3;
    sep.limit = {LimitKind::max_steps, -1};

    for (long step = 0; step < opts.max_steps; ++step) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& cp : cps) nearest = std::min(nearest, distance(cp.position, y));
        speed = norm(stepper.eval(y));
        const double h_cap = speed > 0.0 ? 0.25 * nearest / speed : 1.0;
        const StepResult r = stepper.step(y, h, h_cap);
        sep.steps = step + 1;
        if (!r.ok) break;
        h = r.h_next;
        const Vec2 next = r.y;

        if (!w.contains(next)) {
            double s = 1.0;
            const Vec2 d = next - y;
            if (next.x > w.hi1()) s = std::min(s, (w.hi1() - y.x) / d.x);
            if (next.x < w.lo1()) s = std::min(s, (w.lo1() - y.x) / d.x);
            if (next.y > w.hi2()) s = std::min(s, (w.hi2() - y.y) / d.y);
            if (next.y < w.lo2()) s = std::min(s, (w.lo2() - y.y) / d.y);
            sep.trajectory.push_back(y + std::clamp(s, 0.0, 1.0) * d);
            sep.limit = {LimitKind::window_exit, -1};
            return sep;
        }
        sep.trajectory.push_back(next);
        if (stop && stop(y, next)) {
            sep.stopped = true;
            return sep;
        }
        y = next;

        for (const auto& cp : cps) {
            if (cp.id == saddle.id) continue;
            const Vec2 rel = y - cp.position;
            const double r_cp = norm(rel);
            if (r_cp >= opts.tol_capture) continue;
            if (cp.is_node()) {
                sep.limit = {LimitKind::node, cp.id};
                return sep;
            }
            if (cp.is_saddle()) {
                const Vec2 inv = forward ? cp.stable_direction() : cp.unstable_direction();
                if (r_cp == 0.0 || std::abs(dot(rel, inv)) / r_cp >= cos_align) {
                    sep.limit = {LimitKind::saddle, cp.id};
                    return sep;
                }
            }
        }
    }
    return sep;
}

std::vector<Separatrix> separatrices(const GeneratingFunction& f, Vec2 x,
                                     const std::vector<CriticalPoint>& cps, const Window& w,
                                     const FlowOptions& opts) {
    for (const auto& cp : cps) {
        if (cp.kind == PointKind::degenerate) {
            throw std::invalid_argument("separatrices: degenerate critical point present");
        }
    }
    std::vector<Separatrix> out;
    for (const auto& cp : cps) {
        if (!cp.is_saddle()) continue;
        for (Branch b : {Branch::unstable_plus, Branch::unstable_minus, Branch::stable_plus,
                         Branch::stable_minus}) {
            out.push_back(integrate_branch(f, x, cp, b, cps, w, opts));
        }
    }
    return out;
}

const CriticalPoint* PhasePortrait::point(int id) const {
    for (const auto& cp : critical_points) {
        if (cp.id == id) return &cp;
    }
    return nullptr;
}

const Separatrix* PhasePortrait::branch(int saddle_id, Branch b) const {
    for (const auto& s : separatrices) {
        if (s.saddle_id == saddle_id && s.branch == b) return &s;
    }
    return nullptr;
}

int PhasePortrait::saddle_count() const {
    return static_cast<int>(std::count_if(critical_points.begin(), critical_points.end(),
                                          [](const CriticalPoint& c) { return c.is_saddle(); }));
}

PhasePortrait portrait(const GeneratingFunction& f, Vec2 x, const Window& w, const FlowOptions& opts) {
    PhasePortrait p;
    p.x = x;
    p.window = w;
    const CriticalPointSet set = solve_critical_points(f, x, w, opts);
    p.critical_points = set.points;
    p.census_consistent = set.census_consistent;
    p.boundary_index = set.boundary_index;
    if (set.any_degenerate) {
        p.on_caustic = true;
        compute_signatures(p);
        return p;
    }
    p.separatrices = separatrices(f, x, p.critical_points, w, opts);
    for (const auto& s : p.separatrices) {
        if (is_unstable(s.branch) && s.limit.kind == LimitKind::saddle) {
            p.connections.emplace_back(s.saddle_id, s.limit.id);
        }
        if (!is_unstable(s.branch) && s.limit.kind == LimitKind::node) {
            p.node_saddle_lines.emplace_back(s.limit.id, s.saddle_id);
        }
    }
    std::sort(p.connections.begin(), p.connections.end());
    p.connections.erase(std::unique(p.connections.begin(), p.connections.end()), p.connections.end());
    std::sort(p.node_saddle_lines.begin(), p.node_saddle_lines.end());
    p.node_saddle_lines.erase(std::unique(p.node_saddle_lines.begin(), p.node_saddle_lines.end()),
                              p.node_saddle_lines.end());
    compute_signatures(p);
    return p;
}

int moduli_dimension(const CriticalPoint& from, const CriticalPoint& to) {
    auto unstable_dim = [](const CriticalPoint& c) {
        return (c.eigenvalues[0] > 0.0) + (c.eigenvalues[1] > 0.0);
    };
    return unstable_dim(from) - unstable_dim(to) - 1;
}

}  // namespace gradbif
