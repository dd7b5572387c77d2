#include "gradbif/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "gradbif/ode.hpp"
#include "gradbif/parallel.hpp"

namespace gradbif {

std::string to_string(const BranchPair& b) {
    return std::string(to_string(b.unstable)) + "/" + std::string(to_string(b.stable));
}

std::string_view to_string(CurveEnd e) {
    switch (e) {
        case CurveEnd::caustic_contact: return "caustic-contact";
        case CurveEnd::window_exit: return "window-exit";
        case CurveEnd::stratum_intersection: return "stratum-intersection";
    }
    return "?";
}

namespace {

bool is_minus(Branch b) { return b == Branch::unstable_minus || b == Branch::stable_minus; }

Vec2 branch_direction(const CriticalPoint& s, Branch b) {
    const Vec2 axis = is_unstable(b) ? s.unstable_direction() : s.stable_direction();
    return is_minus(b) ? -axis : axis;
}

struct Section {
    Vec2 m, e, n;
    double half = 0.0;

    Section(Vec2 si, Vec2 sj, double factor) {
        const double d = distance(si, sj);
        m = 0.5 * (si + sj);
        e = (sj - si) / d;
        n = perp(e);
        half = factor * d;
    }
    double sigma(Vec2 y) const { return dot(y - m, e); }
    double offset(Vec2 y) const { return dot(y - m, n); }
    Vec2 a() const { return m - half * n; }
    Vec2 b() const { return m + half * n; }

    /// Crossing of the segment within a step, by linear interpolation.
    std::optional<Vec2> crossing(Vec2 p, Vec2 q) const {
        const double sp = sigma(p), sq = sigma(q);
        if (sp == sq || sp * sq > 0.0) return std::nullopt;
        const Vec2 c = p + (sp / (sp - sq)) * (q - p);
        if (std::abs(offset(c)) > half) return std::nullopt;
        return c;
    }
};

constexpr double kMinTransversality = 0.02;

// Integrates dy/dsigma = v / (v.e) from p onto the section line.
std::optional<Vec2> refine_crossing(const VectorField& v, const Section& sec, Vec2 p) {
    const VectorField g = [&](Vec2 y) {
        const Vec2 vy = v(y);
        return vy / dot(vy, sec.e);
    };
    const double s0 = sec.sigma(p);
    constexpr int substeps = 4;
    const double h = -s0 / substeps;
    Vec2 y = p;
    for (int k = 0; k < substeps; ++k) y = rk4_step(g, y, h);
    const Vec2 vy = v(y);
    const double nv = norm(vy);
    if (nv == 0.0 || std::abs(dot(vy, sec.e)) < kMinTransversality * nv) return std::nullopt;
    if (!std::isfinite(y.x) || !std::isfinite(y.y)) return std::nullopt;
    return y;
}

SplittingSample evaluate(const GeneratingFunction& f, Vec2 x, const std::vector<CriticalPoint>& cps, int i,
                         int j, BranchPair b, const Window& fiber, const SplittingOptions& opts) {
    SplittingSample out;
    out.x = x;
    out.i = i;
    out.j = j;
    out.branches = b;
    const CriticalPoint& si = cps.at(static_cast<std::size_t>(i));
    const CriticalPoint& sj = cps.at(static_cast<std::size_t>(j));
    if (!si.is_saddle() || !sj.is_saddle()) {
        out.reason = "pair is not a pair of saddles";
        return out;
    }
    const Section sec(si.position, sj.position, opts.section_factor);
    out.section_a = sec.a();
    out.section_b = sec.b();

    Vec2 crossings[2];
    for (int side = 0; side < 2; ++side) {
        const CriticalPoint& s = side == 0 ? si : sj;
        const Branch br = side == 0 ? b.unstable : b.stable;
        Vec2 before;
        const StepStop stop = [&](Vec2 p, Vec2 q) {
            if (sec.crossing(p, q)) {
                before = p;
                return true;
            }
            return false;
        };
        const Separatrix sep = integrate_branch(f, x, s, br, cps, fiber, opts.flow, stop);
        if (!sep.stopped) {
            out.reason = std::string(to_string(br)) + " branch of saddle " + std::to_string(s.id) +
                         " misses the section (" + to_string(sep.limit) + ")";
            return out;
        }
        const double sign = side == 0 ? 1.0 : -1.0;
        const VectorField v = [&](Vec2 y) { return sign * (f.gradient(y) - x); };
        const auto c = refine_crossing(v, sec, before);
        if (!c || std::abs(sec.offset(*c)) > sec.half) {
            out.reason = "tangential crossing of the section";
            return out;
        }
        crossings[side] = *c;
    }
    out.cross_unstable = crossings[0];
    out.cross_stable = crossings[1];
    out.value = sec.offset(crossings[0]) - sec.offset(crossings[1]);
    out.valid = true;
    return out;
}

// Newton continuation of every tracked critical point to x.
std::optional<std::vector<CriticalPoint>> track_points(const GeneratingFunction& f, Vec2 x,
                                                       const PairContext& ctx,
                                                       const SplittingOptions& opts, std::string& why) {
    const auto& pts = ctx.points;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < pts.size(); ++a) {
        for (std::size_t b = a + 1; b < pts.size(); ++b) dmin = std::min(dmin, distance(pts[a], pts[b]));
    }
    const double max_jump = 0.25 * dmin;
    std::vector<CriticalPoint> cps;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto y = newton_critical_point(f, x, pts[k], opts.flow.tol_root, 4.0 * max_jump);
        if (!y || distance(*y, pts[k]) > max_jump) {
            why = "lost track of critical point " + std::to_string(k);
            return std::nullopt;
        }
        CriticalPoint cp = make_critical_point(f, *y, opts.flow.tol_degenerate);
        if (cp.kind == PointKind::degenerate) {
            why = "degenerate critical point";
            return std::nullopt;
        }
        cp.id = static_cast<int>(k);
        cps.push_back(cp);
    }
    for (std::size_t a = 0; a < cps.size(); ++a) {
        for (std::size_t b = a + 1; b < cps.size(); ++b) {
            if (distance(cps[a].position, cps[b].position) < opts.flow.dedup_radius) {
                why = "tracked critical points merged";
                return std::nullopt;
            }
        }
    }
    return cps;
}

}  // namespace

PairContext PairContext::from_portrait(const PhasePortrait& p, int i, int j, BranchPair b) {
    PairContext ctx;
    ctx.i = i;
    ctx.j = j;
    for (const auto& cp : p.critical_points) ctx.points.push_back(cp.position);
    ctx.dir_unstable = branch_direction(*p.point(i), b.unstable);
    ctx.dir_stable = branch_direction(*p.point(j), b.stable);
    return ctx;
}

SplittingSample splitting(const GeneratingFunction& f, Vec2 x, PairContext& ctx, const Window& fiber,
                          const SplittingOptions& opts) {
    SplittingSample out;
    out.x = x;
    out.i = ctx.i;
    out.j = ctx.j;
    if (ctx.i < 0 || ctx.j < 0 || ctx.i == ctx.j || static_cast<std::size_t>(std::max(ctx.i, ctx.j)) >= ctx.points.size()) {
        out.reason = "invalid pair context";
        return out;
    }
    std::string why;
    const auto cps = track_points(f, x, ctx, opts, why);
    if (!cps) {
        out.reason = why;
        return out;
    }
    const CriticalPoint& si = (*cps)[static_cast<std::size_t>(ctx.i)];
    const CriticalPoint& sj = (*cps)[static_cast<std::size_t>(ctx.j)];
    if (!si.is_saddle() || !sj.is_saddle()) {
        out.reason = "pair is not a pair of saddles";
        return out;
    }
    BranchPair b;
    b.unstable = dot(si.unstable_direction(), ctx.dir_unstable) >= 0.0 ? Branch::unstable_plus
                                                                         : Branch::unstable_minus;
    b.stable = dot(sj.stable_direction(), ctx.dir_stable) >= 0.0 ? Branch::stable_plus : Branch::stable_minus;
    out = evaluate(f, x, *cps, ctx.i, ctx.j, b, fiber, opts);
    if (out.valid) {
        for (std::size_t k = 0; k < cps->size(); ++k) ctx.points[k] = (*cps)[k].position;
        ctx.dir_unstable = branch_direction(si, b.unstable);
        ctx.dir_stable = branch_direction(sj, b.stable);
    }
    return out;
}

SplittingSample splitting_from_portrait(const PhasePortrait& p, int i, int j, BranchPair b,
                                        const SplittingOptions& opts) {
    SplittingSample out;
    out.x = p.x;
    out.i = i;
    out.j = j;
    out.branches = b;
    const CriticalPoint* si = p.point(i);
    const CriticalPoint* sj = p.point(j);
    if (!si || !sj || !si->is_saddle() || !sj->is_saddle() || i == j) {
        out.reason = "pair is not a pair of saddles";
        return out;
    }
    const Section sec(si->position, sj->position, opts.section_factor);
    out.section_a = sec.a();
    out.section_b = sec.b();
    Vec2 crossings[2];
    for (int side = 0; side < 2; ++side) {
        const Separatrix* sep = p.branch(side == 0 ? i : j, side == 0 ? b.unstable : b.stable);
        bool found = false;
        if (sep) {
            for (std::size_t k = 1; k < sep->trajectory.size() && !found; ++k) {
                const Vec2 a = sep->trajectory[k - 1], c = sep->trajectory[k];
                if (const auto hit = sec.crossing(a, c)) {
                    const Vec2 d = c - a;
                    if (std::abs(dot(d, sec.e)) < kMinTransversality * norm(d)) break;
                    crossings[side] = *hit;
                    found = true;
                }
            }
        }
        if (!found) {
            out.reason = "branch misses the section";
            return out;
        }
    }
    out.cross_unstable = crossings[0];
    out.cross_stable = crossings[1];
    out.value = sec.offset(crossings[0]) - sec.offset(crossings[1]);
    out.valid = true;
    return out;
}

namespace {

bool segment_meets_caustic(const CausticCurve& c, Vec2 a, Vec2 b, double margin) {
    const std::array<Vec2, 2> seg{a, b};
    for (std::size_t k = 0; k < c.components.size(); ++k) {
        Polyline line = c.components[k];
        if (c.closed[k] && !line.empty()) line.push_back(line.front());
        if (!polyline_intersections(seg, line).empty()) return true;
    }
    for (Vec2 p : c.non_morse_points) {
        if (distance_to_segment(p, a, b) < margin) return true;
    }
    return false;
}

}  // namespace

std::optional<LocateResult> locate_on_segment(const GeneratingFunction& f, Vec2 x0, Vec2 x1,
                                              const PairContext& ctx0, const Window& fiber,
                                              const CausticCurve* caustic, const SplittingOptions& opts) {
    if (x0 == x1) throw std::invalid_argument("locate_on_segment: degenerate segment");
    if (caustic) {
        if (segment_meets_caustic(*caustic, x0, x1, opts.caustic_margin)) {
            throw std::invalid_argument("locate_on_segment: segment meets the caustic");
        }
    } else {
        // without a caustic, a change of the critical-point count along the segment reveals one
        int count = -1;
        for (int k = 0; k <= 8; ++k) {
            const Vec2 x = x0 + (k / 8.0) * (x1 - x0);
            const auto set = solve_critical_points(f, x, fiber, opts.flow);
            const int n = static_cast<int>(set.points.size());
            if (set.any_degenerate || (count >= 0 && n != count)) {
                throw std::invalid_argument("locate_on_segment: segment meets the caustic");
            }
            count = n;
        }
    }
    PairContext lo_ctx = ctx0;
    const SplittingSample s0 = splitting(f, x0, lo_ctx, fiber, opts);
    if (!s0.valid) throw InvalidSampleError(0.0, s0.reason);
    PairContext hi_ctx = lo_ctx;
    const SplittingSample s1 = splitting(f, x1, hi_ctx, fiber, opts);
    if (!s1.valid) throw InvalidSampleError(1.0, s1.reason);
    if (s0.value == 0.0) return LocateResult{x0, 0.0, 0.0, lo_ctx};
    if (s1.value == 0.0) return LocateResult{x1, 0.0, 0.0, hi_ctx};
    if ((s0.value > 0.0) == (s1.value > 0.0)) return std::nullopt;

    const double len = distance(x0, x1);
    const bool lo_positive = s0.value > 0.0;
    double lo = 0.0, hi = 1.0;
    while ((hi - lo) * len > opts.bracket_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        PairContext mid_ctx = lo_ctx;
        const SplittingSample sm = splitting(f, x0 + mid * (x1 - x0), mid_ctx, fiber, opts);
        if (!sm.valid) throw InvalidSampleError(mid, sm.reason);
        if ((sm.value > 0.0) == lo_positive && sm.value != 0.0) {
            lo = mid;
            lo_ctx = mid_ctx;
        } else {
            hi = mid;
        }
    }
    const double s = 0.5 * (lo + hi);
    LocateResult r;
    r.x = x0 + s * (x1 - x0);
    r.bracket = (hi - lo) * len;
    r.context = lo_ctx;
    const SplittingSample sx = splitting(f, r.x, r.context, fiber, opts);
    if (!sx.valid) throw InvalidSampleError(s, sx.reason);
    r.psi = sx.value;
    if (std::abs(r.psi) > opts.tol_psi) return std::nullopt;
    return r;
}

namespace {

struct March {
    Polyline points;
    std::vector<double> psi;
    std::vector<PairContext> contexts;
    CurveEnd end = CurveEnd::window_exit;
    bool closed = false;
    bool fold = false;
};

std::optional<Vec2> psi_gradient(const GeneratingFunction& f, Vec2 x, double psi_x, const PairContext& ctx,
                                 const Window& fiber, const SplittingOptions& opts) {
    Vec2 g;
    for (int axis = 0; axis < 2; ++axis) {
        PairContext c = ctx;
        const Vec2 dx = axis == 0 ? Vec2{opts.fd_step, 0.0} : Vec2{0.0, opts.fd_step};
        const SplittingSample s = splitting(f, x + dx, c, fiber, opts);
        if (!s.valid) return std::nullopt;
        (axis == 0 ? g.x : g.y) = (s.value - psi_x) / opts.fd_step;
    }
    return g;
}

// Final vertex where the curve leaves the window: Newton along the
// boundary side hit by the tangent ray.
template <class Out>
void land_on_boundary(const GeneratingFunction& f, Vec2 x, Vec2 t, Vec2 g, const PairContext& ctx,
                      const Window& base, const Window& fiber, const SplittingOptions& opts, Out& out) {
    double s_hit = std::numeric_limits<double>::infinity();
    int side = -1;
    const double bounds[4] = {base.lo1(), base.hi1(), base.lo2(), base.hi2()};
    for (int k = 0; k < 4; ++k) {
        const double comp = k < 2 ? t.x : t.y;
        const double from = k < 2 ? x.x : x.y;
        if (comp == 0.0) continue;
        const double sk = (bounds[k] - from) / comp;
        if (sk >= 0.0 && sk < s_hit) {
            s_hit = sk;
            side = k;
        }
    }
    if (side < 0 || s_hit > 2.0 * opts.step_max) return;
    Vec2 xb = x + s_hit * t;
    const Vec2 along = side < 2 ? Vec2{0.0, 1.0} : Vec2{1.0, 0.0};
    const double slope = dot(g, along);
    if (std::abs(slope) < 1e-12) return;
    PairContext c = ctx;
    for (int it = 0; it < 8; ++it) {
        if (side < 2) xb.x = bounds[side]; else xb.y = bounds[side];
        if (!base.contains(xb)) return;
        const SplittingSample sm = splitting(f, xb, c, fiber, opts);
        if (!sm.valid) return;
        if (std::abs(sm.value) <= std::max(opts.tol_corrector, 1e-8)) {
            out.points.push_back(xb);
            out.psi.push_back(sm.value);
            out.contexts.push_back(c);
            return;
        }
        xb = xb - (sm.value / slope) * along;
    }
}

March march(const GeneratingFunction& f, Vec2 seed, double psi_seed, const PairContext& seed_ctx,
            Vec2 tangent0, const Window& base, const Window& fiber, const CausticCurve* caustic,
            const SplittingOptions& opts) {
    March out;
    Vec2 x = seed;
    double psi_x = psi_seed;
    PairContext ctx = seed_ctx;
    Vec2 t_prev = tangent0;
    double h = 2.0 * opts.step_min;
    const double accept = std::max(opts.tol_corrector, 1e-8);

    while (static_cast<int>(out.points.size()) < opts.max_vertices) {
        const auto g = psi_gradient(f, x, psi_x, ctx, fiber, opts);
        if (!g) {
            out.end = CurveEnd::stratum_intersection;
            return out;
        }
        const double gn = norm(*g);
        if (gn < 1e-12) {
            out.fold = true;
            out.end = CurveEnd::stratum_intersection;
            return out;
        }
        Vec2 t = perp(*g) / gn;
        if (dot(t, t_prev) < 0.0) t = -t;

        bool accepted = false;
        while (!accepted) {
            const Vec2 xp = x + h * t;
            if (!base.contains(xp)) {
                land_on_boundary(f, x, t, *g, ctx, base, fiber, opts, out);
                out.end = CurveEnd::window_exit;
                return out;
            }
            if (caustic && caustic->distance_to(xp) < opts.caustic_margin) {
                // creep up to the margin so the end does not depend on the seed
                if (h > 1e-3 * opts.step_min) {
                    h *= 0.5;
                    continue;
                }
                out.end = CurveEnd::caustic_contact;
                return out;
            }
            PairContext c = ctx;
            Vec2 xc = xp;
            SplittingSample s;
            int iters = 0;
            for (; iters < 8; ++iters) {
                s = splitting(f, xc, c, fiber, opts);
                if (!s.valid || std::abs(s.value) <= opts.tol_corrector) break;
                xc = xc - (s.value / (gn * gn)) * *g;
            }
            const bool ok = s.valid && std::abs(s.value) <= accept && distance(xc, xp) <= 0.5 * h &&
                            dot(normalized(xc - x), t) > 0.9;
            if (ok) {
                accepted = true;
                x = xc;
                psi_x = s.value;
                ctx = c;
                t_prev = t;
                out.points.push_back(x);
                out.psi.push_back(psi_x);
                out.contexts.push_back(ctx);
                if (iters <= 2) h = std::min(1.5 * h, opts.step_max);
            } else {
                h *= 0.5;
                const bool near_caustic = caustic && caustic->distance_to(x) < 10.0 * opts.caustic_margin;
                if (h < (near_caustic ? 1e-3 * opts.step_min : opts.step_min)) {
                    out.end = near_caustic ? CurveEnd::caustic_contact : CurveEnd::stratum_intersection;
                    return out;
                }
            }
        }
        if (out.points.size() >= 10 && distance(x, seed) < h) {
            out.closed = true;
            return out;
        }
    }
    out.end = CurveEnd::stratum_intersection;
    return out;
}

}  // namespace

BifurcationCurve trace_curve(const GeneratingFunction& f, Vec2 seed, const PairContext& ctx,
                             const Window& base, const Window& fiber, const CausticCurve* caustic,
                             const SplittingOptions& opts) {
    PairContext seed_ctx = ctx;
    const SplittingSample s0 = splitting(f, seed, seed_ctx, fiber, opts);
    if (!s0.valid) throw InvalidSampleError(0.0, s0.reason);
    if (std::abs(s0.value) > opts.tol_psi) {
        throw std::invalid_argument("trace_curve: seed is not on a stratum");
    }
    const auto g0 = psi_gradient(f, seed, s0.value, seed_ctx, fiber, opts);
    if (!g0 || norm(*g0) < 1e-12) throw std::runtime_error("trace_curve: no usable tangent at the seed");
    const Vec2 t0 = normalized(perp(*g0));

    BifurcationCurve c;
    c.pair = {ctx.i, ctx.j};
    c.branches = s0.branches;
    const March fwd = march(f, seed, s0.value, seed_ctx, t0, base, fiber, caustic, opts);
    March bwd;
    if (!fwd.closed) bwd = march(f, seed, s0.value, seed_ctx, -t0, base, fiber, caustic, opts);

    for (std::size_t k = bwd.points.size(); k-- > 0;) {
        c.points.push_back(bwd.points[k]);
        c.psi.push_back(bwd.psi[k]);
        c.contexts.push_back(bwd.contexts[k]);
    }
    c.points.push_back(seed);
    c.psi.push_back(s0.value);
    c.contexts.push_back(seed_ctx);
    for (std::size_t k = 0; k < fwd.points.size(); ++k) {
        c.points.push_back(fwd.points[k]);
        c.psi.push_back(fwd.psi[k]);
        c.contexts.push_back(fwd.contexts[k]);
    }
    c.closed = fwd.closed;
    c.ends = {bwd.end, fwd.end};
    if (c.closed) c.ends = {fwd.end, fwd.end};
    c.fold_flag = fwd.fold || bwd.fold;
    return c;
}

// ---------------------------------------------------------------------------
// Diagram assembly

namespace {

struct PsiEntry {
    int i, j;
    BranchPair b;
    double value;
    bool valid;
};

struct Sample {
    Vec2 x;
    bool valid = false;
    PhasePortrait portrait;  // trajectories dropped after the splitting table is built
    std::vector<PsiEntry> psi;
    std::vector<int> labels;  // global saddle label per critical point id, -1 for nodes
};

std::vector<int> saddle_ids(const PhasePortrait& p) {
    std::vector<int> out;
    for (const auto& c : p.critical_points) {
        if (c.is_saddle()) out.push_back(c.id);
    }
    return out;
}

double min_saddle_distance(const PhasePortrait& p) {
    const auto s = saddle_ids(p);
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < s.size(); ++a) {
        for (std::size_t b = a + 1; b < s.size(); ++b) {
            d = std::min(d, distance(p.point(s[a])->position, p.point(s[b])->position));
        }
    }
    return d;
}

// Nearest-neighbour saddle correspondence A -> B; empty if not a bijection
// within the allowed jump.
std::map<int, int> match_saddles(const PhasePortrait& a, const PhasePortrait& b) {
    std::map<int, int> m;
    const auto sa = saddle_ids(a), sb = saddle_ids(b);
    if (sa.size() != sb.size()) return {};
    const double jump = 0.25 * std::min(min_saddle_distance(a), min_saddle_distance(b));
    std::vector<bool> used(b.critical_points.size(), false);
    for (int ia : sa) {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int ib : sb) {
            const double d = distance(a.point(ia)->position, b.point(ib)->position);
            if (d < bd) { bd = d; best = ib; }
        }
        if (best < 0 || bd > jump || used[static_cast<std::size_t>(best)]) return {};
        used[static_cast<std::size_t>(best)] = true;
        m[ia] = best;
    }
    return m;
}

BranchPair map_branches(const PhasePortrait& a, const PhasePortrait& b, int ia, int ja, int ib, int jb,
                        BranchPair br) {
    const Vec2 du = branch_direction(*a.point(ia), br.unstable);
    const Vec2 ds = branch_direction(*a.point(ja), br.stable);
    BranchPair out;
    out.unstable = dot(b.point(ib)->unstable_direction(), du) >= 0.0 ? Branch::unstable_plus
                                                                       : Branch::unstable_minus;
    out.stable = dot(b.point(jb)->stable_direction(), ds) >= 0.0 ? Branch::stable_plus : Branch::stable_minus;
    return out;
}

const PsiEntry* find_entry(const Sample& s, int i, int j, BranchPair b) {
    for (const auto& e : s.psi) {
        if (e.i == i && e.j == j && e.b == b) return &e;
    }
    return nullptr;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

bool segment_meets_polyline(Vec2 a, Vec2 b, const Polyline& line) {
    const std::array<Vec2, 2> seg{a, b};
    return !polyline_intersections(seg, line).empty();
}

Vec2 nearest_on_caustic(const CausticCurve& c, Vec2 x) {
    Vec2 best = x;
    double bd = std::numeric_limits<double>::infinity();
    auto consider = [&](Vec2 p) {
        const double d = distance(p, x);
        if (d < bd) { bd = d; best = p; }
    };
    for (std::size_t k = 0; k < c.components.size(); ++k) {
        const Polyline& line = c.components[k];
        const std::size_t n = line.size();
        const std::size_t segs = c.closed[k] ? n : (n > 0 ? n - 1 : 0);
        for (std::size_t s = 0; s < segs; ++s) {
            const Vec2 a = line[s], b = line[(s + 1) % n];
            const Vec2 d = b - a;
            const double len2 = dot(d, d);
            const double t = len2 > 0.0 ? std::clamp(dot(x - a, d) / len2, 0.0, 1.0) : 0.0;
            consider(a + t * d);
        }
        if (n == 1) consider(line[0]);
    }
    for (Vec2 p : c.non_morse_points) consider(p);
    return best;
}

// Nearest vertex of a curve to x.
std::size_t nearest_vertex(const BifurcationCurve& c, Vec2 x) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c.points.size(); ++k) {
        const double d = distance(c.points[k], x);
        if (d < bd) { bd = d; best = k; }
    }
    return best;
}

// Same physical stratum: tracked saddles and branch directions agree.
bool same_stratum(const BifurcationCurve& c, Vec2 x, const PairContext& ctx) {
    const PairContext& v = c.contexts[nearest_vertex(c, x)];
    const double scale = 0.25 * distance(ctx.source(), ctx.target());
    return distance(v.source(), ctx.source()) < scale && distance(v.target(), ctx.target()) < scale &&
           dot(v.dir_unstable, ctx.dir_unstable) > 0.0 && dot(v.dir_stable, ctx.dir_stable) > 0.0;
}

}  // namespace

BifurcationDiagram assemble_diagram(const GeneratingFunction& f, const DiagramOptions& opts) {
    BifurcationDiagram d;
    d.base = opts.base;
    d.fiber = opts.fiber;
    opts.base.validate(2);
    opts.fiber.validate(2);
    const SplittingOptions& so = opts.splitting;
    if (std::min(opts.base.resolution1, opts.base.resolution2) < 16) {
        d.warnings.push_back("base grid coarser than 16 samples per axis: unresolved boundaries likely");
    }

    LocusOptions lo = opts.locus;
    lo.workers = opts.workers;
    d.caustic = compute_caustic(f, opts.fiber, lo);
    for (const auto& w : d.caustic.warnings) d.warnings.push_back("caustic: " + w);

    const int n1 = opts.base.resolution1, n2 = opts.base.resolution2;
    const double dx1 = 2.0 * opts.base.half_width1 / (n1 - 1);
    const double dx2 = 2.0 * opts.base.half_width2 / (n2 - 1);
    d.grid_step = std::max(dx1, dx2);
    const std::size_t total = static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2);
    std::vector<Sample> samples(total);

    // (1) portrait scan
    parallel_for(total, opts.workers, [&](std::size_t k) {
        Sample& s = samples[k];
        const int c1 = static_cast<int>(k % static_cast<std::size_t>(n1));
        const int c2 = static_cast<int>(k / static_cast<std::size_t>(n1));
        s.x = {opts.base.lo1() + c1 * dx1, opts.base.lo2() + c2 * dx2};
        if (d.caustic.distance_to(s.x) < so.caustic_margin) return;
        s.portrait = portrait(f, s.x, opts.fiber, so.flow);
        s.valid = !s.portrait.on_caustic && s.portrait.census_consistent;
        if (!s.valid) return;
        const auto sad = saddle_ids(s.portrait);
        for (int i : sad) {
            for (int j : sad) {
                if (i == j) continue;
                for (const BranchPair& b : kBranchPairs) {
                    const SplittingSample sp = splitting_from_portrait(s.portrait, i, j, b, so);
                    s.psi.push_back({i, j, b, sp.value, sp.valid});
                }
            }
        }
        for (auto& sep : s.portrait.separatrices) Polyline().swap(sep.trajectory);
    });

    long inconsistent = 0;
    for (const auto& s : samples) {
        if (!s.valid && !s.portrait.critical_points.empty() && !s.portrait.on_caustic) ++inconsistent;
    }
    if (inconsistent > 0) {
        d.warnings.push_back(std::to_string(inconsistent) + " samples skipped: census does not match boundary index");
    }

    // grid edges in index order
    std::vector<std::pair<int, int>> edges;
    for (int c2 = 0; c2 < n2; ++c2) {
        for (int c1 = 0; c1 < n1; ++c1) {
            const int k = c2 * n1 + c1;
            if (c1 + 1 < n1) edges.emplace_back(k, k + 1);
            if (c2 + 1 < n2) edges.emplace_back(k, k + n1);
        }
    }
    auto usable = [&](int a, int b) {
        const Sample& sa = samples[static_cast<std::size_t>(a)];
        const Sample& sb = samples[static_cast<std::size_t>(b)];
        return sa.valid && sb.valid && !segment_meets_caustic(d.caustic, sa.x, sb.x, so.caustic_margin);
    };

    // (2) saddle labels by nearest-neighbour continuation over the sample graph
    {
        std::vector<std::vector<int>> adj(total);
        std::map<std::pair<int, int>, std::map<int, int>> matches;
        for (auto [a, b] : edges) {
            if (!usable(a, b)) continue;
            auto m = match_saddles(samples[static_cast<std::size_t>(a)].portrait,
                                   samples[static_cast<std::size_t>(b)].portrait);
            if (m.empty() && samples[static_cast<std::size_t>(a)].portrait.saddle_count() > 0) continue;
            std::map<int, int> back;
            for (auto [ia, ib] : m) back[ib] = ia;
            matches[{a, b}] = m;
            matches[{b, a}] = back;
            adj[static_cast<std::size_t>(a)].push_back(b);
            adj[static_cast<std::size_t>(b)].push_back(a);
        }
        int next_label = 0;
        std::vector<bool> seen(total, false);
        for (std::size_t start = 0; start < total; ++start) {
            if (!samples[start].valid || seen[start]) continue;
            Sample& s0 = samples[start];
            s0.labels.assign(s0.portrait.critical_points.size(), -1);
            for (int id : saddle_ids(s0.portrait)) s0.labels[static_cast<std::size_t>(id)] = next_label++;
            seen[start] = true;
            std::vector<int> queue{static_cast<int>(start)};
            for (std::size_t q = 0; q < queue.size(); ++q) {
                const int a = queue[q];
                for (int b : adj[static_cast<std::size_t>(a)]) {
                    if (seen[static_cast<std::size_t>(b)]) continue;
                    seen[static_cast<std::size_t>(b)] = true;
                    Sample& sb = samples[static_cast<std::size_t>(b)];
                    sb.labels.assign(sb.portrait.critical_points.size(), -1);
                    for (auto [ia, ib] : matches[{a, b}]) {
                        sb.labels[static_cast<std::size_t>(ib)] =
                            samples[static_cast<std::size_t>(a)].labels[static_cast<std::size_t>(ia)];
                    }
                    queue.push_back(b);
                }
            }
        }
    }

    // exclusion property at grid samples
    for (const auto& s : samples) {
        if (!s.valid) continue;
        const auto sad = saddle_ids(s.portrait);
        for (std::size_t a = 0; a < sad.size(); ++a) {
            for (std::size_t b = a + 1; b < sad.size(); ++b) {
                bool fwd = false, rev = false;
                for (const auto& e : s.psi) {
                    if (!e.valid || std::abs(e.value) > so.tol_psi) continue;
                    if (e.i == sad[a] && e.j == sad[b]) fwd = true;
                    if (e.i == sad[b] && e.j == sad[a]) rev = true;
                }
                ++d.exclusion_checks;
                if (fwd && rev) ++d.exclusion_violations;
            }
        }
    }

    // (3)+(4) bracket sign changes of psi along grid edges, locate and trace
    for (auto [a, b] : edges) {
        if (!usable(a, b)) continue;
        const Sample& sa = samples[static_cast<std::size_t>(a)];
        const Sample& sb = samples[static_cast<std::size_t>(b)];
        const auto m = match_saddles(sa.portrait, sb.portrait);
        bool bracketed = false;
        for (const auto& ea : sa.psi) {
            if (!ea.valid || !m.count(ea.i) || !m.count(ea.j)) continue;
            const int ib = m.at(ea.i), jb = m.at(ea.j);
            const BranchPair bb = map_branches(sa.portrait, sb.portrait, ea.i, ea.j, ib, jb, ea.b);
            const PsiEntry* eb = find_entry(sb, ib, jb, bb);
            if (!eb || !eb->valid || (ea.value > 0.0) == (eb->value > 0.0)) continue;
            bracketed = true;

            const PairContext ctx = PairContext::from_portrait(sa.portrait, ea.i, ea.j, ea.b);
            const std::pair<int, int> labels{sa.labels[static_cast<std::size_t>(ea.i)],
                                             sa.labels[static_cast<std::size_t>(ea.j)]};
            bool known = false;
            for (const auto& c : d.strata) {
                if (distance_to_polyline(0.5 * (sa.x + sb.x), c.points) < d.grid_step && same_stratum(c, sa.x, ctx)) {
                    known = true;
                    break;
                }
            }
            if (known) continue;
            std::optional<LocateResult> loc;
            try {
                loc = locate_on_segment(f, sa.x, sb.x, ctx, opts.fiber, &d.caustic, so);
            } catch (const std::exception& ex) {
                d.warnings.push_back("locate failed near (" + std::to_string(sa.x.x) + ", " +
                                     std::to_string(sa.x.y) + "): " + ex.what());
                continue;
            }
            if (!loc) continue;
            ++d.located_zeros;
            d.max_bracket = std::max(d.max_bracket, loc->bracket);
            for (const auto& c : d.strata) {
                if (distance_to_polyline(loc->x, c.points) < 0.5 * d.grid_step && same_stratum(c, loc->x, loc->context)) {
                    known = true;
                    break;
                }
            }
            if (known) continue;
            try {
                BifurcationCurve c = trace_curve(f, loc->x, loc->context, opts.base, opts.fiber, &d.caustic, so);
                c.pair = labels;
                d.strata.push_back(std::move(c));
            } catch (const std::exception& ex) {
                d.warnings.push_back(std::string("trace failed: ") + ex.what());
            }
        }
        if (!bracketed && sa.portrait.canonical_signature != sb.portrait.canonical_signature) {
            d.unresolved.push_back(0.5 * (sa.x + sb.x));
        }
    }
    // unresolved edges later crossed by a traced stratum are explained
    std::erase_if(d.unresolved, [&](Vec2 mid) {
        for (const auto& c : d.strata) {
            if (distance_to_polyline(mid, c.points) < 3.0 * d.grid_step) return true;
        }
        return false;
    });
    if (!d.unresolved.empty()) {
        d.warnings.push_back(std::to_string(d.unresolved.size()) +
                             " unresolved boundaries: signature change without a bracketed zero");
    }

    // exclusion property along traced curves
    for (const auto& c : d.strata) {
        for (std::size_t k = 0; k < c.points.size(); k += 8) {
            const PairContext& v = c.contexts[k];
            std::string why;
            const auto cps = track_points(f, c.points[k], v, so, why);
            bool certified = false;
            for (const BranchPair& bp : kBranchPairs) {
                if (!cps) break;
                const SplittingSample s = evaluate(f, c.points[k], *cps, v.j, v.i, bp, opts.fiber, so);
                if (s.valid && std::abs(s.value) <= so.tol_psi) certified = true;
            }
            ++d.exclusion_checks;
            if (certified) {
                ++d.exclusion_violations;
                d.warnings.push_back("exclusion violated on a traced curve");
            }
        }
    }

    // (5) codimension-2 points
    for (std::size_t a = 0; a < d.strata.size(); ++a) {
        for (std::size_t b = a + 1; b < d.strata.size(); ++b) {
            for (Vec2 p : polyline_intersections(d.strata[a].points, d.strata[b].points)) {
                d.codim2_points.push_back({p, d.strata[a].pair, d.strata[b].pair, static_cast<int>(a),
                                           static_cast<int>(b)});
            }
        }
    }

    // (6) regions: components of the sample graph cut by caustic and strata;
    // strata stopped just short of the caustic are closed up to it
    std::vector<Polyline> cuts;
    for (const auto& c : d.strata) {
        Polyline line = c.points;
        if (line.empty()) continue;
        if (d.caustic.distance_to(line.front()) < 2.0 * d.grid_step) {
            line.insert(line.begin(), nearest_on_caustic(d.caustic, line.front()));
        }
        if (d.caustic.distance_to(line.back()) < 2.0 * d.grid_step) {
            line.push_back(nearest_on_caustic(d.caustic, line.back()));
        }
        cuts.push_back(std::move(line));
    }
    UnionFind uf(total);
    for (auto [a, b] : edges) {
        if (!usable(a, b)) continue;
        const Vec2 xa = samples[static_cast<std::size_t>(a)].x, xb = samples[static_cast<std::size_t>(b)].x;
        bool cut = false;
        for (const auto& c : cuts) {
            if (segment_meets_polyline(xa, xb, c)) {
                cut = true;
                break;
            }
        }
        if (!cut) uf.unite(a, b);
    }
    std::map<int, std::vector<int>> members;
    for (std::size_t k = 0; k < total; ++k) {
        if (samples[k].valid) members[uf.find(static_cast<int>(k))].push_back(static_cast<int>(k));
    }
    std::mt19937_64 rng(opts.seed);
    for (const auto& [root, idx] : members) {
        Region r;
        const Sample& rep = samples[static_cast<std::size_t>(idx.front())];
        r.sample = rep.x;
        r.signature = rep.portrait.canonical_signature;
        r.sample_count = static_cast<int>(idx.size());
        for (int k = 0; k < opts.region_samples && idx.size() > 1; ++k) {
            const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, idx.size() - 1)(rng);
            const Sample& s = samples[static_cast<std::size_t>(idx[pick])];
            r.checked.push_back(s.x);
            if (s.portrait.canonical_signature != r.signature) r.consistent = false;
        }
        d.regions.push_back(std::move(r));
    }

    for (std::size_t c = 0; c < d.strata.size(); ++c) {
        if (d.strata[c].points.size() < 2) continue;
        d.witnesses.push_back(crossing_witness(f, d, static_cast<int>(c), d.strata[c].points.size() / 2, so));
    }
    d.report = validate_diagram(d, nullptr, so);
    return d;
}

}  // namespace gradbif
