#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gradbif/bifurcation.hpp"

namespace gradbif {

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

constexpr double kIncidence = 1e-6;

int nearest_point(const PhasePortrait& p, Vec2 y, bool saddles_only) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& c : p.critical_points) {
        if (saddles_only && !c.is_saddle()) continue;
        const double d = distance(c.position, y);
        if (d < bd) { bd = d; best = c.id; }
    }
    return best;
}

Branch aligned_branch(const CriticalPoint& s, Vec2 dir, bool unstable) {
    if (unstable) {
        return dot(s.unstable_direction(), dir) >= 0.0 ? Branch::unstable_plus : Branch::unstable_minus;
    }
    return dot(s.stable_direction(), dir) >= 0.0 ? Branch::stable_plus : Branch::stable_minus;
}

Vec2 direction_of(const CriticalPoint& s, Branch b) {
    const Vec2 axis = is_unstable(b) ? s.unstable_direction() : s.stable_direction();
    return (b == Branch::unstable_minus || b == Branch::stable_minus) ? -axis : axis;
}

double distance_to_other_curves(const BifurcationDiagram& d, int curve, Vec2 x) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < d.strata.size(); ++c) {
        if (static_cast<int>(c) == curve) continue;
        best = std::min(best, distance_to_polyline(x, d.strata[c].points));
    }
    return best;
}

bool admissible_side(const PhasePortrait& p, int i, int j, BranchPair b, const SplittingOptions& opts) {
    const SplittingSample s = splitting_from_portrait(p, i, j, b, opts);
    if (!s.valid) return false;
    const std::array<Vec2, 2> gap{s.cross_unstable, s.cross_stable};
    for (const auto& sep : p.separatrices) {
        if ((sep.saddle_id == i && sep.branch == b.unstable) || (sep.saddle_id == j && sep.branch == b.stable)) {
            continue;
        }
        if (!polyline_intersections(gap, sep.trajectory).empty()) return false;
    }
    return true;
}

}  // namespace

CrossingWitness crossing_witness(const GeneratingFunction& f, const BifurcationDiagram& d, int curve,
                                 std::size_t vertex, const SplittingOptions& opts) {
    CrossingWitness w;
    w.curve = curve;
    const BifurcationCurve& c = d.strata.at(static_cast<std::size_t>(curve));
    if (c.points.size() < 2 || c.contexts.size() != c.points.size()) return w;
    const double delta = d.grid_step > 0.0 ? 0.1 * d.grid_step : 1e-3;

    // prefer a vertex clear of other strata and of the caustic
    std::size_t k = std::min(vertex, c.points.size() - 1);
    for (std::size_t off = 0; off < c.points.size(); ++off) {
        bool found = false;
        for (int sgn : {1, -1}) {
            const long cand = static_cast<long>(vertex) + sgn * static_cast<long>(off);
            if (cand < 0 || cand >= static_cast<long>(c.points.size())) continue;
            const Vec2 x = c.points[static_cast<std::size_t>(cand)];
            if (distance_to_other_curves(d, curve, x) > 4.0 * delta && d.caustic.distance_to(x) > 4.0 * delta) {
                k = static_cast<std::size_t>(cand);
                found = true;
                break;
            }
        }
        if (found) break;
    }
    const std::size_t ka = k > 0 ? k - 1 : k;
    const std::size_t kb = k + 1 < c.points.size() ? k + 1 : k;
    const Vec2 nrm = perp(normalized(c.points[kb] - c.points[ka]));
    w.x_on = c.points[k];
    w.x_minus = w.x_on - delta * nrm;
    w.x_plus = w.x_on + delta * nrm;

    const PairContext& ctx = c.contexts[k];
    const PhasePortrait pm = portrait(f, w.x_minus, d.fiber, opts.flow);
    const PhasePortrait pp = portrait(f, w.x_plus, d.fiber, opts.flow);
    w.signature_minus = pm.signature;
    w.signature_plus = pp.signature;
    if (pm.on_caustic || pp.on_caustic || pm.saddle_count() < 2 || pp.saddle_count() < 2) return w;

    const int im = nearest_point(pm, ctx.source(), true), jm = nearest_point(pm, ctx.target(), true);
    const int ip = nearest_point(pp, ctx.source(), true), jp = nearest_point(pp, ctx.target(), true);
    if (im == jm || ip == jp) return w;
    const BranchPair bm{aligned_branch(*pm.point(im), ctx.dir_unstable, true),
                        aligned_branch(*pm.point(jm), ctx.dir_stable, false)};
    const BranchPair bp{aligned_branch(*pp.point(ip), ctx.dir_unstable, true),
                        aligned_branch(*pp.point(jp), ctx.dir_stable, false)};

    // compare coarse limits branch by branch
    std::set<std::string> expected{"s" + std::to_string(im) + std::string(to_string(bm.unstable)),
                                   "s" + std::to_string(jm) + std::string(to_string(bm.stable))};
    bool subset = true;
    for (const auto& sep : pm.separatrices) {
        const CriticalPoint& s = *pm.point(sep.saddle_id);
        const int sp = nearest_point(pp, s.position, true);
        if (sp < 0) continue;
        const Branch b2 = aligned_branch(*pp.point(sp), direction_of(s, sep.branch), is_unstable(sep.branch));
        const Separatrix* other = pp.branch(sp, b2);
        if (!other) continue;
        bool same = sep.limit.kind == other->limit.kind;
        if (same && (sep.limit.kind == LimitKind::node || sep.limit.kind == LimitKind::saddle)) {
            same = nearest_point(pp, pm.point(sep.limit.id)->position, false) == other->limit.id;
        }
        if (!same) {
            const std::string rec = "s" + std::to_string(sep.saddle_id) + std::string(to_string(sep.branch));
            w.changed.push_back(rec);
            if (!expected.count(rec)) subset = false;
        }
    }
    w.toggle_ok = w.signature_minus != w.signature_plus && subset;
    w.admissible = admissible_side(pm, im, jm, bm, opts) && admissible_side(pp, ip, jp, bp, opts);
    return w;
}

ValidationReport validate_diagram(const BifurcationDiagram& d, const GeneratingFunction* f,
                                  const SplittingOptions& opts) {
    ValidationReport rep;
    std::vector<CrossingWitness> witnesses = d.witnesses;
    if (f) {
        witnesses.clear();
        for (std::size_t c = 0; c < d.strata.size(); ++c) {
            if (d.strata[c].points.size() < 2) continue;
            witnesses.push_back(crossing_witness(*f, d, static_cast<int>(c), d.strata[c].points.size() / 2, opts));
        }
    }

    // (a) no point lies on both B_ij and B_ji
    {
        CheckResult r{"exclusion", true, "", {}};
        for (std::size_t a = 0; a < d.strata.size(); ++a) {
            for (std::size_t b = 0; b < d.strata.size(); ++b) {
                const auto& ca = d.strata[a];
                const auto& cb = d.strata[b];
                if (ca.pair.first != cb.pair.second || ca.pair.second != cb.pair.first) continue;
                if (a > b) continue;
                for (Vec2 p : polyline_intersections(ca.points, cb.points)) r.witnesses.push_back(p);
                for (Vec2 p : ca.points) {
                    if (distance_to_polyline(p, cb.points) <= kIncidence) {
                        r.witnesses.push_back(p);
                        break;
                    }
                }
            }
        }
        if (!r.witnesses.empty()) {
            r.passed = false;
            r.message = "strata of opposite ordered pairs meet";
        }
        if (d.exclusion_violations > 0) {
            r.passed = false;
            r.message += (r.message.empty() ? "" : "; ") + std::to_string(d.exclusion_violations) +
                         " samples certify both orders of a pair";
        }
        rep.checks.push_back(r);
    }

    // (b) same ordered pair meets itself only with the same branch selection
    {
        CheckResult r{"same-pair", true, "", {}};
        for (std::size_t a = 0; a < d.strata.size(); ++a) {
            for (std::size_t b = a + 1; b < d.strata.size(); ++b) {
                const auto& ca = d.strata[a];
                const auto& cb = d.strata[b];
                if (ca.pair != cb.pair) continue;
                for (Vec2 p : polyline_intersections(ca.points, cb.points)) {
                    bool same = ca.branches == cb.branches;
                    if (!ca.contexts.empty() && !cb.contexts.empty()) {
                        const auto& va = ca.contexts[std::min(ca.contexts.size() - 1, static_cast<std::size_t>(
                            std::min_element(ca.points.begin(), ca.points.end(), [&](Vec2 u, Vec2 v) {
                                return distance(u, p) < distance(v, p);
                            }) - ca.points.begin()))];
                        const auto& vb = cb.contexts[std::min(cb.contexts.size() - 1, static_cast<std::size_t>(
                            std::min_element(cb.points.begin(), cb.points.end(), [&](Vec2 u, Vec2 v) {
                                return distance(u, p) < distance(v, p);
                            }) - cb.points.begin()))];
                        same = dot(va.dir_unstable, vb.dir_unstable) > 0.0 && dot(va.dir_stable, vb.dir_stable) > 0.0;
                    }
                    if (!same) r.witnesses.push_back(p);
                }
            }
        }
        if (!r.witnesses.empty()) {
            r.passed = false;
            r.message = "strata of one ordered pair with different branches intersect";
        }
        rep.checks.push_back(r);
    }

    // (c) the two connecting branches share a component of the other separatrices' complement
    {
        CheckResult r{"admissibility", true, "", {}};
        for (const auto& w : witnesses) {
            if (!w.admissible) r.witnesses.push_back(w.x_on);
        }
        if (!r.witnesses.empty()) {
            r.passed = false;
            r.message = "a separatrix separates the connecting branches";
        }
        rep.checks.push_back(r);
    }

    // (d) at most two simultaneous connections
    {
        CheckResult r{"triple-connection", true, "", {}};
        std::vector<Vec2> candidates;
        for (const auto& c2 : d.codim2_points) candidates.push_back(c2.x);
        for (std::size_t a = 0; a < d.strata.size(); ++a) {
            for (std::size_t b = a + 1; b < d.strata.size(); ++b) {
                for (Vec2 p : polyline_intersections(d.strata[a].points, d.strata[b].points)) candidates.push_back(p);
            }
        }
        for (Vec2 p : candidates) {
            int on = 0;
            for (const auto& c : d.strata) on += distance_to_polyline(p, c.points) <= kIncidence;
            if (on >= 3) r.witnesses.push_back(p);
        }
        if (!r.witnesses.empty()) {
            r.passed = false;
            r.message = "a point carries three or more connections";
        }
        rep.checks.push_back(r);
    }

    // (e) each crossing toggles only the connecting branches
    {
        CheckResult r{"transitions", true, "", {}};
        for (const auto& w : witnesses) {
            if (!w.toggle_ok) r.witnesses.push_back(w.x_on);
        }
        if (!r.witnesses.empty()) {
            r.passed = false;
            r.message = "stratum crossing changes unexpected separatrices";
        }
        rep.checks.push_back(r);
    }

    // (f) B_(i,j),(j,k) lies in the closure of B_ik
    {
        CheckResult r{"codim2-closure", true, "", {}};
        const double tol = d.grid_step > 0.0 ? 10.0 * d.grid_step : 1e-3;
        for (const auto& c2 : d.codim2_points) {
            std::pair<int, int> chain{-1, -1};
            if (c2.first.second == c2.second.first) chain = {c2.first.first, c2.second.second};
            if (c2.second.second == c2.first.first) chain = {c2.second.first, c2.first.second};
            if (chain.first < 0 || chain.first == chain.second) continue;
            bool near = false;
            for (const auto& c : d.strata) {
                if (c.pair == chain && distance_to_polyline(c2.x, c.points) < tol) near = true;
            }
            if (!near) r.witnesses.push_back(c2.x);
        }
        if (!r.witnesses.empty()) {
            r.passed = false;
            r.message = "codimension-2 point far from the composed stratum";
        }
        rep.checks.push_back(r);
    }

    // region signatures are constant on each component
    {
        CheckResult r{"regions", true, "", {}};
        for (const auto& reg : d.regions) {
            if (!reg.consistent) r.witnesses.push_back(reg.sample);
        }
        if (!r.witnesses.empty()) {
            r.passed = false;
            r.message = "region samples disagree with the representative signature";
        }
        rep.checks.push_back(r);
    }

    if (!d.unresolved.empty()) {
        rep.notes.push_back("unresolved boundaries: " + std::to_string(d.unresolved.size()) +
                            " grid edges change signature without a located stratum");
    }
    for (const auto& w : d.warnings) rep.notes.push_back(w);
    return rep;
}

}  // namespace gradbif
