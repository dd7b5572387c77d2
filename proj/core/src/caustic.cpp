#include "gradbif/caustic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gradbif/parallel.hpp"

namespace gradbif {

std::string_view to_string(CausticLabel label) {
    switch (label) {
        case CausticLabel::fold: return "fold";
        case CausticLabel::cusp: return "cusp";
        case CausticLabel::non_morse: return "non-morse";
    }
    return "unknown";
}

double CausticCurve::distance_to(Vec2 x) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < components.size(); ++k) {
        best = std::min(best, distance_to_polyline(x, components[k], closed[k]));
    }
    for (Vec2 p : non_morse_points) best = std::min(best, distance(x, p));
    return best;
}

Vec2 project_to_locus(const GeneratingFunction& f, Vec2 y, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
        const double d = f.hessian_det(y);
        if (d == 0.0) break;
        const Vec2 g = f.hessian_det_gradient(y);
        const double g2 = dot(g, g);
        if (g2 == 0.0) break;
        const Vec2 step = (d / g2) * g;
        y -= step;
        if (norm(step) <= 1e-15 * (1.0 + norm(y))) break;
    }
    return y;
}

namespace {

struct Grid {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> values;  // (i, j) -> values[j * nx + i]
    std::size_t nx = 0;
    std::size_t ny = 0;

    double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
    Vec2 node(std::size_t i, std::size_t j) const { return {xs[i], ys[j]}; }
};

std::vector<double> grid_lines(double lo, double hi, int cells, double jitter) {
    std::vector<double> out(static_cast<std::size_t>(cells) + 1);
    const double h = (hi - lo) / cells;
    for (int i = 0; i <= cells; ++i) {
        const double shift = (i > 0 && i < cells) ? jitter : 0.0;
        out[static_cast<std::size_t>(i)] = lo + h * (i + shift);
    }
    out.back() = hi;
    return out;
}

bool positive(double v) { return v >= 0.0; }

/// Sign changes of det on a small circle; 0 for an isolated zero.
int sign_changes_around(const GeneratingFunction& f, Vec2 c, double r) {
    constexpr int kSamples = 64;
    int changes = 0;
    bool prev = positive(f.hessian_det(c + Vec2{r, 0.0}));
    for (int k = 1; k <= kSamples; ++k) {
        const double a = 2.0 * std::numbers::pi * k / kSamples;
        const bool cur = positive(f.hessian_det(c + r * Vec2{std::cos(a), std::sin(a)}));
        if (cur != prev) ++changes;
        prev = cur;
    }
    return changes;
}

struct Graph {
    std::vector<Vec2> pos;
    std::vector<bool> junction;
    std::vector<std::vector<int>> adj;

    int add(Vec2 p, bool is_junction = false) {
        pos.push_back(p);
        junction.push_back(is_junction);
        adj.emplace_back();
        return static_cast<int>(pos.size()) - 1;
    }
    void link(int a, int b) {
        if (a == b) return;
        if (std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end()) return;
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
};

struct Chain {
    std::vector<int> ids;
    bool closed = false;
    bool alive = true;
};

std::vector<Chain> extract_chains(const Graph& g) {
    std::vector<Chain> chains;
    std::vector<std::vector<bool>> used(g.adj.size());
    for (std::size_t v = 0; v < g.adj.size(); ++v) used[v].assign(g.adj[v].size(), false);
    auto mark = [&](int a, int b) {
        for (std::size_t k = 0; k < g.adj[a].size(); ++k) {
            if (g.adj[a][k] == b) used[a][k] = true;
        }
        for (std::size_t k = 0; k < g.adj[b].size(); ++k) {
            if (g.adj[b][k] == a) used[b][k] = true;
        }
    };
    auto walk = [&](int start, std::size_t slot) {
        Chain c;
        c.ids.push_back(start);
        int prev = start;
        int cur = g.adj[start][slot];
        mark(prev, cur);
        for (;;) {
            c.ids.push_back(cur);
            if (cur == start) {
                c.ids.pop_back();
                c.closed = true;
                break;
            }
            if (g.adj[cur].size() != 2 || g.junction[cur]) break;
            const int next = g.adj[cur][0] == prev ? g.adj[cur][1] : g.adj[cur][0];
            mark(cur, next);
            prev = cur;
            cur = next;
        }
        return c;
    };
    for (std::size_t v = 0; v < g.adj.size(); ++v) {
        if (g.adj[v].size() == 2 && !g.junction[v]) continue;
        for (std::size_t k = 0; k < g.adj[v].size(); ++k) {
            if (!used[v][k]) chains.push_back(walk(static_cast<int>(v), k));
        }
    }
    for (std::size_t v = 0; v < g.adj.size(); ++v) {
        for (std::size_t k = 0; k < g.adj[v].size(); ++k) {
            if (!used[v][k]) chains.push_back(walk(static_cast<int>(v), k));
        }
    }
    return chains;
}

/// Joins chains meeting at a junction into straight-through pairs.
void merge_at_junctions(const Graph& g, std::vector<Chain>& chains) {
    auto end_direction = [&](const Chain& c, bool at_front) {
        const std::size_t n = c.ids.size();
        const std::size_t steps = std::min<std::size_t>(3, n - 1);
        const int j = at_front ? c.ids.front() : c.ids.back();
        const int o = at_front ? c.ids[steps] : c.ids[n - 1 - steps];
        return normalized(g.pos[o] - g.pos[j]);
    };
    for (;;) {
        bool merged = false;
        for (std::size_t v = 0; v < g.pos.size() && !merged; ++v) {
            if (!g.junction[v]) continue;
            struct End {
                std::size_t chain;
                bool front;
                Vec2 dir;
            };
            std::vector<End> ends;
            for (std::size_t c = 0; c < chains.size(); ++c) {
                const Chain& ch = chains[c];
                if (!ch.alive || ch.closed || ch.ids.size() < 2) continue;
                if (ch.ids.front() == static_cast<int>(v)) ends.push_back({c, true, end_direction(ch, true)});
                if (ch.ids.back() == static_cast<int>(v)) ends.push_back({c, false, end_direction(ch, false)});
            }
            if (ends.size() < 2) continue;
            double best = std::numeric_limits<double>::infinity();
            std::size_t ba = 0, bb = 1;
            for (std::size_t a = 0; a < ends.size(); ++a) {
                for (std::size_t b = a + 1; b < ends.size(); ++b) {
                    const double d = dot(ends[a].dir, ends[b].dir);
                    if (d < best) {
                        best = d;
                        ba = a;
                        bb = b;
                    }
                }
            }
            if (best > 0.0) continue;  // no straight continuation
            const End ea = ends[ba];
            const End eb = ends[bb];
            if (ea.chain == eb.chain) {
                Chain& ch = chains[ea.chain];
                ch.ids.pop_back();
                ch.closed = true;
            } else {
                Chain& a = chains[ea.chain];
                Chain& b = chains[eb.chain];
                // orient a to end at v and b to start at v
                if (ea.front) std::reverse(a.ids.begin(), a.ids.end());
                std::vector<int> tail = b.ids;
                if (!eb.front) std::reverse(tail.begin(), tail.end());
                a.ids.insert(a.ids.end(), tail.begin() + 1, tail.end());
                b.alive = false;
            }
            merged = true;
        }
        if (!merged) break;
    }
}

}  // namespace

CriticalLocus critical_locus(const GeneratingFunction& f, const Window& w, const LocusOptions& opts) {
    w.validate(16);
    CriticalLocus out;

    Grid grid;
    grid.xs = grid_lines(w.lo1(), w.hi1(), w.resolution1, opts.grid_jitter);
    grid.ys = grid_lines(w.lo2(), w.hi2(), w.resolution2, opts.grid_jitter);
    grid.nx = grid.xs.size();
    grid.ny = grid.ys.size();
    grid.values.resize(grid.nx * grid.ny);
    parallel_for(grid.ny, opts.workers, [&](std::size_t j) {
        for (std::size_t i = 0; i < grid.nx; ++i) {
            grid.values[j * grid.nx + i] = f.hessian_det(grid.node(i, j));
        }
    });

    const double h1 = 2.0 * w.half_width1 / w.resolution1;
    const double h2 = 2.0 * w.half_width2 / w.resolution2;
    const double cell = std::min(h1, h2);
    const std::size_t cx = grid.nx - 1;
    const std::size_t cy = grid.ny - 1;

    // Singular points of the zero set: Newton on grad(det) = 0 seeded at
    // saddle-configuration cells and at discrete extrema of det.
    std::vector<Vec2> seeds;
    for (std::size_t j = 0; j < cy; ++j) {
        for (std::size_t i = 0; i < cx; ++i) {
            const bool s0 = positive(grid.at(i, j)), s1 = positive(grid.at(i + 1, j));
            const bool s2 = positive(grid.at(i + 1, j + 1)), s3 = positive(grid.at(i, j + 1));
            if (s0 == s2 && s1 == s3 && s0 != s1) {
                seeds.push_back(0.5 * (grid.node(i, j) + grid.node(i + 1, j + 1)));
            }
        }
    }
    for (std::size_t j = 1; j + 1 < grid.ny; ++j) {
        for (std::size_t i = 1; i + 1 < grid.nx; ++i) {
            const double v = grid.at(i, j);
            bool is_min = true, is_max = true;
            for (int dj = -1; dj <= 1; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    if (di == 0 && dj == 0) continue;
                    const double u = grid.at(i + di, j + dj);
                    if (u <= v) is_min = false;
                    if (u >= v) is_max = false;
                }
            }
            if (is_min || is_max) seeds.push_back(grid.node(i, j));
        }
    }
    std::vector<Vec2> singular;
    for (Vec2 y : seeds) {
        bool converged = false;
        for (int it = 0; it < 60; ++it) {
            const auto step = solve(f.hessian_det_hessian(y), f.hessian_det_gradient(y));
            if (!step) break;
            y -= *step;
            if (norm(*step) <= 1e-14 * (1.0 + norm(y))) {
                converged = true;
                break;
            }
        }
        if (!converged || !w.contains(y)) continue;
        if (std::abs(f.hessian_det(y)) > opts.tol_singular) continue;
        const bool dup = std::any_of(singular.begin(), singular.end(),
                                     [&](Vec2 q) { return distance(q, y) < 1e-8 * (1.0 + cell); });
        if (!dup) singular.push_back(y);
    }
    for (Vec2 s : singular) {
        if (sign_changes_around(f, s, 0.25 * cell) == 0) {
            out.degenerate_points.push_back(s);
        } else {
            out.junctions.push_back(s);
        }
    }

    // Marching squares.
    Graph g;
    std::vector<int> hedge(grid.nx * grid.ny, -1);  // (i,j)-(i+1,j)
    std::vector<int> vedge(grid.nx * grid.ny, -1);  // (i,j)-(i,j+1)
    auto crossing = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
        const double v0 = grid.at(i0, j0), v1 = grid.at(i1, j1);
        const double t = v0 / (v0 - v1);
        return grid.node(i0, j0) + t * (grid.node(i1, j1) - grid.node(i0, j0));
    };
    auto hvertex = [&](std::size_t i, std::size_t j) {
        int& id = hedge[j * grid.nx + i];
        if (id < 0) id = g.add(crossing(i, j, i + 1, j));
        return id;
    };
    auto vvertex = [&](std::size_t i, std::size_t j) {
        int& id = vedge[j * grid.nx + i];
        if (id < 0) id = g.add(crossing(i, j, i, j + 1));
        return id;
    };
    std::vector<int> junction_ids;
    for (Vec2 s : out.junctions) junction_ids.push_back(g.add(s, true));
    auto cell_of = [&](Vec2 p) {
        const auto ix = std::upper_bound(grid.xs.begin(), grid.xs.end(), p.x) - grid.xs.begin() - 1;
        const auto iy = std::upper_bound(grid.ys.begin(), grid.ys.end(), p.y) - grid.ys.begin() - 1;
        return std::pair<std::size_t, std::size_t>(
            static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(ix, 0, static_cast<std::ptrdiff_t>(cx) - 1)),
            static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(iy, 0, static_cast<std::ptrdiff_t>(cy) - 1)));
    };
    std::vector<int> junction_cell(cx * cy, -1);
    for (std::size_t k = 0; k < out.junctions.size(); ++k) {
        auto [i, j] = cell_of(out.junctions[k]);
        junction_cell[j * cx + i] = junction_ids[k];
    }

    int ambiguous_cells = 0;
    for (std::size_t j = 0; j < cy; ++j) {
        for (std::size_t i = 0; i < cx; ++i) {
            const bool s0 = positive(grid.at(i, j)), s1 = positive(grid.at(i + 1, j));
            const bool s2 = positive(grid.at(i + 1, j + 1)), s3 = positive(grid.at(i, j + 1));
            std::array<int, 4> e{-1, -1, -1, -1};  // bottom, right, top, left
            if (s0 != s1) e[0] = hvertex(i, j);
            if (s1 != s2) e[1] = vvertex(i + 1, j);
            if (s3 != s2) e[2] = hvertex(i, j + 1);
            if (s0 != s3) e[3] = vvertex(i, j);
            const int count = static_cast<int>(std::count_if(e.begin(), e.end(), [](int v) { return v >= 0; }));
            if (count == 0) continue;
            if (const int jid = junction_cell[j * cx + i]; jid >= 0) {
                for (int v : e) {
                    if (v >= 0) g.link(jid, v);
                }
                continue;
            }
            if (count == 2) {
                int a = -1;
                for (int v : e) {
                    if (v < 0) continue;
                    if (a < 0) {
                        a = v;
                    } else {
                        g.link(a, v);
                    }
                }
            } else if (count == 4) {
                const Vec2 c = 0.5 * (grid.node(i, j) + grid.node(i + 1, j + 1));
                const double vc = f.hessian_det(c);
                const double scale = std::max({std::abs(grid.at(i, j)), std::abs(grid.at(i + 1, j)),
                                               std::abs(grid.at(i + 1, j + 1)), std::abs(grid.at(i, j + 1))});
                if (std::abs(vc) < 1e-12 * scale) ++ambiguous_cells;
                if (positive(vc) == s0) {
                    g.link(e[0], e[1]);  // isolate corner 1
                    g.link(e[2], e[3]);  // isolate corner 3
                } else {
                    g.link(e[3], e[0]);  // isolate corner 0
                    g.link(e[1], e[2]);  // isolate corner 2
                }
            }
        }
    }

    // Newton refinement of every crossing vertex.
    int unconverged = 0;
    for (std::size_t v = 0; v < g.pos.size(); ++v) {
        if (g.junction[v]) continue;
        g.pos[v] = project_to_locus(f, g.pos[v]);
        if (std::abs(f.hessian_det(g.pos[v])) > opts.tol_locus) ++unconverged;
    }

    std::vector<Chain> chains = extract_chains(g);
    merge_at_junctions(g, chains);
    for (const Chain& c : chains) {
        if (!c.alive || c.ids.empty()) continue;
        Polyline line;
        for (int id : c.ids) {
            if (!line.empty() && distance(line.back(), g.pos[id]) <= 1e-14 * (1.0 + norm(line.back()))) continue;
            line.push_back(g.pos[id]);
        }
        if (line.size() < 2) continue;
        out.components.push_back(std::move(line));
        out.closed.push_back(c.closed);
    }

    // Deterministic ordering: by lexicographically smallest vertex.
    std::vector<std::size_t> order(out.components.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    auto key = [&](std::size_t k) {
        const auto& line = out.components[k];
        return *std::min_element(line.begin(), line.end(), [](Vec2 a, Vec2 b) {
            return std::pair(a.x, a.y) < std::pair(b.x, b.y);
        });
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Vec2 ka = key(a), kb = key(b);
        return std::pair(ka.x, ka.y) < std::pair(kb.x, kb.y);
    });
    CriticalLocus sorted = out;
    for (std::size_t k = 0; k < order.size(); ++k) {
        sorted.components[k] = out.components[order[k]];
        sorted.closed[k] = out.closed[order[k]];
    }
    out = std::move(sorted);

    for (const auto& line : out.components) {
        if (line.size() < 6) out.coarse_warning = true;
    }
    if (ambiguous_cells > 0) out.coarse_warning = true;
    if (out.coarse_warning) {
        out.warnings.push_back("grid resolution may be too coarse to separate locus components");
    }
    if (unconverged > 0) {
        out.warnings.push_back(std::to_string(unconverged) +
                               " locus vertices did not reach the refinement tolerance");
    }
    return out;
}

CausticCurve push_forward(const GeneratingFunction& f, const CriticalLocus& locus) {
    CausticCurve out;
    out.closed = locus.closed;
    out.preimages = locus.components;
    for (const auto& line : locus.components) {
        Polyline image;
        image.reserve(line.size());
        for (Vec2 y : line) image.push_back(f.gradient(y));
        out.components.push_back(std::move(image));
    }
    for (Vec2 y : locus.degenerate_points) out.non_morse_points.push_back(f.gradient(y));
    for (Vec2 y : locus.junctions) out.non_morse_points.push_back(f.gradient(y));
    out.coarse_warning = locus.coarse_warning;
    out.warnings = locus.warnings;
    return out;
}

namespace {

struct VertexFrame {
    bool degenerate = false;
    Vec2 kernel;
    Vec2 normal;
};

VertexFrame frame_at(const GeneratingFunction& f, Vec2 y) {
    VertexFrame fr;
    const Sym2 h = f.hessian(y);
    const SymEigen e = eigen(h);
    const Vec2 gd = f.hessian_det_gradient(y);
    const double big = std::max(std::abs(e.values[0]), std::abs(e.values[1]));
    if (big < 1e-9 || norm(gd) == 0.0) {
        fr.degenerate = true;
        return fr;
    }
    fr.kernel = std::abs(e.values[0]) <= std::abs(e.values[1]) ? e.vectors[0] : e.vectors[1];
    fr.normal = normalized(gd);
    return fr;
}

/// Tangency indicator k . n with k aligned to `reference`.
double tangency(const VertexFrame& fr, Vec2 reference) {
    const Vec2 k = dot(fr.kernel, reference) < 0.0 ? -fr.kernel : fr.kernel;
    return dot(k, fr.normal);
}

}  // namespace

CausticCurve classify_caustic(const GeneratingFunction& f, const CriticalLocus& locus,
                              const LocusOptions& opts) {
    (void)opts;
    CausticCurve base = push_forward(f, locus);
    CausticCurve out;
    out.non_morse_points = base.non_morse_points;
    out.coarse_warning = base.coarse_warning;
    out.warnings = base.warnings;

    auto is_junction = [&](Vec2 y) {
        return std::any_of(locus.junctions.begin(), locus.junctions.end(),
                           [&](Vec2 j) { return j == y; });
    };

    for (std::size_t c = 0; c < locus.components.size(); ++c) {
        const Polyline& line = locus.components[c];
        const bool closed = locus.closed[c];
        const std::size_t n = line.size();
        std::vector<VertexFrame> frames(n);
        for (std::size_t k = 0; k < n; ++k) {
            frames[k] = frame_at(f, line[k]);
            if (is_junction(line[k])) frames[k].degenerate = true;
        }

        Polyline pre;
        std::vector<CausticLabel> labels;
        const std::size_t edges = closed ? n : n - 1;
        for (std::size_t k = 0; k < n; ++k) {
            pre.push_back(line[k]);
            labels.push_back(frames[k].degenerate ? CausticLabel::non_morse : CausticLabel::fold);
            if (k >= edges) continue;
            const std::size_t k1 = (k + 1) % n;
            const VertexFrame& fa = frames[k];
            const VertexFrame& fb = frames[k1];
            if (fa.degenerate || fb.degenerate) continue;
            const double ga = tangency(fa, fa.kernel);
            const double gb = tangency(fb, fa.kernel);
            if (ga * gb >= 0.0) continue;

            // Golden-section minimization of |k . n| along the projected edge.
            const Vec2 p = line[k];
            const Vec2 q = line[k1];
            const double len = distance(p, q);
            auto objective = [&](double s) {
                const Vec2 y = project_to_locus(f, p + s * (q - p));
                const VertexFrame fr = frame_at(f, y);
                if (fr.degenerate) return 0.0;
                return std::abs(tangency(fr, fa.kernel));
            };
            const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
            double lo = 0.0, hi = 1.0;
            double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
            double f1 = objective(m1), f2 = objective(m2);
            while ((hi - lo) * len > 1e-10 && hi - lo > 1e-15) {
                if (f1 < f2) {
                    hi = m2;
                    m2 = m1;
                    f2 = f1;
                    m1 = hi - phi * (hi - lo);
                    f1 = objective(m1);
                } else {
                    lo = m1;
                    m1 = m2;
                    f1 = f2;
                    m2 = lo + phi * (hi - lo);
                    f2 = objective(m2);
                }
            }
            const Vec2 cusp_pre = project_to_locus(f, p + 0.5 * (lo + hi) * (q - p));
            pre.push_back(cusp_pre);
            labels.push_back(CausticLabel::cusp);
            out.cusp_preimages.push_back(cusp_pre);
            out.cusp_points.push_back(f.gradient(cusp_pre));
        }
        Polyline image;
        image.reserve(pre.size());
        for (Vec2 y : pre) image.push_back(f.gradient(y));
        out.components.push_back(std::move(image));
        out.preimages.push_back(std::move(pre));
        out.labels.push_back(std::move(labels));
        out.closed.push_back(closed);
    }
    return out;
}

CausticCurve compute_caustic(const GeneratingFunction& f, const Window& w, const LocusOptions& opts) {
    return classify_caustic(f, critical_locus(f, w, opts), opts);
}

std::vector<CausticCurve> pyramid_slices(const std::vector<double>& t_values, const Window& w,
                                         const LocusOptions& opts) {
    std::vector<CausticCurve> out;
    out.reserve(t_values.size());
    for (double t : t_values) out.push_back(compute_caustic(elliptic_umbilic_slice(t), w, opts));
    return out;
}

}  // namespace gradbif
