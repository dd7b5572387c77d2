#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gradbif/flow.hpp"

namespace gradbif {

namespace {

int branch_slot(Branch b) { return static_cast<int>(b); }

std::string census_prefix(const PhasePortrait& p) {
    int un = 0, sn = 0, sd = 0;
    for (const auto& c : p.critical_points) {
        un += c.kind == PointKind::unstable_node;
        sn += c.kind == PointKind::stable_node;
        sd += c.kind == PointKind::saddle;
    }
    return "U" + std::to_string(un) + "D" + std::to_string(sn) + "S" + std::to_string(sd);
}

struct Exit {
    int saddle;
    Branch branch;
    double angle;
    const Separatrix* sep;
};

// +1 if trajectory b runs on the left of a (counterclockwise after a where
// both leave the window), -1 if on the right, 0 if never separated.
int side_of(const Polyline& a, const Polyline& b, double gap) {
    for (std::size_t kb = b.size(); kb-- > 0;) {
        const Vec2 q = b[kb];
        double best = std::numeric_limits<double>::infinity();
        std::size_t seg = 0;
        double t_best = 0.0;
        for (std::size_t k = 0; k + 1 < a.size(); ++k) {
            const Vec2 d = a[k + 1] - a[k];
            const double len2 = dot(d, d);
            const double t = len2 > 0.0 ? std::clamp(dot(q - a[k], d) / len2, 0.0, 1.0) : 0.0;
            const double dist = distance(q, a[k] + t * d);
            if (dist < best) {
                best = dist;
                seg = k;
                t_best = t;
            }
        }
        if (best > gap && !(seg == 0 && t_best == 0.0)) {
            const Vec2 d = a[seg + 1] - a[seg];
            const double c = cross(d, q - (a[seg] + t_best * d));
            return c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
        }
    }
    return 0;
}

// Exits in counterclockwise order around the window centre. Exits that
// leave through nearly the same boundary point are ordered by which side
// of each other their trajectories run.
std::vector<Exit> cyclic_exits(const PhasePortrait& p) {
    std::vector<Exit> exits;
    std::vector<const Separatrix*> owner;
    for (const auto& s : p.separatrices) {
        if (s.limit.kind != LimitKind::window_exit || s.trajectory.empty()) continue;
        const Vec2 d = s.trajectory.back() - p.window.center;
        exits.push_back({s.saddle_id, s.branch, std::atan2(d.y, d.x), &s});
    }
    std::sort(exits.begin(), exits.end(), [](const Exit& a, const Exit& b) {
        if (a.angle != b.angle) return a.angle < b.angle;
        return std::pair(a.saddle, branch_slot(a.branch)) < std::pair(b.saddle, branch_slot(b.branch));
    });
    const std::size_t n = exits.size();
    if (n < 2) return exits;
    const double scale = std::max(p.window.half_width1, p.window.half_width2);
    const double cluster = 1e-2 * scale;
    const double gap = 1e-5 * scale;
    auto close = [&](const Exit& a, const Exit& b) {
        return distance(a.sep->trajectory.back(), b.sep->trajectory.back()) < cluster;
    };
    // rotate so that no cluster straddles the start of the sequence
    std::size_t start = 0;
    while (start < n && close(exits[(start + n - 1) % n], exits[start])) ++start;
    if (start == n) start = 0;
    std::rotate(exits.begin(), exits.begin() + static_cast<std::ptrdiff_t>(start), exits.end());
    for (std::size_t lo = 0; lo < n;) {
        std::size_t hi = lo + 1;
        while (hi < n && close(exits[hi - 1], exits[hi])) ++hi;
        // insertion sort inside the cluster by the side test
        for (std::size_t k = lo + 1; k < hi; ++k) {
            for (std::size_t m = k; m > lo; --m) {
                const int side = side_of(exits[m - 1].sep->trajectory, exits[m].sep->trajectory, gap);
                if (side >= 0) break;
                std::swap(exits[m - 1], exits[m]);
            }
        }
        lo = hi;
    }
    return exits;
}

// A relabeling: saddle id -> canonical index, and per saddle a flip of the
// unstable and stable pairs.
struct Labeling {
    std::map<int, int> saddle;
    std::map<int, bool> flip_u, flip_s;
};

class Canonicalizer {
public:
    explicit Canonicalizer(const PhasePortrait& p) : p_(p), exits_(cyclic_exits(p)) {
        for (const auto& c : p.critical_points) {
            if (c.is_saddle()) saddles_.push_back(c.id);
        }
    }

    std::string run() {
        best_.clear();
        if (exits_.empty()) {
            complete(Labeling{});
        } else {
            for (std::size_t r = 0; r < exits_.size(); ++r) complete(seed_from_rotation(r));
        }
        return best_;
    }

private:
    Labeling seed_from_rotation(std::size_t r) const {
        Labeling l;
        for (std::size_t k = 0; k < exits_.size(); ++k) {
            const Exit& e = exits_[(r + k) % exits_.size()];
            if (!l.saddle.count(e.saddle)) {
                const int next = static_cast<int>(l.saddle.size());
                l.saddle[e.saddle] = next;
            }
            auto& flips = is_unstable(e.branch) ? l.flip_u : l.flip_s;
            if (!flips.count(e.saddle)) {
                flips[e.saddle] = e.branch == Branch::unstable_minus || e.branch == Branch::stable_minus;
            }
        }
        return l;
    }

    void complete(Labeling l) {
        std::vector<int> free;
        for (int s : saddles_) {
            if (!l.saddle.count(s)) free.push_back(s);
        }
        std::sort(free.begin(), free.end());
        do {
            Labeling full = l;
            for (int s : free) {
                const int next = static_cast<int>(full.saddle.size());
                full.saddle[s] = next;
            }
            std::vector<std::map<int, bool>*> slots;
            std::vector<int> owners;
            for (int s : saddles_) {
                if (!full.flip_u.count(s)) { slots.push_back(&full.flip_u); owners.push_back(s); }
                if (!full.flip_s.count(s)) { slots.push_back(&full.flip_s); owners.push_back(s); }
            }
            const unsigned combos = 1u << slots.size();
            for (unsigned mask = 0; mask < combos; ++mask) {
                for (std::size_t k = 0; k < slots.size(); ++k) (*slots[k])[owners[k]] = (mask >> k) & 1u;
                const std::string enc = encode(full);
                if (best_.empty() || enc < best_) best_ = enc;
            }
        } while (std::next_permutation(free.begin(), free.end()));
    }

    std::string branch_label(const Labeling& l, int saddle, Branch b) const {
        const bool unstable = is_unstable(b);
        const bool minus = b == Branch::unstable_minus || b == Branch::stable_minus;
        const bool flipped = unstable ? l.flip_u.at(saddle) : l.flip_s.at(saddle);
        return "S" + std::to_string(l.saddle.at(saddle)) + (unstable ? "u" : "s") +
               ((minus != flipped) ? "-" : "+");
    }

    std::string encode(const Labeling& l) const {
        // records ordered by canonical saddle index and canonical branch
        std::vector<std::pair<std::string, const Separatrix*>> recs;
        for (const auto& s : p_.separatrices) recs.emplace_back(branch_label(l, s.saddle_id, s.branch), &s);
        std::sort(recs.begin(), recs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::map<int, int> nodes;
        std::string out;
        for (const auto& [label, s] : recs) {
            out += label;
            out += ':';
            switch (s->limit.kind) {
                case LimitKind::node: {
                    auto [it, inserted] = nodes.emplace(s->limit.id, static_cast<int>(nodes.size()));
                    out += "n" + std::to_string(it->second);
                    break;
                }
                case LimitKind::saddle: out += "S" + std::to_string(l.saddle.at(s->limit.id)); break;
                case LimitKind::window_exit: out += "x"; break;
                case LimitKind::max_steps: out += "?"; break;
            }
            out += ';';
        }
        std::string cyc;
        for (std::size_t r = 0; r < exits_.size(); ++r) {
            std::string seq;
            for (std::size_t k = 0; k < exits_.size(); ++k) {
                const Exit& e = exits_[(r + k) % exits_.size()];
                seq += branch_label(l, e.saddle, e.branch) + ",";
            }
            if (r == 0 || seq < cyc) cyc = seq;
        }
        return out + "|" + cyc;
    }

    const PhasePortrait& p_;
    std::vector<Exit> exits_;
    std::vector<int> saddles_;
    std::string best_;
};

std::string limit_label(const Limit& l) {
    switch (l.kind) {
        case LimitKind::node: return "n" + std::to_string(l.id);
        case LimitKind::saddle: return "s" + std::to_string(l.id);
        case LimitKind::window_exit: return "exit";
        case LimitKind::max_steps: return "max-steps";
    }
    return "?";
}

}  // namespace

void compute_signatures(PhasePortrait& p) {
    if (p.critical_points.empty()) {
        p.signature = p.canonical_signature = "∅";
        return;
    }
    const std::string prefix = census_prefix(p);
    if (p.on_caustic) {
        p.signature = p.canonical_signature = "on-caustic:" + prefix;
        return;
    }

    const auto exits = cyclic_exits(p);
    std::vector<std::string> records;
    for (const auto& s : p.separatrices) {
        std::string lim = limit_label(s.limit);
        if (s.limit.kind == LimitKind::window_exit) {
            // annotate with the next exit counterclockwise
            const auto it = std::find_if(exits.begin(), exits.end(), [&](const Exit& e) {
                return e.saddle == s.saddle_id && e.branch == s.branch;
            });
            const Exit& nx = exits[(static_cast<std::size_t>(it - exits.begin()) + 1) % exits.size()];
            lim += ">s" + std::to_string(nx.saddle) + std::string(to_string(nx.branch));
        }
        records.push_back("(s" + std::to_string(s.saddle_id) + "," + std::string(to_string(s.branch)) +
                          "," + lim + ")");
    }
    std::sort(records.begin(), records.end());
    std::string sig = prefix + ":";
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (k) sig += ";";
        sig += records[k];
    }
    p.signature = sig;
    p.canonical_signature = prefix + ":" + Canonicalizer(p).run();
}

}  // namespace gradbif
