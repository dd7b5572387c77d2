#include "gradbif/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace gradbif {

SymEigen eigen(const Sym2& m) {
    SymEigen out;
    const double half_trace = 0.5 * (m.xx + m.yy);
    const double half_diff = 0.5 * (m.xx - m.yy);
    const double r = std::hypot(half_diff, m.xy);
    out.values = {half_trace - r, half_trace + r};

    // Eigenvector of the larger eigenvalue via the half-angle formula,
    // stable for nearly diagonal matrices.
    Vec2 v_max;
    if (r == 0.0) {
        v_max = {1.0, 0.0};
    } else {
        const double angle = 0.5 * std::atan2(m.xy, half_diff);
        v_max = {std::cos(angle), std::sin(angle)};
    }
    out.vectors = {perp(v_max), v_max};
    return out;
}

std::optional<Vec2> solve(const Sym2& m, Vec2 rhs) {
    const double d = m.det();
    const double scale = std::max({std::abs(m.xx), std::abs(m.yy), std::abs(m.xy)});
    if (scale == 0.0 || std::abs(d) <= 1e-300 || std::abs(d) < 1e-14 * scale * scale) {
        return std::nullopt;
    }
    return Vec2{(m.yy * rhs.x - m.xy * rhs.y) / d, (m.xx * rhs.y - m.xy * rhs.x) / d};
}

void Window::validate(int min_resolution) const {
    if (!(half_width1 > 0.0) || !(half_width2 > 0.0) || !std::isfinite(half_width1) ||
        !std::isfinite(half_width2)) {
        throw std::invalid_argument("window half-widths must be positive and finite");
    }
    if (resolution1 < min_resolution || resolution2 < min_resolution) {
        throw std::invalid_argument("window resolution must be at least " +
                                    std::to_string(min_resolution));
    }
}

Polyline Window::boundary_loop(int points_per_side) const {
    Polyline loop;
    loop.reserve(4 * static_cast<std::size_t>(points_per_side));
    const std::array<Vec2, 4> corners = {
        Vec2{lo1(), lo2()}, Vec2{hi1(), lo2()}, Vec2{hi1(), hi2()}, Vec2{lo1(), hi2()}};
    for (int side = 0; side < 4; ++side) {
        const Vec2 a = corners[side];
        const Vec2 b = corners[(side + 1) % 4];
        for (int k = 0; k < points_per_side; ++k) {
            const double s = static_cast<double>(k) / points_per_side;
            loop.push_back(a + s * (b - a));
        }
    }
    return loop;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + s * ab);
}

double distance_to_polyline(Vec2 p, std::span<const Vec2> line, bool closed) {
    if (line.empty()) return std::numeric_limits<double>::infinity();
    if (line.size() == 1) return distance(p, line[0]);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < line.size(); ++k) {
        best = std::min(best, distance_to_segment(p, line[k], line[k + 1]));
    }
    if (closed) best = std::min(best, distance_to_segment(p, line.back(), line.front()));
    return best;
}

std::optional<Vec2> segment_intersection(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
    const Vec2 r = a1 - a0;
    const Vec2 s = b1 - b0;
    const double denom = cross(r, s);
    const double scale = norm(r) * norm(s);
    if (scale == 0.0 || std::abs(denom) <= 1e-14 * scale) return std::nullopt;
    const double t = cross(b0 - a0, s) / denom;
    const double u = cross(b0 - a0, r) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return a0 + t * r;
}

std::vector<Vec2> polyline_intersections(std::span<const Vec2> a, std::span<const Vec2> b) {
    std::vector<Vec2> hits;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        const double ax0 = std::min(a[i].x, a[i + 1].x), ax1 = std::max(a[i].x, a[i + 1].x);
        const double ay0 = std::min(a[i].y, a[i + 1].y), ay1 = std::max(a[i].y, a[i + 1].y);
        for (std::size_t j = 0; j + 1 < b.size(); ++j) {
            if (std::max(b[j].x, b[j + 1].x) < ax0 || std::min(b[j].x, b[j + 1].x) > ax1 ||
                std::max(b[j].y, b[j + 1].y) < ay0 || std::min(b[j].y, b[j + 1].y) > ay1) {
                continue;
            }
            if (auto p = segment_intersection(a[i], a[i + 1], b[j], b[j + 1])) {
                const bool dup = std::any_of(hits.begin(), hits.end(), [&](Vec2 q) {
                    return distance(q, *p) < 1e-12;
                });
                if (!dup) hits.push_back(*p);
            }
        }
    }
    return hits;
}

double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b) {
    double worst = 0.0;
    for (Vec2 p : a) worst = std::max(worst, distance_to_polyline(p, b));
    for (Vec2 p : b) worst = std::max(worst, distance_to_polyline(p, a));
    return worst;
}

}  // namespace gradbif
