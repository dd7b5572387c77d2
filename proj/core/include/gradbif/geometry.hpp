#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace gradbif {

/// Point or vector in a 2D plane (fiber or base).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
/// Counter-clockwise rotation by 90 degrees.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 normalized(Vec2 a) {
    const double n = norm(a);
    return n > 0.0 ? a / n : a;
}

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    constexpr double det() const { return xx * yy - xy * xy; }
    constexpr double trace() const { return xx + yy; }
    constexpr Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    friend constexpr bool operator==(const Sym2&, const Sym2&) = default;
};

/// Eigen-decomposition of a symmetric 2x2 matrix; values ascending,
/// vectors unit length and mutually orthogonal.
struct SymEigen {
    std::array<double, 2> values{};
    std::array<Vec2, 2> vectors{};
};

SymEigen eigen(const Sym2& m);

/// Solves m * out = rhs; nullopt when m is numerically singular.
std::optional<Vec2> solve(const Sym2& m, Vec2 rhs);

using Polyline = std::vector<Vec2>;

/// Axis-aligned rectangle with a sampling resolution per axis.
struct Window {
    Vec2 center;
    double half_width1 = 1.0;
    double half_width2 = 1.0;
    int resolution1 = 64;
    int resolution2 = 64;

    static Window square(Vec2 center, double half_width, int resolution = 64) {
        return {center, half_width, half_width, resolution, resolution};
    }

    double lo1() const { return center.x - half_width1; }
    double hi1() const { return center.x + half_width1; }
    double lo2() const { return center.y - half_width2; }
    double hi2() const { return center.y + half_width2; }
    bool contains(Vec2 p) const {
        return p.x >= lo1() && p.x <= hi1() && p.y >= lo2() && p.y <= hi2();
    }
    double diameter() const { return 2.0 * std::hypot(half_width1, half_width2); }

    /// Throws std::invalid_argument unless half-widths are positive and
    /// `min_resolution` <= resolution on both axes.
    void validate(int min_resolution = 16) const;

    /// Closed counter-clockwise loop along the boundary (first point not repeated).
    Polyline boundary_loop(int points_per_side) const;
};

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
double distance_to_polyline(Vec2 p, std::span<const Vec2> line, bool closed = false);

/// Proper or touching intersection of segments [a0,a1] and [b0,b1].
std::optional<Vec2> segment_intersection(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

/// All intersection points between two open polylines.
std::vector<Vec2> polyline_intersections(std::span<const Vec2> a, std::span<const Vec2> b);

/// Symmetric Hausdorff distance between the vertex sets of two polylines,
/// measured against the segments of the other polyline.
double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b);

}  // namespace gradbif
