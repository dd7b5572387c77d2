#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "gradbif/caustic.hpp"
#include "oracles.hpp"

using namespace gradbif;

namespace {

// Cusps of the slice caustic from the image of the parametrized critical
// circle: zeros of |d/dtheta grad f(y(theta))| on a dense theta grid.
std::vector<Vec2> slice_cusps_oracle(double t) {
    const oracle::EllipticSlice f{t};
    const double r = std::abs(t) / 2.0;
    auto image = [&](double th) {
        return f.grad({-t / 2.0 + r * std::cos(th), r * std::sin(th)});
    };
    auto speed = [&](double th) {
        const double h = 1e-7;
        const auto a = image(th + h), b = image(th - h);
        return std::hypot(a.x - b.x, a.y - b.y) / (2 * h);
    };
    std::vector<Vec2> out;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const double th = 2 * std::numbers::pi * k / n, d = 2 * std::numbers::pi / n;
        if (speed(th) < speed(th - d) && speed(th) <= speed(th + d)) {
            double lo = th - d, hi = th + d;
            for (int it = 0; it < 200; ++it) {  // golden section
                const double m1 = hi - (hi - lo) / std::numbers::phi, m2 = lo + (hi - lo) / std::numbers::phi;
                (speed(m1) < speed(m2) ? hi : lo) = (speed(m1) < speed(m2) ? m2 : m1);
            }
            const auto p = image(0.5 * (lo + hi));
            out.push_back({p.x, p.y});
        }
    }
    return out;
}

double nearest(Vec2 p, const std::vector<Vec2>& set) {
    double best = 1e300;
    for (Vec2 q : set) best = std::min(best, distance(p, q));
    return best;
}

}  // namespace

TEST_CASE("critical locus of the hyperbolic umbilic is the two axes") {
    const auto locus = critical_locus(normal_form(NormalForm::hyperbolic_umbilic), Window::square({0, 0}, 2.0, 64));
    REQUIRE(locus.components.size() == 2);
    int on_y1_axis = 0, on_y2_axis = 0;
    for (const auto& comp : locus.components) {
        double dev1 = 0, dev2 = 0;
        for (Vec2 y : comp) {
            dev1 = std::max(dev1, std::abs(y.x));
            dev2 = std::max(dev2, std::abs(y.y));
        }
        on_y1_axis += dev1 <= 1e-8;
        on_y2_axis += dev2 <= 1e-8;
    }
    CHECK(on_y1_axis == 1);
    CHECK(on_y2_axis == 1);
}

TEST_CASE("critical locus of the unperturbed elliptic umbilic is the origin") {
    const auto locus = critical_locus(normal_form(NormalForm::elliptic_umbilic), Window::square({0, 0}, 1.0, 64));
    CHECK(locus.components.empty());
    REQUIRE(locus.degenerate_points.size() == 1);
    CHECK(norm(locus.degenerate_points[0]) <= 1e-6);
}

TEST_CASE("critical locus of elliptic + y1^2 is the predicted circle") {
    const auto f = elliptic_umbilic_slice(1.0);
    const auto locus = critical_locus(f, Window::square({0, 0}, 2.0, 128));
    REQUIRE(locus.components.size() == 1);
    CHECK(locus.closed[0]);
    double dev = 0.0;
    for (Vec2 y : locus.components[0]) {
        dev = std::max(dev, std::abs(distance(y, {-0.5, 0.0}) - 0.5));
        CHECK(std::abs(f.hessian_det(y)) <= 1e-9);
    }
    CHECK(dev <= 1e-6);
}

TEST_CASE("push_forward maps vertices through the gradient") {
    CriticalLocus l;
    l.components = {{{2, 0}, {2, 0.5}}};
    l.closed = {false};
    const auto c = push_forward(normal_form(NormalForm::hyperbolic_umbilic), l);
    CHECK(c.components[0][0] == Vec2{4, 0});

    l.components = {{{-1, 0}, {0, 0}}};
    const auto f = elliptic_umbilic_slice(1.0);
    const auto img = push_forward(f, l);
    const auto o = oracle::EllipticSlice{1.0}.grad({-1, 0});
    CHECK(img.components[0][0] == Vec2{o.x, o.y});
    CHECK(img.components[0][0] == Vec2{-1, 0});
    CHECK(img.components[0][1] == Vec2{0, 0});
    CHECK(c.labels.empty());
}

TEST_CASE("tricuspoid has three cusps at the oracle positions") {
    const auto c = compute_caustic(elliptic_umbilic_slice(1.0), Window::square({0, 0}, 2.0, 128));
    REQUIRE(c.cusp_count() == 3);
    const auto expected = slice_cusps_oracle(1.0);
    REQUIRE(expected.size() == 3);
    for (Vec2 p : c.cusp_points) CHECK(nearest(p, expected) <= 1e-6);
    CHECK(nearest({-1.125, 0.649519052838329}, c.cusp_points) <= 1e-6);
    CHECK(nearest({0.0, 0.0}, c.cusp_points) <= 1e-6);
    REQUIRE(c.labeled());
    for (const auto& labels : c.labels) {
        CHECK(std::count(labels.begin(), labels.end(), CausticLabel::cusp) == 3);
    }
}

TEST_CASE("perturbed hyperbolic umbilic has two components and one cusp") {
    const auto f = perturb(normal_form(NormalForm::hyperbolic_umbilic), QuadraticPerturbation{0.1, 1, 1, 2});
    const auto c = compute_caustic(f, Window::square({0, 0}, 2.0, 128));
    CHECK(c.components.size() == 2);
    CHECK(c.cusp_count() == 1);
    const auto expected = oracle::cusp_scan(
        [&](oracle::P y) {
            const Sym2 h = f.hessian({y.x, y.y});
            return std::array<double, 3>{h.xx, h.xy, h.yy};
        },
        {-2, -2}, {2, 2}, 200);
    REQUIRE(expected.size() == 1);
    REQUIRE(c.cusp_preimages.size() == 1);
    CHECK(distance(c.cusp_preimages[0], {expected[0].x, expected[0].y}) <= 1e-6);
}

TEST_CASE("unperturbed hyperbolic umbilic: fold rays and a non-Morse corner") {
    const auto c = compute_caustic(normal_form(NormalForm::hyperbolic_umbilic), Window::square({0, 0}, 2.0, 64));
    CHECK(c.cusp_count() == 0);
    REQUIRE(c.non_morse_points.size() == 1);
    CHECK(norm(c.non_morse_points[0]) <= 1e-9);
    for (std::size_t k = 0; k < c.components.size(); ++k) {
        for (std::size_t v = 0; v < c.components[k].size(); ++v) {
            const Vec2 x = c.components[k][v];
            CHECK(std::min(std::abs(x.x), std::abs(x.y)) <= 1e-9);
            CHECK(x.x >= -1e-9);
            CHECK(x.y >= -1e-9);
            CHECK(c.labels[k][v] != CausticLabel::cusp);
        }
    }
}

TEST_CASE("pyramid slices") {
    const std::vector<double> ts{-1, -0.5, -0.25, 0, 0.25, 0.5, 1};
    const auto slices = pyramid_slices(ts);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        CAPTURE(ts[k]);
        if (ts[k] == 0.0) {
            CHECK(slices[k].components.empty());
            REQUIRE(slices[k].non_morse_points.size() == 1);
            CHECK(norm(slices[k].non_morse_points[0]) <= 1e-9);
        } else {
            CHECK(slices[k].cusp_count() == 3);
        }
    }
}

TEST_CASE("slices at t and -t coincide") {
    // f_{-t}(y1, y2) = -f_t(-y1, y2), so grad f_{-t}(y) = R grad f_t(-y1, y2)
    // with R the reflection x2 -> -x2; each slice is itself symmetric in x2.
    for (double t : {0.25, 0.5, 1.0}) {
        const auto s = pyramid_slices({t, -t});
        REQUIRE(s[0].components.size() == 1);
        REQUIRE(s[1].components.size() == 1);
        const auto ft = elliptic_umbilic_slice(t);
        for (std::size_t v = 0; v < s[1].components[0].size(); ++v) {
            const Vec2 y = s[1].preimages[0][v];
            const Vec2 x = s[1].components[0][v];
            const Vec2 ys{-y.x, y.y};
            CHECK(distance(ft.gradient(ys), Vec2{x.x, -x.y}) <= 1e-8);
            CHECK(std::abs(ft.hessian_det(ys)) <= 1e-8);
        }
        Polyline reflected;
        for (Vec2 p : s[0].components[0]) reflected.push_back({p.x, -p.y});
        CHECK(hausdorff(reflected, s[1].components[0]) <= 1e-2);
        for (Vec2 p : s[1].cusp_points) CHECK(nearest({p.x, -p.y}, s[0].cusp_points) <= 1e-6);
        Polyline mirrored;
        for (Vec2 p : s[0].components[0]) mirrored.push_back({-p.x, p.y});
        CHECK(hausdorff(mirrored, s[1].components[0]) > 0.5 * t * t);
    }
}

TEST_CASE("property: caustic vertices have refined preimages") {
    for (double t : {-1.0, 0.5}) {
        const auto f = elliptic_umbilic_slice(t);
        const auto c = compute_caustic(f, Window::square({0, 0}, 2.0, 96));
        for (std::size_t k = 0; k < c.components.size(); ++k) {
            for (std::size_t v = 0; v < c.components[k].size(); ++v) {
                const Vec2 y = c.preimages[k][v];
                CHECK(distance(f.gradient(y), c.components[k][v]) <= 1e-8);
                CHECK(std::abs(f.hessian_det(y)) <= 1e-9);
            }
        }
    }
}

TEST_CASE("property: cusp distances scale as t^2") {
    auto spread = [](double t) {
        const auto c = pyramid_slices({t})[0];
        Vec2 centroid;
        for (Vec2 p : c.cusp_points) centroid += p / 3.0;
        double d = 0.0;
        for (Vec2 p : c.cusp_points) d += distance(p, centroid) / 3.0;
        return d;
    };
    const double d1 = spread(1.0);
    for (double t : {0.25, 0.5}) CHECK(std::abs(spread(t) / d1 - t * t) <= 0.05 * t * t);
}

TEST_CASE("invalid windows are rejected") {
    CHECK_THROWS_AS(critical_locus(elliptic_umbilic_slice(1.0), Window::square({0, 0}, 0.0, 64)),
                    std::invalid_argument);
    CHECK_THROWS_AS(critical_locus(elliptic_umbilic_slice(1.0), Window::square({0, 0}, 1.0, 8)),
                    std::invalid_argument);
}
