#include "gradbif/ode.hpp"

#include <algorithm>
#include <cmath>

namespace gradbif {

namespace {

// Dormand-Prince tableau (nodes c2..c5 = 1/5, 3/10, 4/5, 8/9 are implicit)
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// error coefficients (5th minus 4th order weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

StepResult DormandPrince::step(Vec2 y, double h, double h_max) const {
    h = std::min(h, h_max);
    const Vec2 k1 = field_(y);
    for (int attempt = 0; attempt < 60; ++attempt) {
        const Vec2 k2 = field_(y + h * (a21 * k1));
        const Vec2 k3 = field_(y + h * (a31 * k1 + a32 * k2));
        const Vec2 k4 = field_(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec2 k5 = field_(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec2 k6 = field_(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec2 y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec2 k7 = field_(y5);
        const Vec2 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double sx = atol_ + rtol_ * std::max(std::abs(y.x), std::abs(y5.x));
        const double sy = atol_ + rtol_ * std::max(std::abs(y.y), std::abs(y5.y));
        const double en = std::sqrt(0.5 * ((err.x / sx) * (err.x / sx) + (err.y / sy) * (err.y / sy)));
        if (!std::isfinite(en)) {
            h *= 0.2;
            continue;
        }
        if (en <= 1.0) {
            const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            return {y5, h, std::min(h * factor, h_max), true};
        }
        h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
        if (h < 1e-300) break;
    }
    return {y, 0.0, h, false};
}

Vec2 rk4_step(const VectorField& field, Vec2 y, double h) {
    const Vec2 k1 = field(y);
    const Vec2 k2 = field(y + (0.5 * h) * k1);
    const Vec2 k3 = field(y + (0.5 * h) * k2);
    const Vec2 k4 = field(y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace gradbif
