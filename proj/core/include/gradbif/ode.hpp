#pragma once

#include <functional>

#include "gradbif/geometry.hpp"

namespace gradbif {

using VectorField = std::function<Vec2(Vec2)>;

struct StepResult {
    Vec2 y;
    double h_used = 0.0;
    double h_next = 0.0;
    bool ok = false;  ///< false if the step size underflowed
};

/// Embedded Dormand-Prince 5(4) pair with standard step-size control.
class DormandPrince {
public:
    DormandPrince(VectorField field, double rtol, double atol)
        : field_(std::move(field)), rtol_(rtol), atol_(atol) {}

    /// One accepted step from y, starting from trial size h and never
    /// exceeding h_max. Rejected trials shrink h and retry.
    StepResult step(Vec2 y, double h, double h_max) const;

    Vec2 eval(Vec2 y) const { return field_(y); }

private:
    VectorField field_;
    double rtol_;
    double atol_;
};

/// Classical fixed-step RK4.
Vec2 rk4_step(const VectorField& field, Vec2 y, double h);

}  // namespace gradbif
