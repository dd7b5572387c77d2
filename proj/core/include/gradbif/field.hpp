#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gradbif/geometry.hpp"
#include "gradbif/poly2.hpp"

namespace gradbif {

/// Polynomial generating function f(y1, y2) of a 2D Lagrangian map.
///
/// The Lagrangian map is y -> grad f(y); its Jacobian is the Hessian of f.
/// All formal derivatives needed downstream (gradient, Hessian, and the
/// first and second derivatives of det Hess f) are computed once at
/// construction, so evaluation is allocation-free.
class GeneratingFunction {
public:
    GeneratingFunction() : GeneratingFunction(Poly2{}) {}
    explicit GeneratingFunction(Poly2 poly, std::string label = {});

    const Poly2& poly() const { return poly_; }
    const std::string& label() const { return label_; }

    double eval(Vec2 y) const { return poly_.eval(y); }
    Vec2 gradient(Vec2 y) const { return {g1_.eval(y), g2_.eval(y)}; }
    Sym2 hessian(Vec2 y) const { return {h11_.eval(y), h12_.eval(y), h22_.eval(y)}; }

    /// det Hess f as a polynomial and its derivatives.
    const Poly2& hessian_det_poly() const { return det_; }
    double hessian_det(Vec2 y) const { return det_.eval(y); }
    Vec2 hessian_det_gradient(Vec2 y) const { return {d1_.eval(y), d2_.eval(y)}; }
    Sym2 hessian_det_hessian(Vec2 y) const { return {d11_.eval(y), d12_.eval(y), d22_.eval(y)}; }

private:
    Poly2 poly_;
    std::string label_;
    Poly2 g1_, g2_;
    Poly2 h11_, h12_, h22_;
    Poly2 det_, d1_, d2_, d11_, d12_, d22_;
};

/// Built-in normal forms. One-variable germs are stabilized with y2^2/2.
enum class NormalForm { fold, cusp_plus, cusp_minus, elliptic_umbilic, hyperbolic_umbilic };

/// Throws std::invalid_argument for unknown names.
NormalForm parse_normal_form(std::string_view name);
std::string_view to_string(NormalForm kind);

/// fold: y1^3 + y2^2/2; cusp+/-: +/-y1^4 + y2^2/2;
/// elliptic umbilic: y1^3/3 - y1*y2^2; hyperbolic umbilic: (y1^3 + y2^3)/3.
GeneratingFunction normal_form(NormalForm kind);

/// (eps/2) * (a*y1^2 + b*y1*y2 + c*y2^2), eps > 0.
struct QuadraticPerturbation {
    double eps = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    Poly2 to_poly() const;
};

GeneratingFunction perturb(const GeneratingFunction& f, const Poly2& p);
GeneratingFunction perturb(const GeneratingFunction& f, const QuadraticPerturbation& p);

/// Slice x3 = t of the 3D elliptic umbilic: y1^3/3 - y1*y2^2 + t*y1^2.
GeneratingFunction elliptic_umbilic_slice(double t);

/// Parametrized deformation base + sum_k param_k * term_k.
struct FamilySpec {
    GeneratingFunction base;
    std::vector<std::pair<Poly2, std::string>> deformation_terms;

    /// Throws std::invalid_argument if a parameter is missing from `params`.
    GeneratingFunction at(const std::map<std::string, double>& params) const;

    /// Four-parameter versal deformation a0 + a1*y1 + a2*y2 + a3*y1^2 of the
    /// elliptic umbilic.
    static FamilySpec elliptic_umbilic_versal();
};

}  // namespace gradbif
