#include "gradbif/field.hpp"

#include <cstdio>
#include <stdexcept>

namespace gradbif {

GeneratingFunction::GeneratingFunction(Poly2 poly, std::string label)
    : poly_(std::move(poly)), label_(std::move(label)) {
    g1_ = poly_.derivative(1);
    g2_ = poly_.derivative(2);
    h11_ = g1_.derivative(1);
    h12_ = g1_.derivative(2);
    h22_ = g2_.derivative(2);
    det_ = h11_ * h22_ - h12_ * h12_;
    d1_ = det_.derivative(1);
    d2_ = det_.derivative(2);
    d11_ = d1_.derivative(1);
    d12_ = d1_.derivative(2);
    d22_ = d2_.derivative(2);
}

NormalForm parse_normal_form(std::string_view name) {
    if (name == "fold") return NormalForm::fold;
    if (name == "cusp-plus" || name == "cusp+") return NormalForm::cusp_plus;
    if (name == "cusp-minus" || name == "cusp-") return NormalForm::cusp_minus;
    if (name == "elliptic-umbilic") return NormalForm::elliptic_umbilic;
    if (name == "hyperbolic-umbilic") return NormalForm::hyperbolic_umbilic;
    throw std::invalid_argument("unknown normal form '" + std::string(name) + "'");
}

std::string_view to_string(NormalForm kind) {
    switch (kind) {
        case NormalForm::fold: return "fold";
        case NormalForm::cusp_plus: return "cusp-plus";
        case NormalForm::cusp_minus: return "cusp-minus";
        case NormalForm::elliptic_umbilic: return "elliptic-umbilic";
        case NormalForm::hyperbolic_umbilic: return "hyperbolic-umbilic";
    }
    throw std::invalid_argument("unknown normal form");
}

GeneratingFunction normal_form(NormalForm kind) {
    const Poly2 stabilizer = Poly2::monomial(0.5, 0, 2);
    const std::string label(to_string(kind));
    switch (kind) {
        case NormalForm::fold:
            return GeneratingFunction(Poly2::monomial(1.0, 3, 0) + stabilizer, label);
        case NormalForm::cusp_plus:
            return GeneratingFunction(Poly2::monomial(1.0, 4, 0) + stabilizer, label);
        case NormalForm::cusp_minus:
            return GeneratingFunction(Poly2::monomial(-1.0, 4, 0) + stabilizer, label);
        case NormalForm::elliptic_umbilic:
            return GeneratingFunction(
                Poly2::monomial(1.0 / 3.0, 3, 0) + Poly2::monomial(-1.0, 1, 2), label);
        case NormalForm::hyperbolic_umbilic:
            return GeneratingFunction(
                Poly2::monomial(1.0 / 3.0, 3, 0) + Poly2::monomial(1.0 / 3.0, 0, 3), label);
    }
    throw std::invalid_argument("unknown normal form");
}

Poly2 QuadraticPerturbation::to_poly() const {
    if (!(eps > 0.0)) throw std::invalid_argument("perturbation eps must be positive");
    const double h = 0.5 * eps;
    return Poly2::monomial(h * a, 2, 0) + Poly2::monomial(h * b, 1, 1) +
           Poly2::monomial(h * c, 0, 2);
}

GeneratingFunction perturb(const GeneratingFunction& f, const Poly2& p) {
    if (p.is_zero()) return f;
    return GeneratingFunction(f.poly() + p, f.label() + " + (" + p.to_string() + ")");
}

GeneratingFunction perturb(const GeneratingFunction& f, const QuadraticPerturbation& p) {
    char buf[160];
    std::snprintf(buf, sizeof buf, " + quad(eps=%.17g,a=%.17g,b=%.17g,c=%.17g)", p.eps, p.a, p.b,
                  p.c);
    return GeneratingFunction(f.poly() + p.to_poly(), f.label() + buf);
}

GeneratingFunction elliptic_umbilic_slice(double t) {
    const GeneratingFunction base = normal_form(NormalForm::elliptic_umbilic);
    char buf[64];
    std::snprintf(buf, sizeof buf, " + t*y1^2 (t=%.17g)", t);
    return GeneratingFunction(base.poly() + Poly2::monomial(t, 2, 0), base.label() + buf);
}

GeneratingFunction FamilySpec::at(const std::map<std::string, double>& params) const {
    Poly2 sum = base.poly();
    std::string label = base.label();
    for (const auto& [term, name] : deformation_terms) {
        auto it = params.find(name);
        if (it == params.end()) throw std::invalid_argument("missing family parameter '" + name + "'");
        sum = sum + it->second * term;
        char buf[64];
        std::snprintf(buf, sizeof buf, ",%s=%.17g", name.c_str(), it->second);
        label += buf;
    }
    return GeneratingFunction(std::move(sum), std::move(label));
}

FamilySpec FamilySpec::elliptic_umbilic_versal() {
    return FamilySpec{normal_form(NormalForm::elliptic_umbilic),
                      {{Poly2::constant(1.0), "a0"},
                       {Poly2::monomial(1.0, 1, 0), "a1"},
                       {Poly2::monomial(1.0, 0, 1), "a2"},
                       {Poly2::monomial(1.0, 2, 0), "a3"}}};
}

}  // namespace gradbif
