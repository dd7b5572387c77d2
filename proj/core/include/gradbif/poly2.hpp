#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gradbif/geometry.hpp"

namespace gradbif {

/// Raised by Poly2::parse; `position` is the 0-based offset of the
/// offending character in the input text.
class PolyParseError : public std::runtime_error {
public:
    PolyParseError(std::size_t position, const std::string& what)
        : std::runtime_error(what + " at position " + std::to_string(position)),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Bivariate polynomial in (y1, y2) with real coefficients.
///
/// Terms are kept sorted by (power of y1, power of y2); no two terms share
/// a degree pair and zero coefficients are never stored, so structural
/// equality is polynomial equality.
class Poly2 {
public:
    struct Term {
        int p1 = 0;  ///< power of y1
        int p2 = 0;  ///< power of y2
        double coeff = 0.0;
        friend bool operator==(const Term&, const Term&) = default;
    };

    Poly2() = default;
    explicit Poly2(std::vector<Term> terms);

    static Poly2 constant(double c) { return monomial(c, 0, 0); }
    static Poly2 monomial(double c, int p1, int p2);

    /// Parses a sum of monomials such as "0.5*y1^2 - y1*y2^2 + 3".
    /// Accepts whitespace, unary signs, '*' products of numbers and powers
    /// of y1/y2, and division by a number ("y1^3/3").
    static Poly2 parse(std::string_view text);

    double eval(Vec2 y) const;

    /// Formal partial derivative; `var` is 1 for y1, 2 for y2.
    Poly2 derivative(int var) const;

    std::span<const Term> terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;
    double coefficient(int p1, int p2) const;

    /// Canonical text: "c*y1^i*y2^j" terms joined by " + ", with coefficients
    /// printed at full round-trip precision.
    std::string to_string() const;

    Poly2 operator-() const;
    friend Poly2 operator+(const Poly2& a, const Poly2& b);
    friend Poly2 operator-(const Poly2& a, const Poly2& b) { return a + (-b); }
    friend Poly2 operator*(const Poly2& a, const Poly2& b);
    friend Poly2 operator*(double s, const Poly2& a);
    friend Poly2 operator*(const Poly2& a, double s) { return s * a; }
    friend bool operator==(const Poly2&, const Poly2&) = default;

private:
    void normalize();

    std::vector<Term> terms_;
    int max_p1_ = 0;
    int max_p2_ = 0;
};

}  // namespace gradbif
