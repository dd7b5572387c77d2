#include "gradbif/poly2.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <utility>

namespace gradbif {

namespace {

constexpr int kMaxPower = 63;

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Poly2 run() {
        std::map<std::pair<int, int>, double> acc;
        skip_ws();
        if (at_end()) throw PolyParseError(pos_, "empty polynomial");
        bool first = true;
        while (!at_end()) {
            double sign = 1.0;
            if (!first) {
                if (peek() == '+') {
                    ++pos_;
                } else if (peek() == '-') {
                    sign = -1.0;
                    ++pos_;
                } else {
                    throw PolyParseError(pos_, std::string("expected '+' or '-', found '") +
                                                   peek() + "'");
                }
            }
            first = false;
            auto [coeff, p1, p2] = term();
            acc[{p1, p2}] += sign * coeff;
            skip_ws();
        }
        std::vector<Poly2::Term> terms;
        for (const auto& [powers, c] : acc) terms.push_back({powers.first, powers.second, c});
        return Poly2(std::move(terms));
    }

private:
    struct Mono {
        double coeff;
        int p1;
        int p2;
    };

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    Mono term() {
        Mono m{1.0, 0, 0};
        skip_ws();
        // unary signs
        while (!at_end() && (peek() == '+' || peek() == '-')) {
            if (peek() == '-') m.coeff = -m.coeff;
            ++pos_;
            skip_ws();
        }
        factor(m);
        for (;;) {
            skip_ws();
            if (at_end()) break;
            if (peek() == '*') {
                ++pos_;
                skip_ws();
                factor(m);
            } else if (peek() == '/') {
                ++pos_;
                skip_ws();
                const std::size_t at = pos_;
                const double d = number();
                if (d == 0.0) throw PolyParseError(at, "division by zero");
                m.coeff /= d;
            } else {
                break;
            }
        }
        return m;
    }

    void factor(Mono& m) {
        if (at_end()) throw PolyParseError(pos_, "unexpected end of input");
        const char c = peek();
        if (c == 'y') {
            const std::size_t at = pos_;
            ++pos_;
            if (at_end() || (peek() != '1' && peek() != '2')) {
                throw PolyParseError(at, "unknown variable (expected y1 or y2)");
            }
            const int var = peek() - '0';
            ++pos_;
            int power = 1;
            skip_ws();
            if (!at_end() && peek() == '^') {
                ++pos_;
                skip_ws();
                power = integer();
            }
            (var == 1 ? m.p1 : m.p2) += power;
            if (m.p1 > kMaxPower || m.p2 > kMaxPower) throw PolyParseError(at, "power too large");
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            m.coeff *= number();
            return;
        }
        throw PolyParseError(pos_, std::string("unexpected character '") + c + "'");
    }

    double number() {
        if (at_end()) throw PolyParseError(pos_, "expected a number");
        double value = 0.0;
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr == begin) throw PolyParseError(pos_, "expected a number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    int integer() {
        if (at_end()) throw PolyParseError(pos_, "expected an exponent");
        int value = 0;
        const char* begin = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
        if (ec != std::errc() || ptr == begin || value < 0) {
            throw PolyParseError(pos_, "expected a non-negative integer exponent");
        }
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Poly2::Poly2(std::vector<Term> terms) : terms_(std::move(terms)) { normalize(); }

Poly2 Poly2::monomial(double c, int p1, int p2) {
    if (p1 < 0 || p2 < 0) throw std::invalid_argument("negative power in monomial");
    return Poly2({Term{p1, p2, c}});
}

void Poly2::normalize() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
        return std::pair(a.p1, a.p2) < std::pair(b.p1, b.p2);
    });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (const Term& t : terms_) {
        if (t.p1 < 0 || t.p2 < 0 || t.p1 > kMaxPower || t.p2 > kMaxPower) {
            throw std::invalid_argument("monomial power out of range");
        }
        if (!merged.empty() && merged.back().p1 == t.p1 && merged.back().p2 == t.p2) {
            merged.back().coeff += t.coeff;
        } else {
            merged.push_back(t);
        }
    }
    std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
    terms_ = std::move(merged);
    max_p1_ = 0;
    max_p2_ = 0;
    for (const Term& t : terms_) {
        max_p1_ = std::max(max_p1_, t.p1);
        max_p2_ = std::max(max_p2_, t.p2);
    }
}

Poly2 Poly2::parse(std::string_view text) { return Parser(text).run(); }

double Poly2::eval(Vec2 y) const {
    std::array<double, kMaxPower + 1> pw1;
    std::array<double, kMaxPower + 1> pw2;
    pw1[0] = 1.0;
    pw2[0] = 1.0;
    for (int k = 1; k <= max_p1_; ++k) pw1[k] = pw1[k - 1] * y.x;
    for (int k = 1; k <= max_p2_; ++k) pw2[k] = pw2[k - 1] * y.y;
    double sum = 0.0;
    for (const Term& t : terms_) sum += t.coeff * pw1[t.p1] * pw2[t.p2];
    return sum;
}

Poly2 Poly2::derivative(int var) const {
    if (var != 1 && var != 2) throw std::invalid_argument("derivative variable must be 1 or 2");
    std::vector<Term> out;
    for (const Term& t : terms_) {
        const int p = var == 1 ? t.p1 : t.p2;
        if (p == 0) continue;
        out.push_back(var == 1 ? Term{t.p1 - 1, t.p2, t.coeff * p}
                               : Term{t.p1, t.p2 - 1, t.coeff * p});
    }
    return Poly2(std::move(out));
}

int Poly2::degree() const {
    int d = 0;
    for (const Term& t : terms_) d = std::max(d, t.p1 + t.p2);
    return d;
}

double Poly2::coefficient(int p1, int p2) const {
    for (const Term& t : terms_) {
        if (t.p1 == p1 && t.p2 == p2) return t.coeff;
    }
    return 0.0;
}

std::string Poly2::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    char buf[64];
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const Term& t = terms_[k];
        if (k > 0) out += " + ";
        std::snprintf(buf, sizeof buf, "%.17g", t.coeff);
        out += buf;
        if (t.p1 > 0) out += "*y1^" + std::to_string(t.p1);
        if (t.p2 > 0) out += "*y2^" + std::to_string(t.p2);
    }
    return out;
}

Poly2 Poly2::operator-() const { return -1.0 * *this; }

Poly2 operator+(const Poly2& a, const Poly2& b) {
    std::vector<Poly2::Term> terms(a.terms_);
    terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
    return Poly2(std::move(terms));
}

Poly2 operator*(const Poly2& a, const Poly2& b) {
    std::vector<Poly2::Term> terms;
    terms.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& s : a.terms_) {
        for (const auto& t : b.terms_) terms.push_back({s.p1 + t.p1, s.p2 + t.p2, s.coeff * t.coeff});
    }
    return Poly2(std::move(terms));
}

Poly2 operator*(double s, const Poly2& a) {
    std::vector<Poly2::Term> terms(a.terms_);
    for (auto& t : terms) t.coeff *= s;
    return Poly2(std::move(terms));
}

}  // namespace gradbif
