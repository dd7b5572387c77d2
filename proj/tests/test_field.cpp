#include <doctest.h>

#include <random>

#include "gradbif/field.hpp"
#include "oracles.hpp"

using namespace gradbif;

namespace {

constexpr NormalForm kForms[] = {NormalForm::fold, NormalForm::cusp_plus, NormalForm::cusp_minus,
                                 NormalForm::elliptic_umbilic, NormalForm::hyperbolic_umbilic};

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("poly2 stores canonical terms") {
    const Poly2 p({{2, 0, 1.0}, {0, 1, 0.0}, {2, 0, 2.0}, {1, 1, -1.0}});
    REQUIRE(p.terms().size() == 2);
    CHECK(p.coefficient(2, 0) == 3.0);
    CHECK(p.coefficient(0, 1) == 0.0);
    CHECK((p - p).is_zero());
    CHECK(p.degree() == 2);
}

TEST_CASE("poly2 parse and print round trip") {
    const Poly2 p = Poly2::parse("y1^3/3 - y1*y2^2 + 0.5 * y2 - 2");
    CHECK(p.coefficient(3, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(p.coefficient(1, 2) == -1.0);
    CHECK(p.coefficient(0, 1) == 0.5);
    CHECK(p.coefficient(0, 0) == -2.0);
    CHECK(Poly2::parse(p.to_string()) == p);
    CHECK(Poly2::parse("  -y1  ") == Poly2::monomial(-1.0, 1, 0));
}

TEST_CASE("poly2 parse errors carry a position") {
    try {
        (void)Poly2::parse("y1^2 + * y2");
        FAIL("expected a parse error");
    } catch (const PolyParseError& e) {
        CHECK(e.position() == 7);
    }
    CHECK_THROWS_AS((void)Poly2::parse("y3"), PolyParseError);
    CHECK_THROWS_AS((void)Poly2::parse(""), PolyParseError);
}

TEST_CASE("eval examples") {
    const auto eu = normal_form(NormalForm::elliptic_umbilic);
    const auto hu = normal_form(NormalForm::hyperbolic_umbilic);
    CHECK(eu.eval({1, 0}) == doctest::Approx(1.0 / 3.0));
    CHECK(hu.eval({1, 2}) == doctest::Approx(3.0));
    CHECK(GeneratingFunction().eval({3.7, -1.2}) == 0.0);
}

TEST_CASE("gradient examples") {
    const auto eu = normal_form(NormalForm::elliptic_umbilic);
    const auto hu = normal_form(NormalForm::hyperbolic_umbilic);
    CHECK(eu.gradient({1, 1}) == Vec2{0, -2});
    CHECK(hu.gradient({2, 3}) == Vec2{4, 9});
    const GeneratingFunction id(Poly2::parse("0.5*y1^2 + 0.5*y2^2"));
    CHECK(id.gradient({0.3, -1.7}) == Vec2{0.3, -1.7});
}

TEST_CASE("elliptic umbilic gradient is the map (y1^2 - y2^2, -2 y1 y2)") {
    const auto eu = normal_form(NormalForm::elliptic_umbilic);
    const oracle::EllipticSlice o{0.0};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        const Vec2 y{u(rng), u(rng)};
        const auto g = o.grad({y.x, y.y});
        CHECK(eu.gradient(y).x == doctest::Approx(g.x));
        CHECK(eu.gradient(y).y == doctest::Approx(g.y));
    }
}

TEST_CASE("hessian examples") {
    CHECK(normal_form(NormalForm::elliptic_umbilic).hessian({0, 0}) == Sym2{0, 0, 0});
    CHECK(normal_form(NormalForm::hyperbolic_umbilic).hessian({1, 2}) == Sym2{2, 0, 4});
    const auto slice = elliptic_umbilic_slice(1.0);
    const auto h = oracle::EllipticSlice{1.0}.hess({0, 0});
    CHECK(slice.hessian({0, 0}) == Sym2{h[0], h[1], h[2]});
    CHECK(slice.hessian({0, 0}) == Sym2{2, 0, 0});
}

TEST_CASE("normal forms") {
    CHECK(normal_form(NormalForm::hyperbolic_umbilic).poly() == Poly2::parse("y1^3/3 + y2^3/3"));
    CHECK(normal_form(NormalForm::elliptic_umbilic).poly() == Poly2::parse("y1^3/3 - y1*y2^2"));
    CHECK(normal_form(NormalForm::fold).poly() == Poly2::parse("y1^3 + 0.5*y2^2"));
    CHECK(parse_normal_form("hyperbolic-umbilic") == NormalForm::hyperbolic_umbilic);
    CHECK_THROWS_AS(parse_normal_form("swallowtail"), std::invalid_argument);
}

TEST_CASE("perturbation examples") {
    const auto eu = normal_form(NormalForm::elliptic_umbilic);
    const auto p = perturb(eu, QuadraticPerturbation{0.2, 1, 0, 1});
    CHECK((p.poly() - eu.poly()).coefficient(2, 0) == doctest::Approx(0.1));
    CHECK((p.poly() - eu.poly()).coefficient(0, 2) == doctest::Approx(0.1));
    CHECK(perturb(eu, Poly2::monomial(1.0, 2, 0)).poly() == elliptic_umbilic_slice(1.0).poly());
    CHECK(perturb(eu, Poly2{}).poly() == eu.poly());
}

TEST_CASE("versal family evaluates to generating functions") {
    const auto fam = FamilySpec::elliptic_umbilic_versal();
    const auto g = fam.at({{"a0", 0.0}, {"a1", 0.0}, {"a2", 0.0}, {"a3", 1.0}});
    CHECK(g.poly() == elliptic_umbilic_slice(1.0).poly());
    CHECK_THROWS_AS((void)fam.at({{"a0", 1.0}}), std::invalid_argument);
}

TEST_CASE("property: gradient and hessian match finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double h = 1e-5;
    for (NormalForm kind : kForms) {
        const auto f = normal_form(kind);
        for (int k = 0; k < 100; ++k) {
            const Vec2 y{u(rng), u(rng)};
            const Vec2 g = f.gradient(y);
            const double g1 = (f.eval({y.x + h, y.y}) - f.eval({y.x - h, y.y})) / (2 * h);
            const double g2 = (f.eval({y.x, y.y + h}) - f.eval({y.x, y.y - h})) / (2 * h);
            CHECK(rel_err(g.x, g1) <= 1e-6);
            CHECK(rel_err(g.y, g2) <= 1e-6);
            const Sym2 H = f.hessian(y);
            const Vec2 gp1 = f.gradient({y.x + h, y.y}), gm1 = f.gradient({y.x - h, y.y});
            const Vec2 gp2 = f.gradient({y.x, y.y + h}), gm2 = f.gradient({y.x, y.y - h});
            CHECK(rel_err(H.xx, (gp1.x - gm1.x) / (2 * h)) <= 1e-6);
            CHECK(rel_err(H.xy, (gp2.x - gm2.x) / (2 * h)) <= 1e-6);
            CHECK(rel_err(H.xy, (gp1.y - gm1.y) / (2 * h)) <= 1e-6);
            CHECK(rel_err(H.yy, (gp2.y - gm2.y) / (2 * h)) <= 1e-6);
        }
    }
}

TEST_CASE("property: mixed partials agree exactly") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> c(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Poly2::Term> terms;
        for (int i = 0; i <= 4; ++i)
            for (int j = 0; i + j <= 4; ++j) terms.push_back({i, j, c(rng)});
        const Poly2 p(terms);
        CHECK(p.derivative(1).derivative(2) == p.derivative(2).derivative(1));
    }
}

TEST_CASE("property: perturb is associative and commutative") {
    const auto f = normal_form(NormalForm::hyperbolic_umbilic);
    const Poly2 a = Poly2::parse("0.3*y1^2 - y2");
    const Poly2 b = Poly2::parse("y1*y2 + 2");
    CHECK(perturb(perturb(f, a), b).poly() == perturb(perturb(f, b), a).poly());
    CHECK(perturb(perturb(f, a), b).poly() == perturb(f, a + b).poly());
    CHECK(a + b == b + a);
    CHECK((a + b) + f.poly() == a + (b + f.poly()));
}
