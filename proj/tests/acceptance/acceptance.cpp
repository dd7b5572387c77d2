// Prints one PASS/FAIL line per acceptance criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "cli.hpp"
#include "gradbif/bifurcation.hpp"
#include "gradbif/caustic.hpp"
#include "gradbif/flow.hpp"

#ifndef GRADBIF_BIN
#error "GRADBIF_BIN must name the gradbif executable"
#endif

using namespace gradbif;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && passed) detail = what;
        passed = passed && ok;
    }
};

int failures = 0;

void report(int n, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.passed = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs > limit_s) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "runtime %.1f s exceeds %.0f s", secs, limit_s);
        if (o.passed) o.detail = buf;
        o.passed = false;
    }
    char head[128];
    std::snprintf(head, sizeof head, "%s %d %s (%.2f s)", o.passed ? "PASS" : "FAIL", n, name.c_str(), secs);
    std::cout << head;
    if (!o.detail.empty()) std::cout << ": " << o.detail;
    std::cout << std::endl;
    failures += !o.passed;
}

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

const Window kFiber = Window::square({0, 0}, 3.0, 128);

double default_seconds = 0.0;

const BifurcationDiagram& default_diagram() {
    static const BifurcationDiagram d = [] {
        const cli::RunConfig cfg;
        const auto t0 = std::chrono::steady_clock::now();
        auto out = assemble_diagram(cli::build_function(cfg), cli::diagram_options(cfg));
        default_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }();
    return d;
}

Outcome critical_circle() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ueps(0.01, 0.5), uc(-2.0, 2.0);
    double worst_c = 0.0, worst_r = 0.0;
    int done = 0;
    while (done < 20) {
        const double eps = ueps(rng), a = uc(rng), b = uc(rng), c = uc(rng);
        if (std::abs(a + c) <= 0.1) continue;
        ++done;
        const auto f = perturb(normal_form(NormalForm::elliptic_umbilic), QuadraticPerturbation{eps, a, b, c});
        const auto locus = critical_locus(f, Window::square({0, 0}, 2.5 * eps, 256));
        o.require(locus.components.size() == 1, fmt("eps=%g: expected one locus component", eps));
        if (locus.components.size() != 1) continue;
        o.require(locus.closed[0], fmt("eps=%g: locus not closed", eps));
        std::vector<oracle::P> pts;
        for (Vec2 y : locus.components[0]) pts.push_back({y.x, y.y});
        const auto [centre, radius] = oracle::fit_circle(pts);
        const Vec2 want{-(eps / 4) * (a - c), (eps / 4) * b};
        worst_c = std::max(worst_c, distance({centre.x, centre.y}, want));
        worst_r = std::max(worst_r, std::abs(radius - (eps / 4) * std::abs(a + c)));
    }
    o.require(worst_c <= 1e-6 && worst_r <= 1e-6, fmt("centre error %.3g, radius error %.3g", worst_c, worst_r));
    if (o.passed) o.detail = fmt("20 circles, max centre error %.2g, max radius error %.2g", worst_c, worst_r);
    return o;
}

Outcome tricuspoid() {
    Outcome o;
    const std::vector<double> ts{-1, -0.5, -0.25, 0, 0.25, 0.5, 1};
    const auto slices = pyramid_slices(ts);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (ts[k] == 0.0) {
            o.require(slices[k].components.empty() && slices[k].non_morse_points.size() == 1 &&
                          norm(slices[k].non_morse_points[0]) <= 1e-9,
                      "t=0: expected the single degenerate point (0,0)");
        } else {
            o.require(slices[k].cusp_count() == 3,
                      fmt("t=%g: %g cusps", ts[k], static_cast<double>(slices[k].cusp_count())));
        }
    }
    if (o.passed) o.detail = "3 cusps for t in {+-0.25, +-0.5, +-1}, one degenerate point at t=0";
    return o;
}

Outcome hyperbolic() {
    Outcome o;
    const Window fiber = Window::square({0, 0}, 2.0, 64);
    const Window view = Window::square({1.0, 1.0}, 1.0, 64);  // [0,2]^2
    const auto c = compute_caustic(normal_form(NormalForm::hyperbolic_umbilic), fiber);
    Polyline computed;
    for (const auto& comp : c.components) {
        for (Vec2 p : comp) {
            if (view.contains(p)) computed.push_back(p);
        }
    }
    for (Vec2 p : c.non_morse_points) computed.push_back(p);
    double forward = 0.0;  // computed -> reference set
    for (Vec2 p : computed) {
        const double d = std::min(p.x >= 0 ? std::abs(p.y) : norm(p), p.y >= 0 ? std::abs(p.x) : norm(p));
        forward = std::max(forward, d);
    }
    double backward = 0.0;  // reference rays -> computed
    for (int k = 0; k <= 2000; ++k) {
        const double s = 2.0 * k / 2000;
        for (Vec2 q : {Vec2{s, 0.0}, Vec2{0.0, s}}) {
            double best = 1e300;
            for (const auto& comp : c.components) best = std::min(best, distance_to_polyline(q, comp));
            for (Vec2 p : c.non_morse_points) best = std::min(best, distance(q, p));
            backward = std::max(backward, best);
        }
    }
    o.require(!computed.empty(), "empty caustic");
    o.require(std::max(forward, backward) <= 1e-6, fmt("Hausdorff distance %.3g", std::max(forward, backward)));
    const auto pert = compute_caustic(
        perturb(normal_form(NormalForm::hyperbolic_umbilic), QuadraticPerturbation{0.1, 1, 1, 2}), fiber);
    o.require(pert.components.size() == 2 && pert.cusp_count() == 1,
              fmt("perturbed: %g components, %g cusps", static_cast<double>(pert.components.size()),
                  static_cast<double>(pert.cusp_count())));
    if (o.passed)
        o.detail = fmt("Hausdorff %.2g to the axis rays; perturbed case has 2 components and 1 cusp",
                       std::max(forward, backward));
    return o;
}

Outcome census() {
    Outcome o;
    const cli::RunConfig cfg;
    const auto f = elliptic_umbilic_slice(1.0);
    const auto caustic = compute_caustic(f, kFiber);
    // half the samples from the base window, half from the caustic's bounding box
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const auto& comp : caustic.components) {
        for (Vec2 p : comp) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
    }
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u1(cfg.base.lo1(), cfg.base.hi1()), u2(cfg.base.lo2(), cfg.base.hi2());
    std::uniform_real_distribution<double> b1(lo.x, hi.x), b2(lo.y, hi.y);
    int inside = 0, outside = 0, done = 0;
    while (done < 200) {
        const Vec2 x = done % 2 ? Vec2{b1(rng), b2(rng)} : Vec2{u1(rng), u2(rng)};
        if (caustic.distance_to(x) < 1e-3) continue;
        ++done;
        const auto want = oracle::elliptic_census(1.0, {x.x, x.y});
        const auto got = solve_critical_points(f, x, kFiber);
        const bool types = got.count(PointKind::saddle) == want.saddles &&
                           got.count(PointKind::unstable_node) == want.unstable_nodes &&
                           got.count(PointKind::stable_node) == want.stable_nodes && want.degenerate == 0 &&
                           static_cast<int>(got.points.size()) == want.total();
        o.require(types, fmt("census mismatch at (%g, %g)", x.x, x.y));
        for (const auto& cp : got.points) {
            double best = 1e300;
            for (auto p : want.points) best = std::min(best, distance(cp.position, {p.x, p.y}));
            o.require(best <= 1e-8, fmt("critical point off the closed form at x=(%g, %g)", x.x, x.y));
        }
        const bool shape = (want.total() == 4 && want.saddles == 3 && want.unstable_nodes == 1) ||
                           (want.total() == 2 && want.saddles == 2);
        o.require(shape, fmt("unexpected oracle census at (%g, %g)", x.x, x.y));
        o.require(got.index_sum == -2 && got.boundary_index == -2,
                  fmt("signed census %g, boundary index %g", got.index_sum, got.boundary_index));
        (want.total() == 4 ? inside : outside)++;
    }
    o.require(inside > 0 && outside > 0, "samples did not cover both sides of the caustic");
    if (o.passed)
        o.detail = fmt("200 points (%g inside, %g outside) match the closed form; index sum = boundary index = -2",
                       inside, outside);
    return o;
}

Outcome exclusion() {
    Outcome o;
    std::vector<BifurcationDiagram> generated;
    generated.push_back(default_diagram());
    {
        DiagramOptions opts;
        opts.base = Window{{-0.5, 0.0}, 1.25, 1.25, 32, 32};
        opts.fiber = kFiber;
        generated.push_back(assemble_diagram(elliptic_umbilic_slice(-0.5), opts));
        opts.base = Window::square({0.5, 0.5}, 1.5, 24);
        generated.push_back(assemble_diagram(
            perturb(normal_form(NormalForm::hyperbolic_umbilic), QuadraticPerturbation{0.1, 1, 1, 2}), opts));
    }
    long checks = 0;
    for (const auto& d : generated) {
        checks += d.exclusion_checks;
        o.require(d.exclusion_violations == 0, fmt("%g exclusion violations", d.exclusion_violations));
        const auto* ex = d.report.find("exclusion");
        o.require(ex && ex->passed, "exclusion check failed on a generated diagram");
    }
    o.require(checks > 0, "no exclusion checks were made");

    BifurcationDiagram bad;
    bad.grid_step = 0.1;
    BifurcationCurve a, b;
    a.pair = {0, 1};
    b.pair = {1, 0};
    a.points = {{-1, 0}, {0, 0}, {1, 0}};
    b.points = {{0.5, -1}, {0.5, 0}, {0.5, 1}};
    bad.strata = {a, b};
    const auto* ex = validate_diagram(bad).find("exclusion");
    o.require(ex && !ex->passed, "counterexample fixture was not rejected");
    if (o.passed)
        o.detail = fmt("%g scans over 3 diagrams, 0 violations; counterexample rejected", static_cast<double>(checks));
    return o;
}

Outcome splitting_consistency() {
    Outcome o;
    const cli::RunConfig cfg;
    const auto f = cli::build_function(cfg);
    const auto& d = default_diagram();
    o.require(!d.strata.empty(), "no strata traced");
    double worst = 0.0;
    long vertices = 0;
    for (const auto& c : d.strata) {
        for (std::size_t v = 0; v < c.points.size(); ++v) {
            PairContext ctx = c.contexts[v];
            const auto s = splitting(f, c.points[v], ctx, cfg.fiber, cfg.splitting);
            o.require(s.valid, "splitting invalid at a traced vertex");
            if (s.valid) worst = std::max(worst, std::abs(s.value));
            ++vertices;
        }
    }
    o.require(worst <= 1e-6, fmt("max |psi| %.3g", worst));
    o.require(d.located_zeros > 0, "no bisections were run");
    o.require(d.max_bracket <= 1e-10, fmt("max bracket %.3g", d.max_bracket));
    // fresh bisections from samples straddling each stratum
    double bracket = d.max_bracket;
    long located = d.located_zeros;
    for (const auto& c : d.strata) {
        for (double fraction : {0.2, 0.4, 0.6, 0.8}) {
            const std::size_t v = std::clamp<std::size_t>(static_cast<std::size_t>(fraction * c.points.size()), 1,
                                                           c.points.size() - 2);
            const Vec2 n = normalized(perp(c.points[v + 1] - c.points[v - 1]));
            // the domain of psi narrows near the caustic; shrink until both samples are valid
            double off = 0.25 * d.grid_step;
            for (; off > 1e-5; off *= 0.5) {
                PairContext ca = c.contexts[v], cb = c.contexts[v];
                if (splitting(f, c.points[v] - off * n, ca, cfg.fiber, cfg.splitting).valid &&
                    splitting(f, c.points[v] + off * n, cb, cfg.fiber, cfg.splitting).valid)
                    break;
            }
            o.require(off > 1e-5, "no valid straddling samples near a traced vertex");
            if (off <= 1e-5) continue;
            const auto loc = locate_on_segment(f, c.points[v] - off * n, c.points[v] + off * n, c.contexts[v],
                                               cfg.fiber, &d.caustic, cfg.splitting);
            o.require(loc.has_value(), "no zero between straddling samples");
            if (!loc) continue;
            o.require(std::abs(loc->psi) <= 1e-6, fmt("bisection stopped at |psi| %.3g", loc->psi));
            bracket = std::max(bracket, loc->bracket);
            ++located;
        }
    }
    o.require(bracket <= 1e-10, fmt("bracket width %.3g", bracket));
    o.require(d.report.passed(), "default diagram failed validation");
    o.require(default_seconds < 60.0, fmt("default diagram took %.1f s", default_seconds));
    if (o.passed)
        o.detail = fmt("%g vertices, max |psi| %.2g", static_cast<double>(vertices), worst) +
                   fmt(", max bracket %.2g over %g bisections", bracket, static_cast<double>(located)) +
                   fmt(", default diagram %.1f s", default_seconds);
    return o;
}

Outcome morse_boundary() {
    Outcome o;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double h = 1e-5;
    double worst = 0.0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (NormalForm kind : {NormalForm::fold, NormalForm::cusp_plus, NormalForm::cusp_minus,
                            NormalForm::elliptic_umbilic, NormalForm::hyperbolic_umbilic}) {
        const auto f = normal_form(kind);
        for (int k = 0; k < 100; ++k) {
            const Vec2 y{u(rng), u(rng)};
            const Vec2 e1{h, 0}, e2{0, h};
            const Vec2 g = f.gradient(y);
            const Sym2 H = f.hessian(y);
            const Vec2 d1 = (f.gradient(y + e1) - f.gradient(y - e1)) / (2 * h);
            const Vec2 d2 = (f.gradient(y + e2) - f.gradient(y - e2)) / (2 * h);
            for (double r : {rel(g.x, (f.eval(y + e1) - f.eval(y - e1)) / (2 * h)),
                             rel(g.y, (f.eval(y + e2) - f.eval(y - e2)) / (2 * h)), rel(H.xx, d1.x),
                             rel(H.xy, d1.y), rel(H.xy, d2.x), rel(H.yy, d2.y)})
                worst = std::max(worst, r);
        }
    }
    o.require(worst <= 1e-6, fmt("finite-difference relative error %.3g", worst));

    double drop = 0.0;
    long steps = 0;
    std::uniform_real_distribution<double> u1(-1.75, 0.75), u2(-1.25, 1.25);
    const std::vector<GeneratingFunction> fs{
        elliptic_umbilic_slice(1.0),
        perturb(normal_form(NormalForm::hyperbolic_umbilic), QuadraticPerturbation{0.1, 1, 1, 2})};
    for (const auto& f : fs) {
        for (int k = 0; k < 15; ++k) {
            const Vec2 x{u1(rng), u2(rng)};
            const auto p = portrait(f, x, kFiber);
            if (p.on_caustic) continue;
            for (const auto& s : p.separatrices) {
                const double sign = is_unstable(s.branch) ? 1.0 : -1.0;
                for (std::size_t v = 1; v < s.trajectory.size(); ++v) {
                    const double d = sign * (fx_value(f, x, s.trajectory[v]) - fx_value(f, x, s.trajectory[v - 1]));
                    drop = std::max(drop, -d);
                    ++steps;
                }
            }
        }
    }
    o.require(steps > 0, "no trajectories integrated");
    o.require(drop <= 1e-10, fmt("f_x decreased by %.3g along a trajectory", drop));
    if (o.passed)
        o.detail = fmt("max relative error %.2g; %g trajectory steps monotone", worst, static_cast<double>(steps));
    return o;
}

Outcome determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "gradbif_acceptance_determinism";
    fs::remove_all(root);
    std::string bytes[2];
    for (int k = 0; k < 2; ++k) {
        const fs::path dir = root / std::to_string(k);
        fs::create_directories(dir);
        const std::string cmd =
            std::string("\"") + GRADBIF_BIN + "\" diagram --out \"" + dir.string() + "\" > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        o.require(rc == 0, "diagram run exited with a failure status");
        std::ifstream in(dir / "diagram.json", std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        bytes[k] = ss.str();
    }
    o.require(!bytes[0].empty(), "no diagram.json written");
    o.require(bytes[0] == bytes[1], "diagram.json differs between runs");
    fs::remove_all(root);
    if (o.passed) o.detail = fmt("two runs, %g identical bytes", static_cast<double>(bytes[0].size()));
    return o;
}

}  // namespace

int main() {
    report(1, "critical circle formula", 5, critical_circle);
    report(2, "tricuspoid slices", 5, tricuspoid);
    report(3, "hyperbolic umbilic caustic", 5, hyperbolic);
    report(4, "critical-point census", 30, census);
    report(5, "exclusion property", 0, exclusion);
    report(6, "splitting-function consistency", 0, splitting_consistency);
    report(7, "Morse-function boundary", 0, morse_boundary);
    report(8, "determinism", 0, determinism);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures;
}
