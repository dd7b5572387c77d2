#include "gradbif/document.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradbif {

namespace {

Json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round_fixed(v);
}

Json points(const Polyline& line) {
    Json arr = Json::array();
    for (Vec2 p : line) arr.push_back(to_json(p));
    return arr;
}

Json pair_json(std::pair<int, int> p) { return Json::array({p.first, p.second}); }

Vec2 vec_from(const Json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a point [x1, x2]");
    return {j[0].is_null() ? NAN : j[0].get<double>(), j[1].is_null() ? NAN : j[1].get<double>()};
}

Polyline polyline_from(const Json& j) {
    Polyline out;
    for (const auto& p : j) out.push_back(vec_from(p));
    return out;
}

std::pair<int, int> pair_from(const Json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a pair [i, j]");
    return {j[0].get<int>(), j[1].get<int>()};
}

Branch branch_from(const std::string& s) {
    for (Branch b : {Branch::unstable_plus, Branch::unstable_minus, Branch::stable_plus, Branch::stable_minus}) {
        if (to_string(b) == s) return b;
    }
    throw std::invalid_argument("unknown branch '" + s + "'");
}

CurveEnd end_from(const std::string& s) {
    for (CurveEnd e : {CurveEnd::caustic_contact, CurveEnd::window_exit, CurveEnd::stratum_intersection}) {
        if (to_string(e) == s) return e;
    }
    throw std::invalid_argument("unknown curve end '" + s + "'");
}

CausticLabel label_from(const std::string& s) {
    for (CausticLabel l : {CausticLabel::fold, CausticLabel::cusp, CausticLabel::non_morse}) {
        if (to_string(l) == s) return l;
    }
    throw std::invalid_argument("unknown caustic label '" + s + "'");
}

Json limit_json(const Limit& l) {
    Json j;
    switch (l.kind) {
        case LimitKind::node: j["kind"] = "node"; break;
        case LimitKind::saddle: j["kind"] = "saddle"; break;
        case LimitKind::window_exit: j["kind"] = "window-exit"; break;
        case LimitKind::max_steps: j["kind"] = "max-steps"; break;
    }
    if (l.kind == LimitKind::node || l.kind == LimitKind::saddle) j["id"] = l.id;
    return j;
}

Json check_json(const CheckResult& c) {
    Json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["message"] = c.message;
    j["witnesses"] = points(c.witnesses);
    return j;
}

}  // namespace

double round_fixed(double v) {
    const double r = std::round(v * 1e12) / 1e12;
    return r == 0.0 ? 0.0 : r;
}

Json to_json(Vec2 p) { return Json::array({num(p.x), num(p.y)}); }

Json to_json(const Window& w) {
    Json j;
    j["center"] = to_json(w.center);
    j["half_widths"] = Json::array({num(w.half_width1), num(w.half_width2)});
    j["resolution"] = Json::array({w.resolution1, w.resolution2});
    return j;
}

Window window_from_json(const Json& j) {
    Window w;
    w.center = vec_from(j.at("center"));
    w.half_width1 = j.at("half_widths").at(0).get<double>();
    w.half_width2 = j.at("half_widths").at(1).get<double>();
    w.resolution1 = j.at("resolution").at(0).get<int>();
    w.resolution2 = j.at("resolution").at(1).get<int>();
    return w;
}

Json to_json(const CausticCurve& c) {
    Json j;
    Json comps = Json::array();
    for (std::size_t k = 0; k < c.components.size(); ++k) {
        Json comp;
        comp["closed"] = k < c.closed.size() && c.closed[k];
        comp["points"] = points(c.components[k]);
        if (k < c.labels.size()) {
            Json labels = Json::array();
            for (CausticLabel l : c.labels[k]) labels.push_back(std::string(to_string(l)));
            comp["labels"] = labels;
        }
        comps.push_back(comp);
    }
    j["components"] = comps;
    j["cusps"] = points(c.cusp_points);
    j["degenerate_points"] = points(c.non_morse_points);
    j["coarse_warning"] = c.coarse_warning;
    j["warnings"] = c.warnings;
    return j;
}

Json to_json(const PhasePortrait& p) {
    Json j;
    j["x"] = to_json(p.x);
    j["window"] = to_json(p.window);
    j["on_caustic"] = p.on_caustic;
    j["census_consistent"] = p.census_consistent;
    j["boundary_index"] = p.boundary_index;
    Json cps = Json::array();
    for (const auto& c : p.critical_points) {
        Json cj;
        cj["id"] = c.id;
        cj["position"] = to_json(c.position);
        cj["eigenvalues"] = Json::array({num(c.eigenvalues[0]), num(c.eigenvalues[1])});
        cj["morse_index"] = c.morse_index;
        cj["kind"] = std::string(to_string(c.kind));
        cps.push_back(cj);
    }
    j["critical_points"] = cps;
    Json seps = Json::array();
    for (const auto& s : p.separatrices) {
        Json sj;
        sj["saddle"] = s.saddle_id;
        sj["branch"] = std::string(to_string(s.branch));
        sj["limit"] = limit_json(s.limit);
        sj["steps"] = s.steps;
        sj["trajectory"] = points(s.trajectory);
        seps.push_back(sj);
    }
    j["separatrices"] = seps;
    Json conns = Json::array();
    for (auto c : p.connections) conns.push_back(pair_json(c));
    j["connections"] = conns;
    Json ns = Json::array();
    for (auto c : p.node_saddle_lines) ns.push_back(pair_json(c));
    j["node_saddle_lines"] = ns;
    j["signature"] = p.signature;
    j["canonical_signature"] = p.canonical_signature;
    return j;
}

Json to_json(const ValidationReport& r) {
    Json j;
    j["passed"] = r.passed();
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(check_json(c));
    j["checks"] = checks;
    j["notes"] = r.notes;
    return j;
}

Json to_json(const BifurcationDiagram& d) {
    Json j;
    j["base"] = to_json(d.base);
    j["fiber"] = to_json(d.fiber);
    j["grid_step"] = num(d.grid_step);
    j["caustic"] = to_json(d.caustic);

    Json strata = Json::array();
    for (const auto& c : d.strata) {
        Json cj;
        cj["pair"] = pair_json(c.pair);
        cj["branches"] = Json::array({std::string(to_string(c.branches.unstable)),
                                      std::string(to_string(c.branches.stable))});
        cj["ends"] = Json::array({std::string(to_string(c.ends[0])), std::string(to_string(c.ends[1]))});
        cj["closed"] = c.closed;
        cj["fold_flag"] = c.fold_flag;
        cj["points"] = points(c.points);
        Json psi = Json::array();
        for (double v : c.psi) psi.push_back(num(v));
        cj["psi"] = psi;
        strata.push_back(cj);
    }
    j["strata"] = strata;

    Json c2 = Json::array();
    for (const auto& p : d.codim2_points) {
        Json pj;
        pj["x"] = to_json(p.x);
        pj["first"] = pair_json(p.first);
        pj["second"] = pair_json(p.second);
        pj["curves"] = Json::array({p.curve_a, p.curve_b});
        c2.push_back(pj);
    }
    j["codim2_points"] = c2;

    Json regions = Json::array();
    for (const auto& r : d.regions) {
        Json rj;
        rj["sample"] = to_json(r.sample);
        rj["signature"] = r.signature;
        rj["sample_count"] = r.sample_count;
        rj["consistent"] = r.consistent;
        rj["checked"] = points(r.checked);
        regions.push_back(rj);
    }
    j["regions"] = regions;

    Json wit = Json::array();
    for (const auto& w : d.witnesses) {
        Json wj;
        wj["curve"] = w.curve;
        wj["x_on"] = to_json(w.x_on);
        wj["x_minus"] = to_json(w.x_minus);
        wj["x_plus"] = to_json(w.x_plus);
        wj["signature_minus"] = w.signature_minus;
        wj["signature_plus"] = w.signature_plus;
        wj["changed"] = w.changed;
        wj["toggle_ok"] = w.toggle_ok;
        wj["admissible"] = w.admissible;
        wit.push_back(wj);
    }
    j["witnesses"] = wit;

    Json stats;
    stats["exclusion_checks"] = d.exclusion_checks;
    stats["exclusion_violations"] = d.exclusion_violations;
    stats["located_zeros"] = d.located_zeros;
    stats["max_bracket"] = num(d.max_bracket);
    j["stats"] = stats;
    j["unresolved"] = points(d.unresolved);
    j["warnings"] = d.warnings;
    j["report"] = to_json(d.report);
    return j;
}

BifurcationDiagram diagram_from_json(const Json& j) {
    try {
        BifurcationDiagram d;
        d.base = window_from_json(j.at("base"));
        d.fiber = window_from_json(j.at("fiber"));
        d.grid_step = j.at("grid_step").get<double>();

        const Json& cj = j.at("caustic");
        for (const auto& comp : cj.at("components")) {
            d.caustic.components.push_back(polyline_from(comp.at("points")));
            d.caustic.closed.push_back(comp.value("closed", false));
            if (comp.contains("labels")) {
                std::vector<CausticLabel> labels;
                for (const auto& l : comp["labels"]) labels.push_back(label_from(l.get<std::string>()));
                d.caustic.labels.push_back(std::move(labels));
            }
        }
        d.caustic.cusp_points = polyline_from(cj.at("cusps"));
        d.caustic.non_morse_points = polyline_from(cj.at("degenerate_points"));

        for (const auto& sj : j.at("strata")) {
            BifurcationCurve c;
            c.pair = pair_from(sj.at("pair"));
            c.branches = {branch_from(sj.at("branches").at(0).get<std::string>()),
                          branch_from(sj.at("branches").at(1).get<std::string>())};
            c.ends = {end_from(sj.at("ends").at(0).get<std::string>()),
                      end_from(sj.at("ends").at(1).get<std::string>())};
            c.closed = sj.value("closed", false);
            c.fold_flag = sj.value("fold_flag", false);
            c.points = polyline_from(sj.at("points"));
            for (const auto& v : sj.at("psi")) c.psi.push_back(v.is_null() ? NAN : v.get<double>());
            d.strata.push_back(std::move(c));
        }
        for (const auto& pj : j.at("codim2_points")) {
            Codim2Point p;
            p.x = vec_from(pj.at("x"));
            p.first = pair_from(pj.at("first"));
            p.second = pair_from(pj.at("second"));
            p.curve_a = pj.at("curves").at(0).get<int>();
            p.curve_b = pj.at("curves").at(1).get<int>();
            d.codim2_points.push_back(p);
        }
        for (const auto& rj : j.at("regions")) {
            Region r;
            r.sample = vec_from(rj.at("sample"));
            r.signature = rj.at("signature").get<std::string>();
            r.sample_count = rj.at("sample_count").get<int>();
            r.consistent = rj.at("consistent").get<bool>();
            r.checked = polyline_from(rj.at("checked"));
            d.regions.push_back(std::move(r));
        }
        for (const auto& wj : j.at("witnesses")) {
            CrossingWitness w;
            w.curve = wj.at("curve").get<int>();
            w.x_on = vec_from(wj.at("x_on"));
            w.x_minus = vec_from(wj.at("x_minus"));
            w.x_plus = vec_from(wj.at("x_plus"));
            w.signature_minus = wj.at("signature_minus").get<std::string>();
            w.signature_plus = wj.at("signature_plus").get<std::string>();
            w.changed = wj.at("changed").get<std::vector<std::string>>();
            w.toggle_ok = wj.at("toggle_ok").get<bool>();
            w.admissible = wj.at("admissible").get<bool>();
            d.witnesses.push_back(std::move(w));
        }
        const Json& stats = j.at("stats");
        d.exclusion_checks = stats.at("exclusion_checks").get<long>();
        d.exclusion_violations = stats.at("exclusion_violations").get<long>();
        d.located_zeros = stats.at("located_zeros").get<long>();
        d.max_bracket = stats.at("max_bracket").get<double>();
        d.unresolved = polyline_from(j.at("unresolved"));
        d.warnings = j.at("warnings").get<std::vector<std::string>>();
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed diagram document: ") + e.what());
    }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string trajectories_csv(const PhasePortrait& p, const GeneratingFunction& f) {
    std::string out = "saddle,branch,limit,index,y1,y2,fx\n";
    char buf[96];
    for (const auto& s : p.separatrices) {
        const std::string head =
            std::to_string(s.saddle_id) + "," + std::string(to_string(s.branch)) + "," + to_string(s.limit) + ",";
        for (std::size_t k = 0; k < s.trajectory.size(); ++k) {
            const Vec2 y = s.trajectory[k];
            std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g\n", k, round_fixed(y.x), round_fixed(y.y),
                          round_fixed(fx_value(f, p.x, y)));
            out += head;
            out += buf;
        }
    }
    return out;
}

std::string report_text(const ValidationReport& r) {
    std::string out;
    for (const auto& c : r.checks) {
        out += (c.passed ? "PASS " : "FAIL ") + c.name;
        if (!c.message.empty()) out += ": " + c.message;
        if (!c.witnesses.empty()) out += " (" + std::to_string(c.witnesses.size()) + " witnesses)";
        out += "\n";
        char buf[96];
        for (std::size_t k = 0; k < c.witnesses.size() && k < 5; ++k) {
            std::snprintf(buf, sizeof buf, "  at (%.9g, %.9g)\n", c.witnesses[k].x, c.witnesses[k].y);
            out += buf;
        }
    }
    for (const auto& n : r.notes) out += "note: " + n + "\n";
    out += r.passed() ? "all checks passed\n" : "validation failed\n";
    return out;
}

}  // namespace gradbif
