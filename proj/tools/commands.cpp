#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <system_error>

#include <unistd.h>

#include "cli.hpp"
#include "gradbif/svg.hpp"

#ifndef GRADBIF_VERSION
#define GRADBIF_VERSION "0.0.0"
#endif

namespace gradbif::cli {

namespace fs = std::filesystem;

std::string version() { return GRADBIF_VERSION; }

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed for " + path.string());
        }
    }
    fs::rename(tmp, path);
}

namespace {

Json function_json(const GeneratingFunction& f) {
    Json j;
    j["label"] = f.label();
    j["polynomial"] = f.poly().to_string();
    return j;
}

void write_manifest(const std::string& command, const RunConfig* cfg, const GeneratingFunction* f,
                    CommandResult& r, const fs::path& out) {
    Json m;
    m["tool"] = "gradbif";
    m["version"] = version();
    m["command"] = command;
    if (cfg) m["config"] = config_json(*cfg);
    if (f) m["function"] = function_json(*f);
    Json files = Json::array();
    for (const auto& p : r.files) files.push_back(p.filename().string());
    m["outputs"] = files;
    m["exit_code"] = r.exit_code;
    const fs::path path = out / (command == "validate" ? "validate-manifest.json" : "manifest.json");
    write_atomic(path, dump(m));
    r.files.push_back(path);
}

void emit(CommandResult& r, const fs::path& path, const std::string& content) {
    write_atomic(path, content);
    r.files.push_back(path);
}

// Keeps only the parts of the caustic inside the base window.
CausticCurve clip(const CausticCurve& c, const Window& w) {
    CausticCurve out;
    out.coarse_warning = c.coarse_warning;
    out.warnings = c.warnings;
    for (std::size_t k = 0; k < c.components.size(); ++k) {
        const Polyline& line = c.components[k];
        const bool labeled = k < c.labels.size();
        bool all_inside = true;
        for (Vec2 p : line) all_inside = all_inside && w.contains(p);
        if (all_inside) {
            out.components.push_back(line);
            out.closed.push_back(k < c.closed.size() && c.closed[k]);
            if (labeled) out.labels.push_back(c.labels[k]);
            continue;
        }
        Polyline part;
        std::vector<CausticLabel> labels;
        auto flush = [&] {
            if (part.size() >= 2) {
                out.components.push_back(part);
                out.closed.push_back(false);
                if (labeled) out.labels.push_back(labels);
            }
            part.clear();
            labels.clear();
        };
        for (std::size_t v = 0; v < line.size(); ++v) {
            if (w.contains(line[v])) {
                part.push_back(line[v]);
                if (labeled) labels.push_back(c.labels[k][v]);
            } else {
                flush();
            }
        }
        flush();
    }
    for (Vec2 p : c.cusp_points) {
        if (w.contains(p)) out.cusp_points.push_back(p);
    }
    for (Vec2 p : c.non_morse_points) {
        if (w.contains(p)) out.non_morse_points.push_back(p);
    }
    return out;
}

LocusOptions locus_options(const RunConfig& cfg) {
    LocusOptions lo = cfg.locus;
    lo.workers = cfg.workers;
    return lo;
}

}  // namespace

CommandResult cmd_caustic(const RunConfig& cfg, const fs::path& out) {
    CommandResult r;
    const GeneratingFunction f = build_function(cfg);
    const CausticCurve c = clip(compute_caustic(f, cfg.fiber, locus_options(cfg)), cfg.base);
    Json doc;
    doc["function"] = function_json(f);
    doc["window"] = to_json(cfg.base);
    doc["caustic"] = to_json(c);
    emit(r, out / "caustic.json", dump(doc));
    emit(r, out / "caustic.svg", caustic_svg(c, cfg.base));
    r.message = std::to_string(c.components.size()) + " components, " + std::to_string(c.cusp_count()) +
                " cusps, " + std::to_string(c.non_morse_points.size()) + " degenerate points";
    write_manifest("caustic", &cfg, &f, r, out);
    return r;
}

CommandResult cmd_portrait(const RunConfig& cfg, const fs::path& out) {
    CommandResult r;
    const GeneratingFunction f = build_function(cfg);
    const PhasePortrait p = portrait(f, cfg.x, cfg.fiber, cfg.splitting.flow);
    Json doc;
    doc["function"] = function_json(f);
    doc["portrait"] = to_json(p);
    emit(r, out / "portrait.json", dump(doc));
    emit(r, out / "portrait.svg", portrait_svg(p));
    emit(r, out / "trajectories.csv", trajectories_csv(p, f));
    if (p.on_caustic) {
        r.exit_code = kOnCaustic;
        r.message = "on-caustic: a critical point is degenerate";
    } else {
        r.message = std::to_string(p.critical_points.size()) + " critical points, " +
                    std::to_string(p.connections.size()) + " connections; signature " + p.signature;
    }
    write_manifest("portrait", &cfg, &f, r, out);
    return r;
}

CommandResult cmd_diagram(const RunConfig& cfg, const fs::path& out) {
    CommandResult r;
    const GeneratingFunction f = build_function(cfg);
    const BifurcationDiagram d = assemble_diagram(f, diagram_options(cfg));
    Json doc;
    doc["function"] = function_json(f);
    doc["diagram"] = to_json(d);
    emit(r, out / "diagram.json", dump(doc));
    emit(r, out / "diagram.svg", diagram_svg(d));
    const std::string report = report_text(d.report);
    emit(r, out / "report.txt", report);
    r.exit_code = d.report.passed() ? kOk : kValidationFailure;
    r.message = std::to_string(d.strata.size()) + " strata, " + std::to_string(d.regions.size()) + " regions\n" +
                report;
    write_manifest("diagram", &cfg, &f, r, out);
    return r;
}

CommandResult cmd_slices(const RunConfig& cfg, const fs::path& out) {
    CommandResult r;
    const auto slices = pyramid_slices(cfg.slices, cfg.fiber, locus_options(cfg));
    Json doc;
    doc["window"] = to_json(cfg.base);
    Json arr = Json::array();
    std::vector<CausticCurve> clipped;
    for (std::size_t k = 0; k < slices.size(); ++k) {
        clipped.push_back(clip(slices[k], cfg.base));
        Json s;
        s["t"] = round_fixed(cfg.slices[k]);
        s["cusp_count"] = clipped.back().cusp_count();
        s["caustic"] = to_json(clipped.back());
        arr.push_back(s);
        char t[32];
        std::snprintf(t, sizeof t, "t=%g: ", cfg.slices[k]);
        r.message += t + std::to_string(clipped.back().cusp_count()) +
                     " cusps, " + std::to_string(clipped.back().non_morse_points.size()) + " degenerate points\n";
    }
    doc["slices"] = arr;
    emit(r, out / "slices.json", dump(doc));
    emit(r, out / "slices.svg", slices_svg(clipped, cfg.base));
    write_manifest("slices", &cfg, nullptr, r, out);
    return r;
}

CommandResult cmd_validate(const fs::path& diagram_json, const fs::path& out) {
    CommandResult r;
    std::ifstream in(diagram_json);
    if (!in) throw ConfigError("cannot open " + diagram_json.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(diagram_json.string() + ": " + e.what());
    }
    BifurcationDiagram d;
    try {
        d = diagram_from_json(doc.contains("diagram") ? doc["diagram"] : doc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(diagram_json.string() + ": " + e.what());
    }
    const ValidationReport rep = validate_diagram(d);
    const std::string report = report_text(rep);
    emit(r, out / "validate-report.txt", report);
    r.exit_code = rep.passed() ? kOk : kValidationFailure;
    r.message = report;
    write_manifest("validate", nullptr, nullptr, r, out);
    return r;
}

}  // namespace gradbif::cli
