#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/program_options.hpp>

#include "cli.hpp"

namespace gradbif::cli {

namespace po = boost::program_options;

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct Binding {
    std::string key;
    std::function<Json()> get;
};

class Schema {
public:
    template <class T>
    void bind(const std::string& key, T* field) {
        desc.add_options()(key.c_str(), po::value<T>(field));
        bindings.push_back({key, [field] { return Json(*field); }});
    }

    po::options_description desc{"configuration"};
    std::vector<Binding> bindings;
};

// Shorthand keys that set both axes; NaN / 0 mean "not given".
struct Shorthands {
    double base_half_width = kUnset;
    double fiber_half_width = kUnset;
    int base_resolution = 0;
    int fiber_resolution = 0;
    std::string slices;
};

void build_schema(Schema& s, RunConfig& c, Shorthands& sh) {
    s.bind("function.form", &c.form);
    s.bind("function.polynomial", &c.polynomial);
    s.bind("function.t", &c.slice_t);
    s.bind("perturbation.eps", &c.perturbation.eps);
    s.bind("perturbation.a", &c.perturbation.a);
    s.bind("perturbation.b", &c.perturbation.b);
    s.bind("perturbation.c", &c.perturbation.c);
    for (auto [name, w] : {std::pair{"base", &c.base}, std::pair{"fiber", &c.fiber}}) {
        const std::string p = name;
        s.bind(p + ".center1", &w->center.x);
        s.bind(p + ".center2", &w->center.y);
        s.bind(p + ".half_width1", &w->half_width1);
        s.bind(p + ".half_width2", &w->half_width2);
        s.bind(p + ".resolution1", &w->resolution1);
        s.bind(p + ".resolution2", &w->resolution2);
    }
    s.desc.add_options()("base.half_width", po::value<double>(&sh.base_half_width));
    s.desc.add_options()("fiber.half_width", po::value<double>(&sh.fiber_half_width));
    s.desc.add_options()("base.resolution", po::value<int>(&sh.base_resolution));
    s.desc.add_options()("fiber.resolution", po::value<int>(&sh.fiber_resolution));
    s.desc.add_options()("slices.t", po::value<std::string>(&sh.slices));
    s.bind("portrait.x1", &c.x.x);
    s.bind("portrait.x2", &c.x.y);
    s.bind("diagram.region_samples", &c.region_samples);

    s.bind("tolerances.tol_locus", &c.locus.tol_locus);
    s.bind("tolerances.tol_singular", &c.locus.tol_singular);
    s.bind("tolerances.grid_jitter", &c.locus.grid_jitter);
    FlowOptions& fo = c.splitting.flow;
    s.bind("tolerances.tol_root", &fo.tol_root);
    s.bind("tolerances.tol_degenerate", &fo.tol_degenerate);
    s.bind("tolerances.dedup_radius", &fo.dedup_radius);
    s.bind("tolerances.seed_resolution", &fo.seed_resolution);
    s.bind("tolerances.max_seed_refinements", &fo.max_seed_refinements);
    s.bind("tolerances.delta0", &fo.delta0);
    s.bind("tolerances.tol_capture", &fo.tol_capture);
    s.bind("tolerances.tol_align_deg", &fo.tol_align_deg);
    s.bind("tolerances.rtol", &fo.rtol);
    s.bind("tolerances.atol", &fo.atol);
    s.bind("tolerances.max_steps", &fo.max_steps);
    SplittingOptions& so = c.splitting;
    s.bind("tolerances.tol_psi", &so.tol_psi);
    s.bind("tolerances.section_factor", &so.section_factor);
    s.bind("tolerances.bracket_tol", &so.bracket_tol);
    s.bind("tolerances.tol_corrector", &so.tol_corrector);
    s.bind("tolerances.caustic_margin", &so.caustic_margin);
    s.bind("tolerances.step_min", &so.step_min);
    s.bind("tolerances.step_max", &so.step_max);
    s.bind("tolerances.fd_step", &so.fd_step);
    s.bind("tolerances.max_vertices", &so.max_vertices);

    s.bind("run.workers", &c.workers);
    s.bind("run.seed", &c.seed);
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("config: invalid number '" + item + "' in " + key);
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos) {
            throw ConfigError("config: invalid number '" + item + "' in " + key);
        }
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("config: " + key + " is empty");
    return out;
}

void check_window(const Window& w, const std::string& name, int min_resolution) {
    if (!(w.half_width1 > 0.0) || !(w.half_width2 > 0.0) || !std::isfinite(w.half_width1) ||
        !std::isfinite(w.half_width2)) {
        throw ConfigError("config: [" + name + "] window is empty (half widths must be positive)");
    }
    if (w.resolution1 < min_resolution || w.resolution2 < min_resolution) {
        throw ConfigError("config: [" + name + "] resolution must be at least " + std::to_string(min_resolution));
    }
}

void require_positive(double v, const std::string& key) {
    if (!(v > 0.0)) throw ConfigError("config: " + key + " must be positive");
}

void check(const RunConfig& c) {
    check_window(c.base, "base", 2);
    check_window(c.fiber, "fiber", 16);
    if (c.perturbation.eps < 0.0) throw ConfigError("config: perturbation.eps must be >= 0");
    if (c.workers < 0) throw ConfigError("config: run.workers must be >= 0");
    if (c.region_samples < 1) throw ConfigError("config: diagram.region_samples must be >= 1");
    const FlowOptions& fo = c.splitting.flow;
    require_positive(c.locus.tol_locus, "tolerances.tol_locus");
    require_positive(fo.tol_root, "tolerances.tol_root");
    require_positive(fo.tol_degenerate, "tolerances.tol_degenerate");
    require_positive(fo.delta0, "tolerances.delta0");
    require_positive(fo.tol_capture, "tolerances.tol_capture");
    require_positive(fo.rtol, "tolerances.rtol");
    require_positive(c.splitting.tol_psi, "tolerances.tol_psi");
    require_positive(c.splitting.step_min, "tolerances.step_min");
    if (c.splitting.step_max < c.splitting.step_min) {
        throw ConfigError("config: tolerances.step_max must be >= tolerances.step_min");
    }
    if (fo.seed_resolution < 2) throw ConfigError("config: tolerances.seed_resolution must be >= 2");
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    Shorthands sh;
    Schema schema;
    build_schema(schema, cfg, sh);
    try {
        po::variables_map vm;
        po::store(po::parse_config_file(in, schema.desc, false), vm);
        po::notify(vm);
    } catch (const po::error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!std::isnan(sh.base_half_width)) cfg.base.half_width1 = cfg.base.half_width2 = sh.base_half_width;
    if (!std::isnan(sh.fiber_half_width)) cfg.fiber.half_width1 = cfg.fiber.half_width2 = sh.fiber_half_width;
    if (sh.base_resolution != 0) cfg.base.resolution1 = cfg.base.resolution2 = sh.base_resolution;
    if (sh.fiber_resolution != 0) cfg.fiber.resolution1 = cfg.fiber.resolution2 = sh.fiber_resolution;
    if (!sh.slices.empty()) cfg.slices = parse_list(sh.slices, "slices.t");
    check(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    return parse_config(in);
}

Json config_json(const RunConfig& cfg) {
    RunConfig copy = cfg;
    Shorthands sh;
    Schema schema;
    build_schema(schema, copy, sh);
    Json out = Json::object();
    for (const auto& b : schema.bindings) {
        const auto dot = b.key.find('.');
        out[b.key.substr(0, dot)][b.key.substr(dot + 1)] = b.get();
    }
    out["slices"]["t"] = cfg.slices;
    return out;
}

GeneratingFunction build_function(const RunConfig& cfg) {
    GeneratingFunction f;
    if (!cfg.polynomial.empty()) {
        Poly2 p;
        try {
            p = Poly2::parse(cfg.polynomial);
        } catch (const PolyParseError& e) {
            throw ConfigError(std::string("function.polynomial: ") + e.what());
        }
        if (p.degree() > 8) throw ConfigError("function.polynomial: total degree exceeds 8");
        f = GeneratingFunction(p, "polynomial");
    } else {
        try {
            f = normal_form(parse_normal_form(cfg.form));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("function.form: ") + e.what());
        }
    }
    if (cfg.slice_t != 0.0) f = perturb(f, Poly2::monomial(cfg.slice_t, 2, 0));
    if (cfg.perturbation.eps > 0.0) f = perturb(f, cfg.perturbation);
    return f;
}

DiagramOptions diagram_options(const RunConfig& cfg) {
    DiagramOptions o;
    o.base = cfg.base;
    o.fiber = cfg.fiber;
    o.workers = cfg.workers;
    o.seed = cfg.seed;
    o.region_samples = cfg.region_samples;
    o.locus = cfg.locus;
    o.splitting = cfg.splitting;
    return o;
}

}  // namespace gradbif::cli
