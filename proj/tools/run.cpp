#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

namespace gradbif::cli {

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Caustics, gradient-flow portraits and bifurcation diagrams of 2D Lagrangian maps", "gradbif"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int workers = -1;
    long long seed = -1;
    std::string input;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value configuration file with [section] headers");
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--workers", workers, "worker threads (0: available parallelism)")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "random seed for region sampling")->check(CLI::NonNegativeNumber);
    };
    CLI::App* caustic = app.add_subcommand("caustic", "critical locus and caustic with fold/cusp labels");
    CLI::App* portrait = app.add_subcommand("portrait", "phase portrait of grad f_x at [portrait] x1, x2");
    CLI::App* diagram = app.add_subcommand("diagram", "bifurcation diagram with validation report");
    CLI::App* slices = app.add_subcommand("slices", "caustics of the elliptic umbilic slices at [slices] t");
    CLI::App* validate = app.add_subcommand("validate", "re-run the structural checks on a diagram.json");
    for (CLI::App* s : {caustic, portrait, diagram, slices, validate}) add_common(s);
    validate->add_option("--input", input, "diagram document (default: <out>/diagram.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    try {
        if (validate->parsed()) {
            const auto r = cmd_validate(input.empty() ? std::filesystem::path(out_dir) / "diagram.json" : std::filesystem::path(input),
                                        out_dir);
            out << r.message;
            return r.exit_code;
        }
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (workers >= 0) cfg.workers = workers;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        CommandResult r;
        if (caustic->parsed()) r = cmd_caustic(cfg, out_dir);
        if (portrait->parsed()) r = cmd_portrait(cfg, out_dir);
        if (diagram->parsed()) r = cmd_diagram(cfg, out_dir);
        if (slices->parsed()) r = cmd_slices(cfg, out_dir);
        out << r.message;
        if (!r.message.empty() && r.message.back() != '\n') out << '\n';
        return r.exit_code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace gradbif::cli
