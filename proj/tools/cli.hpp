#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradbif/bifurcation.hpp"
#include "gradbif/document.hpp"
#include "gradbif/field.hpp"

namespace gradbif::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kOnCaustic = 3, kValidationFailure = 4 };

/// Bad configuration or input text; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // [function]
    std::string form = "elliptic-umbilic";
    std::string polynomial;  ///< overrides `form` when non-empty
    double slice_t = 0.0;    ///< adds t*y1^2
    // [perturbation]; eps = 0 disables it
    QuadraticPerturbation perturbation{2.0, 1.0, 0.0, 0.0};
    // [base], [fiber]
    Window base{{-0.5, 0.0}, 1.25, 1.25, 64, 64};
    Window fiber = Window::square({0.0, 0.0}, 3.0, 128);
    // [portrait]
    Vec2 x{-0.25, 0.0};
    // [slices]
    std::vector<double> slices{-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0};
    // [diagram]
    int region_samples = 3;
    // [tolerances]
    LocusOptions locus;
    SplittingOptions splitting;
    // [run]
    int workers = 0;
    std::uint64_t seed = 1;
};

/// Parses key = value text with [section] headers. Unknown keys and
/// malformed values raise ConfigError naming the key.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, grouped by section.
Json config_json(const RunConfig& cfg);

/// Builds the generating function; polynomial text errors carry the
/// character position. Total degree is capped at 8.
GeneratingFunction build_function(const RunConfig& cfg);

DiagramOptions diagram_options(const RunConfig& cfg);

/// Writes via a temporary file in the same directory and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct CommandResult {
    int exit_code = kOk;
    std::vector<std::filesystem::path> files;
    std::string message;
};

CommandResult cmd_caustic(const RunConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_portrait(const RunConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_diagram(const RunConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_slices(const RunConfig& cfg, const std::filesystem::path& out);
/// Re-runs the structural checks on an existing diagram document.
CommandResult cmd_validate(const std::filesystem::path& diagram_json, const std::filesystem::path& out);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace gradbif::cli
