#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace gradbif;
using namespace gradbif::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gradbif_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string config_error(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "gradbif");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "run.ini";
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("config: defaults, sections and shorthands") {
    const RunConfig d = parse("");
    CHECK(d.form == "elliptic-umbilic");
    CHECK(d.base.resolution1 == 64);
    CHECK(d.slices.size() == 7);

    const RunConfig c = parse(
        "[function]\nform = hyperbolic-umbilic\n"
        "[base]\nhalf_width = 2\nresolution = 32\ncenter1 = 0.5\n"
        "[fiber]\nresolution1 = 64\n"
        "[slices]\nt = 0.5, -0.5\n"
        "[tolerances]\ntol_root = 1e-11\n"
        "[run]\nworkers = 2\nseed = 9\n");
    CHECK(c.form == "hyperbolic-umbilic");
    CHECK(c.base.half_width1 == 2.0);
    CHECK(c.base.half_width2 == 2.0);
    CHECK(c.base.resolution1 == 32);
    CHECK(c.base.resolution2 == 32);
    CHECK(c.base.center.x == 0.5);
    CHECK(c.fiber.resolution1 == 64);
    CHECK(c.fiber.resolution2 == 128);
    CHECK(c.slices == std::vector<double>{0.5, -0.5});
    CHECK(c.splitting.flow.tol_root == 1e-11);
    CHECK(c.workers == 2);
    CHECK(c.seed == 9u);
}

TEST_CASE("config errors name the key") {
    CHECK(config_error("[base]\nbogus = 1\n").find("base.bogus") != std::string::npos);
    CHECK(config_error("[base]\nhalf_width1 = abc\n").find("half_width1") != std::string::npos);
    CHECK(config_error("[base]\nhalf_width = 0\n").find("window is empty") != std::string::npos);
    CHECK(config_error("[fiber]\nresolution = 8\n").find("fiber") != std::string::npos);
    CHECK(config_error("[slices]\nt = 1, x\n").find("slices.t") != std::string::npos);
    CHECK(config_error("[tolerances]\nrtol = -1\n").find("tolerances.rtol") != std::string::npos);
    CHECK(config_error("[base]\nresolution = 8\n").empty());
}

TEST_CASE("config_json lists every resolved key") {
    const Json j = config_json(parse("[base]\nresolution = 20\n"));
    CHECK(j["base"]["resolution1"] == 20);
    CHECK(j["function"]["form"] == "elliptic-umbilic");
    CHECK(j["perturbation"]["eps"] == 2.0);
    CHECK(j["tolerances"].contains("tol_psi"));
    CHECK(j["run"]["seed"] == 1);
    CHECK(j["slices"]["t"].size() == 7);
}

TEST_CASE("build_function") {
    RunConfig c;
    c.perturbation.eps = 0.0;
    CHECK(build_function(c).poly() == normal_form(NormalForm::elliptic_umbilic).poly());
    CHECK(build_function(RunConfig{}).poly() == elliptic_umbilic_slice(1.0).poly());
    c.slice_t = 0.5;
    CHECK(build_function(c).poly() == elliptic_umbilic_slice(0.5).poly());

    c.polynomial = "y1^2 + * y2";
    try {
        (void)build_function(c);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("7") != std::string::npos);
    }
    c.polynomial = "y1^5*y2^4";
    CHECK_THROWS_AS((void)build_function(c), ConfigError);
    c.polynomial = "y1^4*y2^4";
    CHECK_NOTHROW((void)build_function(c));
    c.polynomial.clear();
    c.form = "swallowtail";
    CHECK_THROWS_AS((void)build_function(c), ConfigError);
}

TEST_CASE("write_atomic leaves no temporary files") {
    const fs::path dir = scratch("atomic");
    write_atomic(dir / "sub" / "a.txt", "first");
    write_atomic(dir / "sub" / "a.txt", "second");
    CHECK(slurp(dir / "sub" / "a.txt") == "second");
    int entries = 0;
    for (const auto& e : fs::directory_iterator(dir / "sub")) {
        ++entries;
        CHECK(e.path().filename() == "a.txt");
    }
    CHECK(entries == 1);
    fs::remove_all(dir);
}

TEST_CASE("run: usage and config errors exit 2") {
    CHECK(invoke({}).code == kConfigError);
    CHECK(invoke({"nonsense"}).code == kConfigError);
    CHECK(invoke({"caustic", "--workers", "-3"}).code == kConfigError);
    const fs::path dir = scratch("errors");
    const auto r = invoke({"caustic", "--config", write_config(dir, "[base]\nunknown_key = 1\n").string(),
                           "--out", dir.string()});
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("unknown_key") != std::string::npos);
    const auto missing = invoke({"caustic", "--config", (dir / "absent.ini").string(), "--out", dir.string()});
    CHECK(missing.code == kConfigError);
    const auto poly = invoke({"caustic", "--config",
                              write_config(dir, "[function]\npolynomial = y1^2 +\n").string(), "--out",
                              dir.string()});
    CHECK(poly.code == kConfigError);
    CHECK(invoke({"validate", "--out", dir.string()}).code == kConfigError);
    CHECK(invoke({"--version"}).code == kOk);
    fs::remove_all(dir);
}

TEST_CASE("run caustic writes documents and a manifest") {
    const fs::path dir = scratch("caustic");
    const auto r = invoke({"caustic", "--out", dir.string()});
    CHECK(r.code == kOk);
    CHECK(r.out.find("3 cusps") != std::string::npos);
    for (const char* name : {"caustic.json", "caustic.svg", "manifest.json"}) CHECK(fs::exists(dir / name));
    const Json m = Json::parse(slurp(dir / "manifest.json"));
    CHECK(m["command"] == "caustic");
    CHECK(m["exit_code"] == 0);
    CHECK(m["config"]["base"]["half_width1"] == 1.25);
    CHECK(m["config"]["fiber"]["resolution1"] == 128);
    CHECK(m["outputs"].size() == 2);
    CHECK(slurp(dir / "caustic.svg").find("<svg") != std::string::npos);

    // a base window away from the caustic keeps nothing
    const fs::path far = scratch("caustic_far");
    const auto e = invoke({"caustic", "--config",
                           write_config(far, "[base]\ncenter1 = 5\ncenter2 = 5\nhalf_width = 0.5\n").string(),
                           "--out", far.string()});
    CHECK(e.code == kOk);
    const Json doc = Json::parse(slurp(far / "caustic.json"));
    CHECK(doc["caustic"]["components"].empty());
    CHECK(doc["caustic"]["cusps"].empty());
    fs::remove_all(dir);
    fs::remove_all(far);
}

TEST_CASE("run portrait: census and on-caustic exit 3") {
    const fs::path dir = scratch("portrait");
    const auto r = invoke({"portrait", "--out", dir.string()});
    CHECK(r.code == kOk);
    const Json doc = Json::parse(slurp(dir / "portrait.json"));
    CHECK(doc["portrait"]["critical_points"].size() == 4);
    CHECK(slurp(dir / "trajectories.csv").rfind("saddle,branch,limit,index,y1,y2,fx\n", 0) == 0);

    const auto on = invoke({"portrait", "--config", write_config(dir, "[portrait]\nx1 = 0\nx2 = 0\n").string(),
                            "--out", dir.string()});
    CHECK(on.code == kOnCaustic);
    CHECK(on.out.find("on-caustic") != std::string::npos);
    CHECK(Json::parse(slurp(dir / "manifest.json"))["exit_code"] == kOnCaustic);
    fs::remove_all(dir);
}

TEST_CASE("run slices") {
    const fs::path dir = scratch("slices");
    const auto r = invoke({"slices", "--config",
                           write_config(dir, "[base]\ncenter1 = 0\nhalf_width = 2\n[slices]\nt = -1, 0, 1\n")
                               .string(),
                           "--out", dir.string()});
    CHECK(r.code == kOk);
    const Json doc = Json::parse(slurp(dir / "slices.json"));
    REQUIRE(doc["slices"].size() == 3);
    CHECK(doc["slices"][0]["cusp_count"] == 3);
    CHECK(doc["slices"][1]["cusp_count"] == 0);
    CHECK(doc["slices"][1]["caustic"]["degenerate_points"].size() == 1);
    CHECK(doc["slices"][2]["cusp_count"] == 3);
    fs::remove_all(dir);
}

TEST_CASE("run diagram then validate; tampering exits 4") {
    const fs::path dir = scratch("diagram");
    const fs::path cfg = write_config(dir, "[base]\nresolution = 20\n");
    const auto r = invoke({"diagram", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == kOk);
    CHECK(r.out.find("all checks passed") != std::string::npos);
    for (const char* name : {"diagram.json", "diagram.svg", "report.txt", "manifest.json"})
        CHECK(fs::exists(dir / name));
    const std::string manifest = slurp(dir / "manifest.json");

    const auto v = invoke({"validate", "--out", dir.string()});
    CHECK(v.code == kOk);
    CHECK(fs::exists(dir / "validate-report.txt"));
    CHECK(slurp(dir / "manifest.json") == manifest);

    Json doc = Json::parse(slurp(dir / "diagram.json"));
    Json& strata = doc["diagram"]["strata"];
    REQUIRE(strata.size() >= 2);
    strata[1]["pair"] = Json::array({strata[0]["pair"][1], strata[0]["pair"][0]});
    strata[1]["points"].push_back(strata[0]["points"][strata[0]["points"].size() / 2]);
    strata[1]["psi"].push_back(0.0);
    const fs::path tampered = dir / "tampered.json";
    std::ofstream(tampered) << doc.dump(2);
    const auto t = invoke({"validate", "--input", tampered.string(), "--out", dir.string()});
    CHECK(t.code == kValidationFailure);
    CHECK(t.out.find("FAIL exclusion") != std::string::npos);

    std::ofstream(dir / "broken.json") << "{\"diagram\": {";
    CHECK(invoke({"validate", "--input", (dir / "broken.json").string(), "--out", dir.string()}).code ==
          kConfigError);
    fs::remove_all(dir);
}

TEST_CASE("run diagram on a very coarse grid reports unresolved boundaries") {
    const fs::path dir = scratch("coarse");
    const auto r = invoke({"diagram", "--config", write_config(dir, "[base]\nresolution = 8\n").string(), "--out",
                           dir.string()});
    CHECK(r.code == kOk);
    CHECK(slurp(dir / "report.txt").find("note:") != std::string::npos);
    fs::remove_all(dir);
}
