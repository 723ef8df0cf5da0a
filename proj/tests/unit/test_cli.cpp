#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nphoton/cli.hpp"
#include "nphoton/config.hpp"
#include "nphoton/error.hpp"
#include "nphoton/validate.hpp"

using namespace nphoton;
namespace fs = std::filesystem;

namespace {

const char* kFig1d = R"cfg(# test config
[model]
name = "jc"
gamma_a = 0.1
gamma_s = 0.01
P_s = 0.01
n_max = 3

[sensors]
omega = ["scan", "R"]   # first sensor scanned
gamma = "gamma2"

[scan]
mode = "gn_zero"
grid = "linspace(-1, 1, 5)"

[output]
basename = "fig1d"
)cfg";

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path dir = fs::temp_directory_path() / "nphoton_cli_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("config parsing") {
    const Config cfg = parse_config(kFig1d);
    const auto& req = cfg.request;
    const JCParams p = std::get<JCParams>(req.model);
    CHECK(p.n_max == 3);
    CHECK(req.mode == ScanMode::GnZero);
    CHECK(req.sensors.size() == 2);
    CHECK(req.scanned_sensor == 0);
    CHECK(req.sensors[1].omega == resolve_token("R", p));
    CHECK(req.sensors[0].gamma == doctest::Approx(0.21));
    CHECK(req.grid == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
    CHECK(cfg.basename == "fig1d");
    CHECK(cfg.directory == ".");
}

TEST_CASE("config grids and numbers") {
    const ModelSpec jc = JCParams{};
    CHECK(parse_grid("[1, 2.5, -R]", jc) == std::vector<double>{1.0, 2.5, -jc_rabi(JCParams{})});
    const auto lg = parse_grid("logspace(-2, 1, 4)", jc);
    CHECK(lg.size() == 4);
    CHECK(lg.front() == doctest::Approx(0.01));
    CHECK(lg.back() == 10.0);
    CHECK(parse_grid("0.5", jc) == std::vector<double>{0.5});
    CHECK(parse_number("0.5/gamma2", jc) == doctest::Approx(0.5 / 0.21));
    CHECK(parse_number("2*R", jc) == doctest::Approx(2 * jc_rabi(JCParams{})));
    CHECK(parse_number("1e-3", jc) == 1e-3);
    CHECK_THROWS_AS(parse_number("R", ThermalParams{}), InvalidArgument);
    CHECK_THROWS_AS(parse_grid("linspace(0, 1)", jc), InvalidArgument);
    CHECK_THROWS_AS(parse_grid("[]", jc), InvalidArgument);
}

TEST_CASE("config errors name the field") {
    CHECK_THROWS_WITH_AS(parse_config(replace(kFig1d, "gamma = \"gamma2\"\n", "")),
                         doctest::Contains("[sensors] gamma"), InvalidArgument);
    CHECK_THROWS_WITH_AS(parse_config(replace(kFig1d, "gamma_a = 0.1\n", "")), doctest::Contains("[model] gamma_a"),
                         InvalidArgument);
    CHECK_THROWS_WITH_AS(parse_config(replace(kFig1d, "n_max = 3", "n_max = 3\ncolour = 2")),
                         doctest::Contains("unknown field [model] colour"), InvalidArgument);
    CHECK_THROWS_WITH_AS(parse_config(replace(kFig1d, "\"R\"]", "\"R7q\"]")), doctest::Contains("[sensors] omega"),
                         InvalidArgument);
    CHECK_THROWS_WITH_AS(parse_config(replace(kFig1d, "name = \"jc\"", "name = \"qed\"")),
                         doctest::Contains("unknown model"), InvalidArgument);
}

TEST_CASE("default truncation follows the photon number") {
    std::string text = replace(kFig1d, "n_max = 3\n", "");
    CHECK(std::get<JCParams>(parse_config(text).request.model).n_max == 4);
    text = replace(text, "omega = [\"scan\", \"R\"]", "omega = [\"scan\", \"R\", \"R2-\"]");
    CHECK(std::get<JCParams>(parse_config(text).request.model).n_max == 5);
}

TEST_CASE("gn command writes csv and meta") {
    const fs::path cfg = write_config("fig1d.toml", kFig1d);
    const fs::path out = fs::temp_directory_path() / "nphoton_cli_out";
    fs::remove_all(out);
    const Run r = cli({"gn", "--config", cfg.string(), "--out", out.string(), "--workers", "2"});
    CHECK(r.code == kExitOk);
    std::ifstream csv(out / "fig1d.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "omega1,g2,flag");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == 5);
    CHECK(fs::exists(out / "fig1d.meta.json"));

    SUBCASE("resume of a finished run") {
        const Run again = cli({"gn", "--config", cfg.string(), "--out", out.string(), "--resume"});
        CHECK(again.code == kExitOk);
    }
    SUBCASE("mode mismatch") {
        const Run bad = cli({"gtau", "--config", cfg.string(), "--out", out.string()});
        CHECK(bad.code == kExitInvalid);
        CHECK(bad.err.find("[scan] mode") != std::string::npos);
    }
    fs::remove_all(out);
}

TEST_CASE("exit codes") {
    SUBCASE("missing linewidth is a validation error naming the field") {
        const fs::path cfg = write_config("nogamma.toml", replace(kFig1d, "gamma = \"gamma2\"\n", ""));
        const Run r = cli({"gn", "--config", cfg.string()});
        CHECK(r.code == kExitInvalid);
        CHECK(r.err.find("gamma") != std::string::npos);
    }
    SUBCASE("unknown flag") {
        CHECK(cli({"gn", "--bogus"}).code == kExitInvalid);
        CHECK(cli({}).code == kExitInvalid);
    }
    SUBCASE("every point failing is a computation error") {
        const fs::path cfg = write_config("loud.toml", replace(kFig1d, "gamma = \"gamma2\"", "gamma = \"gamma2\"\nepsilon = 5"));
        const fs::path out = fs::temp_directory_path() / "nphoton_cli_loud";
        const Run r = cli({"gn", "--config", cfg.string(), "--out", out.string()});
        CHECK(r.code == kExitComputation);
        CHECK(r.err.find("omega1") != std::string::npos);
        fs::remove_all(out);
    }
    SUBCASE("bad worker environment") {
        const fs::path cfg = write_config("fig1d.toml", kFig1d);
        ::setenv("NPHOTON_WORKERS", "zero", 1);
        const Run r = cli({"gn", "--config", cfg.string(), "--out", (fs::temp_directory_path() / "nphoton_env").string()});
        ::unsetenv("NPHOTON_WORKERS");
        CHECK(r.code == kExitInvalid);
    }
}

TEST_CASE("ladder command") {
    const Run r = cli({"ladder", "--model", "jc", "--gamma-a", "0.1", "--gamma-s", "0.01", "--rungs", "3"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("10 transitions") != std::string::npos);
    for (const char* label : {"R ", "-R ", "R2+", "-R2+", "R2-", "-R2-", "R3+", "-R3+", "R3-", "-R3-"})
        CHECK_MESSAGE(r.out.find(std::string("\n") + label) != std::string::npos, label);
    CHECK(cli({"ladder", "--model", "thermal"}).code == kExitInvalid);
    CHECK(cli({"ladder", "--gamma-a", "6", "--gamma-s", "0"}).code == kExitComputation);
}

TEST_CASE("validate command and mutation check") {
    const Run quick = cli({"validate", "--level", "quick"});
    CHECK(quick.code == kExitOk);
    CHECK(quick.out.find("PASS") != std::string::npos);

    const auto full = run_validation(ValidationLevel::Full);
    CHECK(full.passed());
    CHECK(full.checks.size() == 8);

    ValidationHooks broken;
    broken.oracle_first_filter = [](const FilterSpec& f) { return FilterSpec{-f.omega, f.gamma}; };
    const auto mutated = run_validation(ValidationLevel::Full, broken);
    CHECK(!mutated.passed());
    double worst = 0.0;
    for (const auto& c : mutated.checks) worst = std::max(worst, c.error / c.tolerance);
    CHECK(worst > 100.0);
    CHECK(cli({"validate", "--level", "medium"}).code == kExitInvalid);
}

TEST_CASE("shipped configs load") {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(NPHOTON_CONFIG_DIR)) {
        if (entry.path().extension() != ".toml") continue;
        CHECK_NOTHROW_MESSAGE(load_config(entry.path().string()), entry.path().string());
        ++count;
    }
    CHECK(count >= 5);
}
