#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pharmonic/run_config.hpp"
#include "test_support.hpp"

using namespace pharmonic;
namespace fs = std::filesystem;

#ifndef PHARMONIC_CLI_PATH
#define PHARMONIC_CLI_PATH "pharmonic"
#endif

namespace {

RunConfig nontrivial_config() {
    RunConfig config;
    config.model = {2, 2.7, 4.25, 0.375, 1.5};
    config.solver.s_max = 12345.5;
    config.solver.rel_tol = 3e-10;
    config.solver.abs_tol = 7.5e-13;
    config.solver.s_start = 2e-9;
    config.solver.max_steps = 123456;
    config.solver.store_stride = 3;
    config.solver.max_step_fraction = 0.015625;
    config.solver.allow_inadmissible = true;
    config.domain_warp = WarpKind::family;
    config.target_warp = WarpKind::euclidean;
    config.profile = ProfileKind::poly;
    config.profile_coeffs = {0.0, 1.0, 0.125, 0.0625};
    config.scan_lo = 0.5;
    config.scan_hi = 9999.0;
    config.samples_per_decade = 48;
    config.window_lo = 100.0;
    config.window_hi = 10000.0;
    config.c1_override = 1.25;
    config.out_dir = "scratch/out";
    config.format = OutputFormat::json;
    config.quiet = true;
    return config;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct TempDir {
    fs::path path;
    TempDir(const char* tag) {
        path = fs::temp_directory_path() / (std::string("pharmonic_test_") + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
    const std::string command = std::string(PHARMONIC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config round-trips through the text format") {
    const RunConfig config = nontrivial_config();
    const RunConfig back = parse_config_text(render_config_text(config));
    CHECK(back == config);

    const RunConfig defaults;
    CHECK(parse_config_text(render_config_text(defaults)) == defaults);
}

TEST_CASE("config round-trips through JSON") {
    const RunConfig config = nontrivial_config();
    CHECK(parse_config_json(render_config_json(config)) == config);
}

TEST_CASE("config text parser reports bad keys and malformed lines") {
    CHECK_THROWS_AS(parse_config_text("[model]\nbogus = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[model\nn = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[model]\nn 2\n"), std::invalid_argument);
}

TEST_CASE("diagnostics CSV: stable schema, finite full-precision values") {
    const ProfileSolution& sol = testsupport::flat_run();
    const ConvexProfile h = testsupport::certified(ConvexProfile::linear());
    const std::string csv = render_diagnostics_csv(sol, h);

    std::stringstream lines(csv);
    std::string header;
    REQUIRE(std::getline(lines, header));
    CHECK(header == std::string(kDiagnosticsHeader));

    std::size_t rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        ++rows;
        std::stringstream cells(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(cells, cell, ',')) {
            ++count;
            const double value = std::stod(cell);
            CHECK(std::isfinite(value));
        }
        CHECK(count == 13);
    }
    CHECK(rows == sol.size());

    // determinism: rendering twice is byte-identical
    CHECK(render_diagnostics_csv(sol, h) == csv);

    // full precision: f column reproduces the stored doubles exactly
    std::stringstream again(csv);
    std::getline(again, line);
    std::getline(again, line);
    const auto comma = line.find(',');
    const double s0 = std::stod(line.substr(0, comma));
    CHECK(s0 == sol.s()[0]);
}

TEST_CASE("solution JSON round-trips and re-evaluates") {
    const ProfileSolution& sol = testsupport::canonical_run_1e4();
    const std::string dump = render_solution_json(sol, WarpKind::family, WarpKind::family);
    const ProfileSolution loaded = load_solution_json(dump);
    CHECK(loaded.size() == sol.size());
    CHECK(loaded.params() == sol.params());
    CHECK(loaded.s() == sol.s());
    CHECK(loaded.f() == sol.f());
    CHECK(loaded.f1() == sol.f1());
    CHECK(loaded.f2() == sol.f2());
    CHECK(loaded.status == sol.status);
    // the reloaded solution evaluates identically (warps rebuilt from kinds)
    const PointState a = sol.evaluate(17.3);
    const PointState b = loaded.evaluate(17.3);
    CHECK(a.f == b.f);
    CHECK(a.f1 == b.f1);
    CHECK(a.f2 == b.f2);
}

TEST_CASE("cli: validate exit codes") {
    TempDir dir("validate");
    CHECK(run_cli("validate") == 0);

    RunConfig bad;
    bad.model.p = 2.0;
    const fs::path config_path = dir.path / "bad.cfg";
    std::ofstream(config_path) << render_config_text(bad);
    CHECK(run_cli("--config " + config_path.string() + " validate") == 2);

    bad.model = {2, 2.5, 3.0, 1.5, 1.0};  // sigma out of range
    std::ofstream(config_path, std::ios::trunc) << render_config_text(bad);
    CHECK(run_cli("--config " + config_path.string() + " validate") == 2);

    CHECK(run_cli("--config " + (dir.path / "missing.cfg").string() + " validate") != 0);
}

TEST_CASE("cli: solve produces deterministic outputs; flat config tracks the identity") {
    TempDir dir("solve");
    RunConfig config;
    config.domain_warp = WarpKind::euclidean;
    config.target_warp = WarpKind::euclidean;
    config.solver.s_start = 1e-6;
    config.solver.s_max = 100.0;
    config.scan_hi = 100.0;
    config.quiet = true;
    const fs::path config_path = dir.path / "flat.cfg";
    std::ofstream(config_path) << render_config_text(config);

    const std::string out1 = (dir.path / "run1").string();
    const std::string out2 = (dir.path / "run2").string();
    REQUIRE(run_cli("--config " + config_path.string() + " --out " + out1 + " solve") == 0);
    REQUIRE(run_cli("--config " + config_path.string() + " --out " + out2 + " solve") == 0);

    const std::string csv1 = read_file(out1 + "/diagnostics.csv");
    CHECK(csv1 == read_file(out2 + "/diagnostics.csv"));
    CHECK(read_file(out1 + "/solution.json") == read_file(out2 + "/solution.json"));

    // f column equals s column within 1e-9
    std::stringstream lines(csv1);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        std::stringstream cells(line);
        std::string s_cell, f_cell;
        std::getline(cells, s_cell, ',');
        std::getline(cells, f_cell, ',');
        CHECK(std::abs(std::stod(f_cell) - std::stod(s_cell)) <= 1e-9);
    }
}

TEST_CASE("cli: asymptotics and certify on a solution file") {
    TempDir dir("analyze");
    RunConfig config;
    config.solver.s_max = 1e5;  // P plateau needs the longer run
    config.scan_hi = 1e4;
    config.quiet = true;
    const fs::path config_path = dir.path / "run.cfg";
    std::ofstream(config_path) << render_config_text(config);

    const std::string out = (dir.path / "out").string();
    REQUIRE(run_cli("--config " + config_path.string() + " --out " + out + " solve") == 0);
    REQUIRE(run_cli("--config " + config_path.string() + " --out " + out +
                    " asymptotics --solution " + out + "/solution.json") == 0);
    REQUIRE(run_cli("--config " + config_path.string() + " --out " + out +
                    " certify --solution " + out + "/solution.json --analyze-terms") == 0);

    const nlohmann::json asym = nlohmann::json::parse(read_file(out + "/asymptotics.json"));
    CHECK(asym.at("exponent_theory").get<double>() == doctest::Approx(-4.5));
    CHECK(std::abs(asym.at("exponent_fitted").get<double>() + 4.5) <= 0.45);
    CHECK(asym.at("P").at("converged").get<bool>());

    const nlohmann::json cert = nlohmann::json::parse(read_file(out + "/certificate.json"));
    CHECK(cert.at("certified_count").get<std::size_t>() > 0);
    CHECK(cert.at("first_certified").get<double>() ==
          doctest::Approx(std::pow(10.0, 25.0 / 64.0)).epsilon(1e-12));
    CHECK(fs::exists(out + "/certified_points.csv"));
    CHECK(fs::exists(out + "/terms.json"));
}

TEST_CASE("cli: sweep writes one row per grid point in deterministic order") {
    TempDir dir("sweep");
    RunConfig config;
    config.solver.s_max = 2e3;  // keep the sweep fast
    config.scan_hi = 2e3;
    config.quiet = true;
    const fs::path config_path = dir.path / "sweep.cfg";
    std::ofstream(config_path) << render_config_text(config);

    const std::string out = (dir.path / "out").string();
    REQUIRE(run_cli("--config " + config_path.string() + " --out " + out +
                    " sweep --vary p=2.4:3.5:3 --workers 2") == 0);

    const std::string csv = read_file(out + "/sweep.csv");
    std::stringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "n,p,delta,sigma,alpha,feasible,status,c_hat,first_certified,fitted_exponent");
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(lines, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].find("2,2.3999999999999999,") == 0);  // p=2.4 run, feasible
    CHECK(rows[0].find(",1,success,") != std::string::npos);
    CHECK(rows[2].find(",0,infeasible,") != std::string::npos);  // p=3.5 rejected

    // determinism across reruns
    const std::string out2 = (dir.path / "out2").string();
    REQUIRE(run_cli("--config " + config_path.string() + " --out " + out2 +
                    " sweep --vary p=2.4:3.5:3 --workers 3") == 0);
    CHECK(read_file(out2 + "/sweep.csv") == csv);
}

TEST_CASE("cli: plot-data emits two-column streams") {
    TempDir dir("plot");
    RunConfig config;
    config.domain_warp = WarpKind::euclidean;
    config.target_warp = WarpKind::euclidean;
    config.solver.s_start = 1e-6;
    config.solver.s_max = 50.0;
    config.quiet = true;
    const fs::path config_path = dir.path / "plot.cfg";
    std::ofstream(config_path) << render_config_text(config);
    const std::string out = (dir.path / "out").string();
    REQUIRE(run_cli("--config " + config_path.string() + " --out " + out + " solve") == 0);

    const std::string command = std::string(PHARMONIC_CLI_PATH) + " --config " +
                                config_path.string() + " plot-data --solution " + out +
                                "/solution.json --columns f,Q > " + (dir.path / "plot.dat").string();
    REQUIRE(std::system(command.c_str()) == 0);
    const std::string data = read_file(dir.path / "plot.dat");
    CHECK(data.find("# s f") != std::string::npos);
    CHECK(data.find("# s Q") != std::string::npos);

    // unknown column rejected
    CHECK(run_cli("plot-data --solution " + out + "/solution.json --columns nope") == 2);
}
