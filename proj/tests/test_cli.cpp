#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "critwave/errors.hpp"
#include "doctest.h"

using namespace critwave;
using namespace critwave::cli;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("critwave_test_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("minimal document gets defaults") {
    const auto cfg = parse_config("command=simulate d=2 r=1 t_end=200");
    CHECK(cfg.command == Command::simulate);
    CHECK(cfg.params == CompetitionParams::critical(2.0, 1.0));
    CHECK(cfg.solver.t_end == 200.0);
    CHECK(cfg.solver.dt == SolverConfig{}.dt);
    CHECK(cfg.init == InitialData{});
    CHECK(!cfg.super);
}

TEST_CASE("errors name the offending key") {
    CHECK(error_of("command=simulate d=0").find("d") != std::string::npos);
    const auto theta = error_of("command=verify-sub theta=0.6");
    CHECK(theta.find("theta must be < 1/2") != std::string::npos);
    CHECK(error_of("bogus=1").find("bogus") != std::string::npos);
    CHECK(error_of("d=two").find("d") != std::string::npos);
    CHECK(error_of("d=1\nd=2").find("d") != std::string::npos);
    CHECK(error_of("d=1 r=1 dt=0.5").find("dt") != std::string::npos);
    CHECK(error_of("command=sweep sweep_key=d sweep_values=1,1").find("sweep_values") != std::string::npos);
    CHECK_FALSE(error_of("command=verify-sub theta=0.6 allow_invalid_bounds=true").size() > 0);
}

TEST_CASE("comments, shared lines and overrides") {
    const auto cfg = parse_config("# header\nd = 2   r=0.5  # trailing\n\nt_end=50", {"r=1", "out=x"});
    CHECK(cfg.params.d == 2.0);
    CHECK(cfg.params.r == 1.0);
    CHECK(cfg.solver.t_end == 50.0);
    CHECK(cfg.out == "x");
}

TEST_CASE("serialize round trips") {
    for (const char* doc : {"command=verify-super d=2 r=1 c1=2.2 q=0.05",
                            "command=verify-sub d=0.5 r=4 theta=0.25 ordering=true",
                            "command=bump u0=exp_tail u0_B=0.5 u0_q=2 v0=zero d=3 r=0.1",
                            "command=phase-search c_values=-1,0.25 alpha=0.5 beta=0.1 seed=7",
                            "command=sweep sweep_command=bump sweep_key=d sweep_values=0.5,2"}) {
        CAPTURE(doc);
        const auto cfg = parse_config(doc);
        CHECK(parse_config(serialize(cfg)) == cfg);
    }
}

TEST_CASE("number formatting round trips exactly") {
    for (double x : {0.1, 1.0 / 3.0, 2.0, -1e-300, 6.02214076e23}) {
        CHECK(std::stod(format_number(x)) == x);
    }
    CHECK(format_number(0.05) == "0.05");
    CHECK(csv({"t", "x"}, {{1.0, 0.5}, {2.0, -0.25}}) == "t,x\n1,0.5\n2,-0.25\n");
}

TEST_CASE("sweep output is identical for serial and parallel runs") {
    const std::string doc =
        "command=sweep sweep_command=simulate sweep_key=d sweep_values=0.5,1.5,2 r=1 t_end=10 dx=0.2";
    std::vector<std::string> trees;
    for (std::size_t jobs : {1u, 3u}) {
        const auto dir = scratch("sweep" + std::to_string(jobs));
        auto cfg = parse_config(doc, {"out=" + dir.string(), "jobs=" + std::to_string(jobs)});
        std::ostringstream log;
        REQUIRE(run_command(cfg, log) == exit_ok);
        std::string tree;
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
            if (e.is_regular_file()) tree += fs::relative(e.path(), dir).generic_string() + "\n" + slurp(e.path());
        }
        trees.push_back(tree);
        fs::remove_all(dir);
    }
    // directory iteration order is unspecified
    CHECK(trees[0].size() == trees[1].size());
    auto sorted = [](std::string s) {
        std::sort(s.begin(), s.end());
        return s;
    };
    CHECK(sorted(trees[0]) == sorted(trees[1]));
}

TEST_CASE("broken tau is reported with exit code 2") {
    const auto p = CompetitionParams::critical(1.0, 2.0);
    const auto s = pick_super_params(p);
    const auto T = find_onset(BoundEnvelope::super(p, s));
    REQUIRE(T);
    const auto dir = scratch("broken");
    const auto cfg = parse_config("command=verify-super d=1 r=2 allow_invalid_bounds=true",
                                  {"tau=" + format_number(10.0 * tau_limit(p, s)), "onset=" + format_number(*T),
                                   "out=" + dir.string()});
    CHECK_THROWS_AS(parse_config(serialize(cfg), {"allow_invalid_bounds=false"}), ValidationError);
    std::ostringstream log;
    CHECK(run_command(cfg, log) == exit_check_failed);
    const auto violations = slurp(dir / "violations.csv");
    CHECK(violations.find("N1,") != std::string::npos);
    CHECK(slurp(dir / "summary.json").find("\"status\": \"fail\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("wave-profile writes profile and passes") {
    const auto dir = scratch("wave");
    std::ostringstream log;
    CHECK(run_command(parse_config("command=wave-profile d=2 r=2", {"out=" + dir.string()}), log) == exit_ok);
    CHECK(fs::exists(dir / "profile.csv"));
    CHECK(log.str().empty());
    fs::remove_all(dir);

    std::ostringstream warned;
    run_command(parse_config("command=wave-profile d=2 r=0.5", {"out=" + dir.string()}), warned);
    CHECK(warned.str().find("warning") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("runs that would store too many fields are refused up front") {
    const auto dir = scratch("memory");
    const auto cfg = parse_config("command=simulate d=1 r=4 t_end=1000 dt=0.01 snapshot_stride=1",
                                  {"out=" + dir.string()});
    std::ostringstream log;
    try {
        run_command(cfg, log);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("field_stride") != std::string::npos);
    }
    fs::remove_all(dir);
}
