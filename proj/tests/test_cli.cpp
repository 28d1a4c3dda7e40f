#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "supou/cli.hpp"

using namespace supou;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / ("supou_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("Help and usage errors") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"--help"}).out.find("mixing.alpha") != std::string::npos);
    CHECK(run({}).code == kExitConfig);
    CHECK(run({"bogus"}).code == kExitConfig);
    CHECK(run({"cumulants", "--format", "xml"}).code == kExitConfig);
}

TEST_CASE("print-config") {
    const auto r = run({"print-config", "--seed", "11"});
    CHECK(r.code == 0);
    CHECK(r.out.find("seed = 11") != std::string::npos);
    const auto j = nlohmann::json::parse(run({"print-config", "--format", "json"}).out);
    CHECK(j["sim"]["horizon"] == 50.0);
}

TEST_CASE("Configuration errors exit with code 2") {
    const auto d = temp_dir("cfg");
    CHECK(run({"cumulants", "--config", write_file(d, "a.cfg", "marginal.kind = student\n").string()}).code ==
          kExitConfig);
    CHECK(run({"cumulants", "--config", write_file(d, "b.cfg", "oops = 1\n").string()}).code == kExitConfig);
    const auto narrow = run({"scaling", "--config",
                             write_file(d, "c.cfg", "window.t_min = 1000\nwindow.t_max = 1001\n").string()});
    CHECK(narrow.code == kExitConfig);
    CHECK(narrow.err.find("configuration error") != std::string::npos);
    CHECK(run({"cumulants", "--threads", "0"}).code == kExitConfig);
    fs::remove_all(d);
}

TEST_CASE("correlation output") {
    const auto d = temp_dir("corr");
    const auto cfg = write_file(d, "c.cfg", "correlation.count = 3\ncorrelation.tau_min = 1\ncorrelation.tau_max = 100\n");
    const auto r = run({"correlation", "--config", cfg.string()});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "tau,r,closed_form");
    std::getline(in, line);
    CHECK(line == "0.0000000000000000e+00,1.0000000000000000e+00,1.0000000000000000e+00");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
    fs::remove_all(d);
}

TEST_CASE("cumulants with cross-form report") {
    const auto d = temp_dir("cum");
    const auto cfg = write_file(d, "c.cfg",
                                "orders = [1, 2]\ngrid.t_min = 1\ngrid.t_max = 100\ngrid.count = 3\ncross_form = true\n"
                                "marginal.kind = gamma\nmarginal.centered = false\n");
    const auto r = run({"cumulants", "--config", cfg.string(), "--out", (d / "o").string()});
    REQUIRE(r.code == 0);
    const auto text = slurp(d / "o" / "cumulants.csv");
    CHECK(text.rfind("kind,m,t,factor,cumulant,method\n", 0) == 0);
    CHECK(text.find("integrated,1,1.0000000000000000e+00,1.0000000000000000e+00,1.0000000000000000e+00,analytic") !=
          std::string::npos);
    CHECK(text.find("# cross_form max_relative=") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("scaling writes fits, plots and a verdict") {
    const auto d = temp_dir("scal");
    const auto cfg = write_file(d, "c.cfg", "orders = [3, 4]\nmixing.alpha = 0.4\n");
    const auto r = run({"scaling", "--config", cfg.string(), "--out", (d / "o").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("verdict: intermittent") != std::string::npos);
    CHECK(fs::exists(d / "o" / "tau.csv"));
    CHECK(fs::exists(d / "o" / "sigma.csv"));
    CHECK(fs::exists(d / "o" / "plots"));
    const auto j = nlohmann::json::parse(run({"scaling", "--config", cfg.string(), "--format", "json"}).out);
    CHECK(j["verdict"] == "intermittent");
    CHECK(j["tau"].size() == 2);
    fs::remove_all(d);
}

TEST_CASE("scaling skips orders with a vanishing cumulant") {
    const auto d = temp_dir("gauss");
    const auto cfg = write_file(d, "c.cfg", "marginal.kind = gaussian\norders = [2, 3]\nexponents = [2, 4]\n");
    const auto r = run({"scaling", "--config", cfg.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("m=3: marginal cumulant is identically zero") != std::string::npos);
    CHECK(r.out.find("verdict: not-intermittent") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("simulate is reproducible and independent of the worker count") {
    const auto d = temp_dir("sim");
    const auto cfg = write_file(d, "c.cfg",
                                "mixing.kind = degenerate\nmarginal.kind = gamma\nsim.replicas = 200\n"
                                "sim.horizon = 10\nsim.times = [5, 10]\n");
    const auto a = run({"simulate", "--config", cfg.string(), "--threads", "1"});
    const auto b = run({"simulate", "--config", cfg.string(), "--threads", "3"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("kind,m,t,empirical,stderr,analytic,method\n", 0) == 0);
    CHECK(a.out.find("# autocorrelation lag=") != std::string::npos);
    CHECK(run({"simulate", "--config", cfg.string(), "--seed", "5"}).out != a.out);

    const auto o = d / "o";
    REQUIRE(run({"simulate", "--config", cfg.string(), "--out", o.string()}).code == 0);
    CHECK(fs::exists(o / "simulate.csv"));
    CHECK(fs::exists(o / "path_summary.csv"));
    const auto seeds = slurp(o / "seeds.csv");
    CHECK(seeds.rfind("# base_seed=20240101\nreplica,seed\n", 0) == 0);
    CHECK_FALSE(fs::exists(o / "raw_paths.csv"));
    fs::remove_all(d);
}

TEST_CASE("simulate refuses continuous mixing") {
    CHECK(run({"simulate"}).code == kExitConfig);
}
