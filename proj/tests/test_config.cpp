#include <catch_amalgamated.hpp>

#include <sstream>

#include "supou/config.hpp"
#include "supou/errors.hpp"

using namespace supou;

TEST_CASE("Both configuration syntaxes give the same flat view") {
    const auto a = parse_config_text(R"({"mixing": {"kind": "gamma", "alpha": 0.4}, "orders": [2, 4]})");
    const auto b = parse_config_text("# comment\nmixing.kind = gamma\nmixing.alpha = 0.4  # tail\norders = [2, 4]\n");
    CHECK(a == b);
    CHECK(a.at("mixing.alpha").get<double>() == 0.4);
}

TEST_CASE("Malformed text") {
    CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("orders"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("seed = 1\nseed = 2"), ConfigError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/supou.cfg"), ConfigError);
}

TEST_CASE("Effective configuration") {
    const auto eff = effective_config({});
    CHECK(eff.count("mixing.alpha") == 1);
    CHECK(eff.count("mixing.rate") == 0);  // belongs to another kind
    CHECK(eff.count("marginal.delta") == 1);
    CHECK(eff.count("marginal.shape") == 0);
    CHECK(eff.at("seed").get<long long>() == 20240101);
    CHECK_THROWS_AS(effective_config({{"no.such.key", 1}}), ConfigError);
    // parameters of another kind are rejected
    CHECK_THROWS_AS(effective_config({{"mixing.kind", "degenerate"}, {"mixing.alpha", 0.5}}), ConfigError);
    CHECK_NOTHROW(effective_config({{"mixing.kind", "degenerate"}, {"mixing.rate", 0.5}}));
}

TEST_CASE("Student t marginal is refused with a reason") {
    try {
        effective_config({{"marginal.kind", "student"}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("analytic") != std::string::npos);
    }
}

TEST_CASE("RunConfig construction") {
    const auto rc = build_run_config(effective_config(
        parse_config_text("mixing.kind = discrete\nmixing.rates = [1, 0.5]\nmixing.weights = [0.75, 0.25]\n"
                          "marginal.kind = gamma\nmarginal.shape = 2\naggregate.kind = partial_sum\nthreads = 3")));
    CHECK(rc.mixing.kind() == "discrete");
    CHECK(rc.marginal.kind() == "gamma");
    CHECK(rc.marginal.centered());
    CHECK(rc.kind == AggregateKind::PartialSum);
    CHECK(rc.grid.size() == 25);
    CHECK(rc.taus.front() == 0.0);
    CHECK(rc.taus.size() == 51);
    CHECK(rc.sim.threads == 3);
    CHECK(rc.sim.replicas == 10000);
}

TEST_CASE("Invalid values are configuration errors") {
    auto bad = [](const char* text) { return build_run_config(effective_config(parse_config_text(text))); };
    CHECK_THROWS_AS(bad("mixing.alpha = -1"), ConfigError);
    CHECK_THROWS_AS(bad("mixing.kind = weird"), ConfigError);
    CHECK_THROWS_AS(bad("marginal.kind = nig\nmarginal.beta = 3"), ConfigError);
    CHECK_THROWS_AS(bad("orders = [0]"), ConfigError);
    CHECK_THROWS_AS(bad("orders = [41]"), ConfigError);
    CHECK_THROWS_AS(bad("exponents = [3]"), ConfigError);
    CHECK_THROWS_AS(bad("threads = 0"), ConfigError);
    CHECK_THROWS_AS(bad("seed = -4"), ConfigError);
    CHECK_THROWS_AS(bad("grid.count = 0"), ConfigError);
    CHECK_THROWS_AS(bad("window.t_min = 10\nwindow.t_max = 5"), ConfigError);
    CHECK_THROWS_AS(bad("aggregate.kind = partial_sum\ngrid.t_min = 0.5"), ConfigError);
    CHECK_THROWS_AS(bad("marginal.centered = 3"), ConfigError);
}

TEST_CASE("Printing the configuration") {
    const auto eff = effective_config({{"seed", 7}});
    std::ostringstream os;
    write_flat_config(os, eff);
    CHECK(os.str().find("seed = 7  #") != std::string::npos);
    const auto j = nested_config(eff);
    CHECK(j["mixing"]["kind"] == "gamma");
    CHECK(j["sim"]["replicas"] == 10000);
    // the nested form round-trips through the parser
    CHECK(effective_config(parse_config_text(j.dump())) == eff);
}
