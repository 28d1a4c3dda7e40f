#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "supou/errors.hpp"
#include "supou/scaling.hpp"

using namespace supou;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ScalingFit synthetic(const std::vector<double>& q, const std::vector<double>& est) {
    ScalingFit f;
    f.quantity = FitQuantity::Tau;
    for (std::size_t i = 0; i < q.size(); ++i) {
        ExponentFit r;
        r.exponent = q[i];
        r.estimate = est[i];
        f.rows.push_back(r);
    }
    return f;
}

}  // namespace

TEST_CASE("q* and theoretical tau") {
    CHECK(q_star(0.6) == 2);
    CHECK(q_star(1.0) == 4);
    CHECK(q_star(0.999) == 2);
    CHECK(q_star(1.5) == 4);
    CHECK(q_star(2.0) == 6);
    CHECK_THAT(*theoretical_tau(4.0, 0.6), WithinRel(3.4, 1e-15));
    CHECK_FALSE(theoretical_tau(1.0, 0.6).has_value());
    CHECK_FALSE(theoretical_tau(2.0, 1.0).has_value());
    CHECK_THAT(*theoretical_sigma(3, 0.5), WithinRel(2.5, 1e-15));
    CHECK_FALSE(theoretical_sigma(2, 1.0).has_value());  // boundary m = alpha + 1
}

TEST_CASE("Exact power laws are recovered") {
    const auto t = default_time_grid();
    REQUIRE(t.size() == 25);
    CHECK(t.front() == 1e3);
    CHECK(t.back() == 1e6);
    for (double beta : {-0.5, 0.0, 1.0, 3.4}) {
        std::vector<double> v;
        for (double x : t) v.push_back(-2.5 * std::pow(x, beta));
        const auto f = fit_power_law(t, v, 1.0);
        CHECK_THAT(f.estimate, WithinAbs(beta, 1e-10));
        CHECK_THAT(f.r2, WithinAbs(1.0, 1e-10));
        CHECK(f.n_points == 25);
        CHECK(f.std_error < 1e-10);
    }
}

TEST_CASE("Window validation") {
    const auto t = log_spaced(1.0, 1e6, 61);
    std::vector<double> v(t.size(), 1.0);
    CHECK_THROWS_AS(fit_power_law(t, v, 1.0, {1e3, 1.2e3}), ConfigError);
    CHECK_THROWS_AS(fit_power_law(t, v, 1.0, {1e3, 5e4}), ConfigError);  // under two decades
    CHECK_NOTHROW(fit_power_law(t, v, 1.0, {1e3, 1e5}));
    v[30] = 0.0;
    try {
        fit_power_law(t, v, 1.0, {1.0, 1e6});
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("t=1.0000000000000000e+03") != std::string::npos);
    }
}

TEST_CASE("Residual-based standard error and R^2") {
    const auto t = default_time_grid();
    std::vector<double> v;
    for (std::size_t i = 0; i < t.size(); ++i) v.push_back(std::pow(t[i], 2.0) * (i % 2 ? 1.05 : 0.95));
    const auto f = fit_power_law(t, v, 2.0);
    CHECK_THAT(f.estimate, WithinAbs(2.0, 0.01));
    CHECK(f.std_error > 0.0);
    CHECK(f.r2 < 1.0);
    CHECK(f.r2 > 0.99);
}

TEST_CASE("fit_tau rejects nonpositive moments") {
    const auto t = default_time_grid();
    std::vector<double> v(t.size(), 1.0);
    v[3] = -1.0;
    CHECK_THROWS_AS(fit_tau(t, v, 2.0), DomainError);
    std::vector<double> w;
    for (double x : t) w.push_back(std::pow(x, 0.5 * 3.0));
    CHECK_THAT(fit_tau(t, w, 3.0).estimate, WithinAbs(1.5, 1e-10));
}

TEST_CASE("sigma from analytic tables") {
    const auto grid = default_time_grid();
    const auto law = MarginalLaw::inverse_gaussian(1.0, 1.0, true);
    const auto table = cumulant_table(MixingMeasure::gamma(0.5), law, AggregateKind::Integrated, {3}, grid);
    CHECK_THAT(fit_sigma(table, 3).estimate, WithinAbs(2.5, 0.05));
    // first cumulant of an uncentered law grows exactly linearly
    const auto t1 = cumulant_table(MixingMeasure::gamma(0.3), MarginalLaw::gamma(2.0, 1.0), AggregateKind::Integrated,
                                   {1}, grid);
    CHECK_THAT(fit_sigma(t1, 1).estimate, WithinAbs(1.0, 1e-6));
    CHECK_THROWS_AS(fit_sigma(t1, 2), DomainError);
}

TEST_CASE("tau from the cumulant-to-moment conversion") {
    const auto grid = default_time_grid();
    const auto law = MarginalLaw::inverse_gaussian(1.0, 1.0, true);
    const auto table =
        cumulant_table(MixingMeasure::gamma(0.6), law, AggregateKind::Integrated, {1, 2, 3, 4}, grid);
    const auto m = moments_from_cumulant_table(table, {4});
    CHECK_THAT(fit_tau(m, 4.0).estimate, WithinAbs(3.4, 0.05));
    CHECK_THROWS_AS(moments_from_cumulant_table(table, {3}), ConfigError);
    CHECK_THROWS_AS(moments_from_cumulant_table(table, {6}), DomainError);

    // short-range dependence with a Gaussian marginal: linear variance growth
    const auto g = cumulant_table(MixingMeasure::gamma(1.5), MarginalLaw::gaussian(1.0), AggregateKind::PartialSum,
                                  {1, 2}, grid);
    CHECK_THAT(fit_tau(moments_from_cumulant_table(g, {2}), 2.0).estimate, WithinAbs(1.0, 0.05));
}

TEST_CASE("Intermittency test") {
    const double H = 0.7;
    CHECK(intermittency_test(synthetic({2, 4}, {2 * H, 4 * H}), 0.02) == Verdict::NotIntermittent);
    CHECK(intermittency_test(synthetic({2, 4}, {1.4, 3.4}), 0.1) == Verdict::Intermittent);
    CHECK(intermittency_test(synthetic({2}, {1.4}), 0.1) == Verdict::Inconclusive);
    // ratios 0.5, 0.45: decreasing by more than tol, neither branch applies
    CHECK(intermittency_test(synthetic({2, 4}, {1.0, 1.8}), 0.02) == Verdict::Inconclusive);
    CHECK(to_string(Verdict::NotIntermittent) == "not-intermittent");
}

TEST_CASE("Convexity check") {
    CHECK(convexity_check(synthetic({2, 4, 6}, {1.4, 3.4, 5.4}), 0.05));
    CHECK_FALSE(convexity_check(synthetic({2, 4, 6}, {1.4, 2.0, 3.4}), 0.05));
    CHECK_FALSE(convexity_check(synthetic({2, 4, 6}, {1.0, 2.5, 3.0}), 0.05));
    CHECK_THROWS_AS(convexity_check(synthetic({2, 4}, {1.0, 2.0}), 0.05), DomainError);
}

TEST_CASE("CSV and plot data") {
    auto f = synthetic({2, 4}, {1.4, 3.4});
    f.rows[0].log_t = {1.0, 2.0};
    f.rows[0].log_value = {3.0, 4.0};
    std::ostringstream os;
    write_csv(os, f, Verdict::Intermittent);
    std::istringstream in(os.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "q,estimate,stderr,r2,t_min,t_max,n_points,verdict");
    CHECK(row.rfind("2.0000000000000000e+00,1.3999999999999999e+00,", 0) == 0);
    CHECK(row.substr(row.size() - 13) == ",intermittent");

    const auto dir = std::filesystem::temp_directory_path() / "supou_plot_test";
    std::filesystem::remove_all(dir);
    const auto paths = write_plot_data(dir, "tau", f);
    REQUIRE(paths.size() == 2);
    std::ifstream p(paths[0]);
    std::string line;
    std::getline(p, line);
    CHECK(line.rfind("# log_t log_value", 0) == 0);
    std::getline(p, line);
    CHECK(line == "1.0000000000000000e+00 3.0000000000000000e+00");
    std::filesystem::remove_all(dir);
}
