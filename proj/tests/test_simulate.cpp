#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "supou/errors.hpp"
#include "supou/simulate.hpp"

using namespace supou;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Standard error of the mean of a dependent series by batch means.
double batch_se(const std::vector<double>& x, std::size_t batches) {
    const std::size_t len = x.size() / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b)
        means.push_back(mean_of(std::vector<double>(x.begin() + b * len, x.begin() + (b + 1) * len)));
    const double m = mean_of(means);
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    return std::sqrt(ss / (batches - 1.0) / batches);
}

SimConfig gamma_config(std::size_t replicas) {
    SimConfig c;
    c.mixing = MixingMeasure::degenerate(1.0);
    c.marginal = MarginalLaw::gamma(1.0, 1.0, true);
    c.replicas = replicas;
    c.step = 0.1;
    c.horizon = 20.0;
    c.seed = 99;
    return c;
}

}  // namespace

TEST_CASE("Zero BDLP gives deterministic decay") {
    std::mt19937_64 rng(1);
    const auto p = ou_component_path(0.7, NullBdlp{}, 0.25, 8, 3.0, rng);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK_THAT(p[i], WithinRel(3.0 * std::exp(-0.7 * 0.25 * i), 1e-14));
}

TEST_CASE("Gamma-OU component: stationary mean and lag-one autocorrelation") {
    std::mt19937_64 rng(12345);
    const double lambda = 0.5, dt = 1.0, nu = 2.0, c = 1.5;
    const auto law = MarginalLaw::gamma(nu, c);
    const auto p = ou_component_path(lambda, component_bdlp(law, 1.0), dt, 100000, rng);
    CHECK_THAT(mean_of(p), WithinAbs(nu / c, 3.0 * batch_se(p, 50)));

    const double m = mean_of(p);
    std::vector<double> prod;
    double var = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        prod.push_back((p[i] - m) * (p[i + 1] - m));
        var += (p[i] - m) * (p[i] - m);
    }
    var /= static_cast<double>(p.size() - 1);
    const double acf = mean_of(prod) / var;
    const double se = batch_se(prod, 50) / var;
    CHECK_THAT(acf, WithinAbs(std::exp(-lambda * dt), 3.0 * se));
}

TEST_CASE("Stationary draws of a deterministic-jump BDLP have the right mean and variance") {
    std::mt19937_64 rng(5);
    const auto law = MarginalLaw::compound_poisson_deterministic(2.0, 0.5);
    const auto bdlp = component_bdlp(law, 1.0);
    std::vector<double> x(40000);
    for (auto& v : x) v = stationary_draw(bdlp, rng);
    const double m = mean_of(x);
    double var = 0.0;
    for (double v : x) var += (v - m) * (v - m);
    var /= x.size() - 1.0;
    CHECK_THAT(m, WithinAbs(law.cumulant(1), 4.0 * std::sqrt(law.cumulant(2) / x.size())));
    CHECK_THAT(var, WithinRel(law.cumulant(2), 0.05));
}

TEST_CASE("Unsupported BDLP") {
    CHECK_THROWS_AS(component_bdlp(MarginalLaw::inverse_gaussian(1, 1), 1.0), UnsupportedOperation);
    auto c = gamma_config(10);
    c.mixing = MixingMeasure::gamma(0.5);
    CHECK_THROWS_AS(superposition_path(c), ConfigError);
    c = gamma_config(10);
    c.marginal = MarginalLaw::nig(2, 0, 1, 0);
    CHECK_THROWS_AS(superposition_path(c), ConfigError);
}

TEST_CASE("Determinism and worker independence") {
    auto c = gamma_config(64);
    const auto a = superposition_path(c);
    c.threads = 4;
    const auto b = superposition_path(c);
    CHECK(a.paths == b.paths);
    CHECK(a.seeds == b.seeds);
    CHECK(a.length() == 201);
    CHECK(replica_seed(99, 3) == a.seeds[3]);
    c.seed = 100;
    CHECK(superposition_path(c).paths != a.paths);
}

TEST_CASE("Single-component superposition reduces to one OU path") {
    auto c = gamma_config(3);
    c.marginal = MarginalLaw::gamma(1.0, 1.0);
    const auto ens = superposition_path(c);
    std::mt19937_64 rng(replica_seed(c.seed, 1));
    const auto p = ou_component_path(1.0, component_bdlp(c.marginal, 1.0), c.step, c.n_steps(), rng);
    CHECK(ens.paths[1] == p);
}

TEST_CASE("Three-component superposition variance") {
    SimConfig c;
    const double w1 = 1.0, w2 = std::pow(2.0, -1.8), w3 = std::pow(3.0, -1.8), s = w1 + w2 + w3;
    c.mixing = MixingMeasure::discrete({1.0, 0.5, 1.0 / 3.0}, {w1 / s, w2 / s, w3 / s});
    c.marginal = MarginalLaw::gamma(2.0, 1.0, true);
    c.replicas = 4000;
    c.step = 0.5;
    c.horizon = 5.0;
    c.seed = 7;
    const auto ens = superposition_path(c);
    CHECK(ens.rates.size() == 3);
    CHECK(ens.warnings.empty());
    std::vector<double> x;
    for (const auto& p : ens.paths) x.push_back(p.back());
    const double k2 = k_statistic(x, 2);
    // sampling SE of k2 is about sqrt((kappa4 + 2 kappa2^2) / R)
    const double se = std::sqrt((c.marginal.cumulant(4) + 2 * 4.0) / c.replicas);
    CHECK_THAT(k2, WithinAbs(c.marginal.cumulant(2), 3.0 * se));
    CHECK_THAT(k_statistic(x, 1), WithinAbs(0.0, 3.0 * std::sqrt(2.0 / c.replicas)));
}

TEST_CASE("Truncated power-law superposition reports dropped mass") {
    SimConfig c;
    c.mixing = MixingMeasure::discrete_power_law(1.0, 0.8, 200);
    c.marginal = MarginalLaw::gamma(1.0, 1.0);
    c.replicas = 2;
    c.horizon = 1.0;
    const auto ens = superposition_path(c);
    CHECK(ens.truncated_mass > 1e-10);
    CHECK_FALSE(ens.warnings.empty());
    double kept = 0.0;
    for (double w : ens.weights) kept += w;
    CHECK_THAT(kept, WithinRel(1.0, 1e-14));
}

TEST_CASE("Aggregation of constant and decaying paths") {
    PathEnsemble ens;
    ens.step = 0.25;
    ens.paths = {std::vector<double>(17, 2.0)};
    const auto integ = aggregate_path(ens, AggregateKind::Integrated);
    CHECK_THAT(integ.values[0][integ.time_index(3.0)], WithinRel(6.0, 1e-14));
    const auto part = aggregate_path(ens, AggregateKind::PartialSum);
    REQUIRE(part.times.size() == 4);
    CHECK(part.values[0][2] == 6.0);

    ens.step = 0.3;
    CHECK_THROWS_AS(aggregate_path(ens, AggregateKind::PartialSum), ConfigError);

    // trapezoid error is O(step^2): halving the step divides it by 4
    const double lambda = 1.3, x0 = 2.0, T = 2.0;
    auto err = [&](double dt) {
        std::mt19937_64 rng(0);
        PathEnsemble e;
        e.step = dt;
        e.paths = {ou_component_path(lambda, NullBdlp{}, dt, static_cast<std::size_t>(T / dt), x0, rng)};
        const auto a = aggregate_path(e, AggregateKind::Integrated);
        return a.values[0].back() - x0 * (1 - std::exp(-lambda * T)) / lambda;
    };
    CHECK_THAT(err(0.1) / err(0.05), WithinAbs(4.0, 0.05));
}

TEST_CASE("Aggregation is linear") {
    auto c = gamma_config(5);
    const auto a = superposition_path(c);
    c.seed = 3;
    const auto b = superposition_path(c);
    PathEnsemble sum = a;
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t i = 0; i < sum.length(); ++i) sum.paths[r][i] += b.paths[r][i];
    const auto ya = aggregate_path(a, AggregateKind::Integrated);
    const auto yb = aggregate_path(b, AggregateKind::Integrated);
    const auto ys = aggregate_path(sum, AggregateKind::Integrated);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t j = 0; j < ys.times.size(); ++j)
            CHECK_THAT(ys.values[r][j], WithinAbs(ya.values[r][j] + yb.values[r][j], 1e-10));
}

TEST_CASE("Empirical moments") {
    AggregateEnsemble agg;
    agg.times = {1.0};
    agg.values.assign(50, std::vector<double>{3.0});
    const auto m = empirical_moments(agg, {2.0, 6.0}, {1.0});
    CHECK(m.values[0][0] == 9.0);
    CHECK(m.std_errors[0][0] == 0.0);
    CHECK_FALSE(m.mc_unreliable[0]);
    CHECK(m.mc_unreliable[1]);
    CHECK(m.method == Method::Empirical);
}

TEST_CASE("k-statistics of a Gaussian sample") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.5);
    AggregateEnsemble agg;
    agg.times = {1.0};
    for (int i = 0; i < 10000; ++i) agg.values.push_back({n(rng)});
    const auto t = empirical_cumulants(agg, {1, 2, 3, 4}, {1.0});
    CHECK(t.method == Method::Empirical);
    CHECK_THAT(t.values[1][0], WithinAbs(2.25, 3.0 * t.std_errors[1][0]));
    CHECK_THAT(t.values[3][0], WithinAbs(0.0, 3.0 * t.std_errors[3][0]));
    CHECK_THAT(t.values[2][0], WithinAbs(0.0, 3.0 * t.std_errors[2][0]));
}

TEST_CASE("k-statistics are unbiased on a small exact sample") {
    // x = {0, 1, 3}: k2 = sample variance, k3 = n/((n-1)(n-2)) sum (x-m)^3
    const std::vector<double> x{0.0, 1.0, 3.0};
    const double m = 4.0 / 3.0;
    double s2 = 0, s3 = 0;
    for (double v : x) {
        s2 += (v - m) * (v - m);
        s3 += (v - m) * (v - m) * (v - m);
    }
    CHECK_THAT(k_statistic(x, 2), WithinRel(s2 / 2.0, 1e-14));
    CHECK_THROWS_AS(k_statistic(x, 3), DomainError);  // too few replicas
}

TEST_CASE("Insufficient replicas") {
    AggregateEnsemble agg;
    agg.times = {1.0};
    agg.values.assign(10, std::vector<double>{1.0});
    CHECK_THROWS_AS(empirical_cumulants(agg, {3}, {1.0}), DomainError);
    CHECK_NOTHROW(empirical_cumulants(agg, {2}, {1.0}));
}

TEST_CASE("Ensemble against analytic cumulants and correlation") {
    auto c = gamma_config(3000);
    c.horizon = 30.0;
    c.seed = 2024;
    const auto ens = superposition_path(c);

    // stationarity of mean and variance; six correlated comparisons, so a
    // 4 SE bound keeps the family-wise false alarm rate small
    for (double t : {7.5, 15.0, 30.0}) {
        std::vector<double> x;
        for (const auto& p : ens.paths) x.push_back(p[static_cast<std::size_t>(std::round(t / c.step))]);
        CHECK_THAT(k_statistic(x, 1), WithinAbs(0.0, 4.0 * std::sqrt(1.0 / c.replicas)));
        CHECK_THAT(k_statistic(x, 2), WithinAbs(1.0, 4.0 * std::sqrt(8.0 / c.replicas)));
    }
    for (double lag : {1.0, 2.0, 5.0}) {
        const auto acf = lag_autocorrelation(ens, lag);
        CHECK_THAT(acf.value, WithinAbs(correlation(c.mixing, lag), 3.0 * acf.std_error));
    }
    const auto agg = aggregate_path(ens, AggregateKind::PartialSum);
    const auto table = empirical_cumulants(agg, {2}, {10.0, 30.0});
    for (std::size_t j = 0; j < 2; ++j) {
        const double an = aggregate_cumulant(c.mixing, c.marginal, AggregateKind::PartialSum, 2, table.times[j]);
        CHECK_THAT(table.values[0][j], WithinAbs(an, 3.0 * table.std_errors[0][j]));
    }
}

TEST_CASE("Summaries") {
    auto c = gamma_config(2);
    c.horizon = 0.2;
    const auto ens = superposition_path(c);
    std::ostringstream a, b, r;
    write_path_summary(a, ens);
    write_seed_ledger(b, ens);
    write_raw_paths(r, ens);
    CHECK(a.str().rfind("t,mean,variance\n", 0) == 0);
    CHECK(b.str() == "replica,seed\n0," + std::to_string(replica_seed(99, 0)) + "\n1," +
                         std::to_string(replica_seed(99, 1)) + "\n");
    const std::string raw = r.str();
    CHECK(std::count(raw.begin(), raw.end(), '\n') == 1 + 2 * 3);
}
