#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "supou/errors.hpp"
#include "supou/mixing.hpp"

using namespace supou;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// E_alpha(z) by its power series in long double, for moderate |z|.
double ml_series(double alpha, double z) {
    long double sum = 0.0L;
    for (int k = 0; k < 200; ++k) {
        const long double term = std::pow(static_cast<long double>(z), k) / std::tgamma(alpha * k + 1.0L);
        sum += term;
        if (k > 5 && std::abs(term) < 1e-22L) break;
    }
    return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("Factories validate parameters") {
    CHECK_THROWS_AS(MixingMeasure::degenerate(0.0), ConfigError);
    CHECK_THROWS_AS(MixingMeasure::gamma(-1.0), ConfigError);
    CHECK_THROWS_AS(MixingMeasure::mittag_leffler(2.0), ConfigError);
    CHECK_THROWS_AS(MixingMeasure::discrete({1.0, 2.0}, {0.5, 0.4}), ConfigError);
    CHECK_THROWS_AS(MixingMeasure::discrete({1.0, -2.0}, {0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(MixingMeasure::discrete({1.0}, {0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(MixingMeasure::density([](double x) { return 2.0 * std::exp(-x); }, 1.0, 1.0), ConfigError);
}

TEST_CASE("Closed-form correlations") {
    CHECK_THAT(correlation(MixingMeasure::degenerate(2.0), 1.5), WithinRel(std::exp(-3.0), 1e-15));
    const auto d = MixingMeasure::discrete({1.0, 2.0, 3.0}, {0.2, 0.3, 0.5});
    CHECK_THAT(correlation(d, 0.7),
               WithinRel(0.2 * std::exp(-0.7) + 0.3 * std::exp(-1.4) + 0.5 * std::exp(-2.1), 1e-15));
    CHECK_THAT(correlation(MixingMeasure::gamma(0.6), 9.0), WithinRel(std::pow(10.0, -0.6), 1e-15));
    CHECK_THAT(correlation(MixingMeasure::mittag_leffler(0.5), 4.0), WithinRel(1.0 / 3.0, 1e-15));
    CHECK(correlation(MixingMeasure::gamma(0.6), 0.0) == 1.0);
}

TEST_CASE("Quadrature correlation matches closed forms") {
    for (double alpha : {0.3, 0.5, 1.5}) {
        const auto g = MixingMeasure::gamma(alpha);
        for (double tau : {1e-2, 0.5, 3.0, 100.0, 1e3})
            CHECK_THAT(correlation_quadrature(g, tau), WithinRel(std::pow(1.0 + tau, -alpha), 1e-8));
    }
    for (double alpha : {0.4, 0.8}) {
        const auto ml = MixingMeasure::mittag_leffler(alpha);
        for (double tau : {0.05, 1.0, 20.0, 500.0})
            CHECK_THAT(correlation_quadrature(ml, tau), WithinRel(1.0 / (1.0 + std::pow(tau, alpha)), 1e-7));
    }
    CHECK_THROWS_AS(correlation_quadrature(MixingMeasure::degenerate(1.0), 1.0), UnsupportedOperation);
}

TEST_CASE("Densities integrate to one") {
    for (const auto& m : {MixingMeasure::gamma(0.4), MixingMeasure::gamma(2.5), MixingMeasure::mittag_leffler(0.7)})
        CHECK_THAT(m.expect([](double) { return 1.0; }), WithinRel(1.0, 1e-8));
}

TEST_CASE("Tauberian tail: pi((0,x]) ~ x^alpha / Gamma(1+alpha)") {
    for (double alpha : {0.3, 0.6, 0.9}) {
        for (const auto& m : {MixingMeasure::gamma(alpha), MixingMeasure::mittag_leffler(alpha)}) {
            CHECK_THAT(m.tail_index(), WithinRel(alpha, 1e-15));
            // the relative correction is of order x^alpha
            const double x = 1e-12;
            const double ratio = cdf_near_zero(m, x) / (m.tail_scale() * std::pow(x, alpha));
            CHECK_THAT(ratio, WithinRel(1.0, 1e-3));
        }
    }
    CHECK(std::isinf(MixingMeasure::degenerate(1.0).tail_index()));
}

TEST_CASE("Gamma cdf uses the regularized incomplete gamma function") {
    const auto g = MixingMeasure::gamma(0.7);
    CHECK_THAT(cdf_near_zero(g, 0.3), WithinRel(boost::math::gamma_p(0.7, 0.3), 1e-14));
}

TEST_CASE("Mittag-Leffler function") {
    for (double alpha : {0.3, 0.5, 0.8, 1.0})
        for (double x : {-0.1, -0.5, -1.0})
            CHECK_THAT(mittag_leffler_function(alpha, x), WithinRel(ml_series(alpha, x), 1e-9));
    CHECK_THAT(mittag_leffler_function(1.0, -2.0), WithinRel(std::exp(-2.0), 1e-12));
    // E_{1/2}(-x) = exp(x^2) erfc(x)
    CHECK_THAT(mittag_leffler_function(0.5, -4.0), WithinRel(std::exp(16.0) * std::erfc(4.0), 1e-8));
    CHECK_THAT(mittag_leffler_reference_correlation(0.5, 0.5, 16.0), WithinRel(std::exp(16.0) * std::erfc(4.0), 1e-8));
}

TEST_CASE("Mittag-Leffler mixing above alpha = 1 supports the correlation only") {
    const auto ml = MixingMeasure::mittag_leffler(1.5);
    CHECK_THAT(correlation(ml, 2.0), WithinRel(1.0 / (1.0 + std::pow(2.0, 1.5)), 1e-15));
    CHECK_THROWS_AS(ml.expect([](double) { return 1.0; }), UnsupportedOperation);
}

TEST_CASE("Inverse moments") {
    const auto g = MixingMeasure::gamma(2.5);
    // E xi^-2 = Gamma(0.5)/Gamma(2.5)
    CHECK_THAT(inverse_moment_integral(g, 2, 0.0).value, WithinRel(std::tgamma(0.5) / std::tgamma(2.5), 1e-10));
    CHECK(inverse_moment_integral(g, 3, 0.0).divergent);
    CHECK_FALSE(inverse_moment_integral(g, 3, 0.5).divergent);
    const auto d = MixingMeasure::discrete({1.0, 2.0}, {0.5, 0.5});
    CHECK_THAT(inverse_moment_integral(d, 2, 0.0).value, WithinRel(0.5 + 0.125, 1e-15));
}

TEST_CASE("Power-law discrete rule") {
    const auto m = MixingMeasure::discrete_power_law(1.0, 0.8, 50);
    const auto& d = std::get<Discrete>(m.variant());
    CHECK(d.rates.size() == 50);
    CHECK(d.truncated_mass > 1e-10);
    double s = 0.0;
    for (double w : d.weights) s += w;
    CHECK_THAT(s, WithinRel(1.0, 1e-14));
    CHECK_THAT(d.weights[1] / d.weights[0], WithinRel(std::pow(2.0, -1.8), 1e-14));
    CHECK_THAT(d.rates[2], WithinRel(1.0 / 3.0, 1e-15));
}

TEST_CASE("Sampling") {
    std::mt19937_64 rng(3);
    CHECK(sample(MixingMeasure::degenerate(2.0), rng) == 2.0);
    const auto g = MixingMeasure::gamma(3.0);
    double s = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) s += sample(g, rng);
    CHECK_THAT(s / n, WithinAbs(3.0, 4.0 * std::sqrt(3.0 / n)));
    CHECK_THROWS_AS(sample(MixingMeasure::mittag_leffler(0.5), rng), UnsupportedOperation);
}

TEST_CASE("Generic density measure") {
    const auto m = MixingMeasure::density([](double x) { return 2.0 * std::exp(-2.0 * x); }, 1.0, 2.0);
    CHECK_THAT(correlation(m, 1.0), WithinRel(2.0 / 3.0, 1e-8));
    CHECK_THAT(cdf_near_zero(m, 0.5), WithinRel(1.0 - std::exp(-1.0), 1e-8));
}
