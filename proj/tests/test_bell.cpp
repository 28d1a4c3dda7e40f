#include <catch_amalgamated.hpp>

#include <functional>
#include <random>
#include <vector>

#include "supou/bell.hpp"
#include "supou/errors.hpp"

using namespace supou;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Sum over all set partitions of {1..m} with k blocks of prod x_{|block|}.
double partition_sum(unsigned m, unsigned k, const std::vector<double>& x) {
    std::vector<unsigned> block_size;
    double total = 0.0;
    std::function<void(unsigned)> place = [&](unsigned element) {
        if (element == m) {
            if (block_size.size() != k) return;
            double prod = 1.0;
            for (unsigned s : block_size) prod *= x[s - 1];
            total += prod;
            return;
        }
        // indices, not references: the recursion may grow the vector
        for (std::size_t b = 0; b < block_size.size(); ++b) {
            ++block_size[b];
            place(element + 1);
            --block_size[b];
        }
        if (block_size.size() < k) {
            block_size.push_back(1);
            place(element + 1);
            block_size.pop_back();
        }
    };
    place(0);
    return total;
}

}  // namespace

TEST_CASE("Partial Bell polynomial examples") {
    CHECK(partial_bell(3, 3, std::vector<double>{2.0}) == 8.0);
    CHECK(partial_bell(4, 2, std::vector<double>{1.0, 1.0, 1.0}) == 7.0);
    CHECK(partial_bell(5, 1, std::vector<double>{1.0, 2.0, 3.0, 4.0, 9.0}) == 9.0);
}

TEST_CASE("Partial Bell polynomial agrees with partition enumeration") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (unsigned m = 1; m <= 8; ++m)
        for (unsigned k = 1; k <= m; ++k) {
            std::vector<double> x(m - k + 1);
            for (auto& v : x) v = u(rng);
            const double expected = partition_sum(m, k, x);
            CHECK_THAT(partial_bell(m, k, x), WithinAbs(expected, 1e-10 * (1.0 + std::abs(expected))));
        }
}

TEST_CASE("Integer inputs are exact in wide arithmetic") {
    // B_{20,k}(1,1,...) are Stirling numbers of the second kind; their sum is Bell(20).
    BigInt total = 0;
    for (unsigned k = 1; k <= 20; ++k) total += partial_bell(20, k, std::vector<BigInt>(20 - k + 1, BigInt(1)));
    CHECK(total == BigInt("51724158235372"));
    // B_{n,k}(1!, 2!, 3!, ...) are Lah-like counts: B_{6,2}(1,2,6,24,120) = 1800
    CHECK(partial_bell(6, 2, std::vector<BigInt>{1, 2, 6, 24, 120}) == BigInt(1800));
}

TEST_CASE("Homogeneity B(c x1, c^2 x2, ...) = c^m B(x)") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 50; ++trial) {
        const unsigned m = 2 + trial % 7;
        const unsigned k = 1 + trial % m;
        std::vector<double> x(m - k + 1), y(m - k + 1);
        const double c = u(rng);
        double cp = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = u(rng);
            cp *= c;
            y[i] = cp * x[i];
        }
        const double lhs = partial_bell(m, k, y);
        const double rhs = std::pow(c, m) * partial_bell(m, k, x);
        CHECK_THAT(lhs, WithinAbs(rhs, 1e-11 * (1.0 + std::abs(rhs))));
    }
}

TEST_CASE("Dimension mismatch is rejected") {
    CHECK_THROWS_AS(partial_bell(4, 2, std::vector<double>{1.0, 1.0}), SizeError);
    CHECK_THROWS_AS(partial_bell(3, 4, std::vector<double>{}), SizeError);
    CHECK_THROWS_AS(partial_bell(3, 0, std::vector<double>{1, 1, 1, 1}), SizeError);
}

TEST_CASE("Moments from cumulants") {
    const double s2 = 2.5;
    CHECK_THAT(moments_from_cumulants({0.0, s2, 0.0, 0.0})[3], WithinRel(3.0 * s2 * s2, 1e-15));
    CHECK(moments_from_cumulants({1.0, 0.0, 0.0})[2] == 1.0);
    CHECK(moments_from_cumulants({0.0, 1.0, 3.0})[2] == 3.0);
}

TEST_CASE("Cumulants from moments") {
    const double c = 1.7;
    const auto k = cumulants_from_moments({c, c * c, c * c * c, c * c * c * c});
    CHECK_THAT(k[0], WithinRel(c, 1e-15));
    for (int i = 1; i < 4; ++i) CHECK_THAT(k[i], WithinAbs(0.0, 1e-12));
    const auto g = cumulants_from_moments({0.0, 2.0, 0.0, 12.0});
    CHECK_THAT(g[1], WithinRel(2.0, 1e-15));
    CHECK_THAT(g[3], WithinAbs(0.0, 1e-12));
    const auto back = cumulants_from_moments(moments_from_cumulants({0.0, 1.0, 3.0, 10.0}));
    const std::vector<double> want{0.0, 1.0, 3.0, 10.0};
    for (int i = 0; i < 4; ++i) CHECK_THAT(back[i], WithinAbs(want[i], 1e-12));
}

TEST_CASE("Roundtrip on random vectors") {
    std::mt19937_64 rng(2024);
    // unit-scale cumulants; the conversion is ill conditioned for large ones
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_int_distribution<int> len(1, 8);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> kappa(static_cast<std::size_t>(len(rng)));
        for (auto& v : kappa) v = u(rng);
        const auto back = cumulants_from_moments(moments_from_cumulants(kappa));
        for (std::size_t i = 0; i < kappa.size(); ++i)
            worst = std::max(worst, std::abs(back[i] - kappa[i]) / (1.0 + std::abs(kappa[i])));
    }
    CHECK(worst < 1e-10);
}
