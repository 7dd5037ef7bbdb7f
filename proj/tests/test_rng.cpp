#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "spenet/rng.hpp"

using namespace spenet;

TEST_CASE("streams are reproducible and distinct", "[rng]") {
    RngStream a(123, 5), b(123, 5), c(123, 6), d(124, 5);
    bool all_equal_c = true, all_equal_d = true;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t x = a.next_u64();
        CHECK(x == b.next_u64());
        all_equal_c = all_equal_c && x == c.next_u64();
        all_equal_d = all_equal_d && x == d.next_u64();
    }
    CHECK_FALSE(all_equal_c);
    CHECK_FALSE(all_equal_d);
}

TEST_CASE("uniform01 range and mean", "[rng]") {
    RngStream rng(1);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == Catch::Approx(0.5).margin(0.005));
}

TEST_CASE("bernoulli frequency", "[rng]") {
    RngStream rng(2);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3);
    CHECK(static_cast<double>(hits) / n == Catch::Approx(0.3).margin(0.01));
}

TEST_CASE("normal moments", "[rng]") {
    RngStream rng(3);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    CHECK(mean == Catch::Approx(0.0).margin(0.02));
    CHECK(sum_sq / n - mean * mean == Catch::Approx(1.0).margin(0.03));
}

TEST_CASE("gamma moments across the shape boundary", "[rng]") {
    RngStream rng(4);
    for (const double shape : {0.5, 1.0, 2.5, 9.0}) {
        double sum = 0.0, sum_sq = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double x = rng.gamma(shape);
            REQUIRE(x > 0.0);
            sum += x;
            sum_sq += x * x;
        }
        const double mean = sum / n;
        CHECK(mean == Catch::Approx(shape).epsilon(0.02));
        CHECK(sum_sq / n - mean * mean == Catch::Approx(shape).epsilon(0.05));
    }
    CHECK_THROWS_AS(rng.gamma(0.0), std::invalid_argument);
}

TEST_CASE("beta mean and support", "[rng]") {
    RngStream rng(5);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.beta(2.0, 8.0);
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    CHECK(sum / n == Catch::Approx(0.2).margin(0.005));
}

TEST_CASE("below produces bounded uniform integers", "[rng]") {
    RngStream rng(6);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t x = rng.below(7);
        REQUIRE(x < 7);
        ++counts[static_cast<std::size_t>(x)];
    }
    for (int c : counts) CHECK(static_cast<double>(c) / n == Catch::Approx(1.0 / 7).margin(0.01));
    CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
}
