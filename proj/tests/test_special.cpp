#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "spenet/special.hpp"

using namespace spenet;

// Reference values computed with scipy 1.15 (frozen).

TEST_CASE("normal cdf reference points", "[special]") {
    CHECK(normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(normal_cdf(1.0) == Catch::Approx(0.8413447460685429).margin(1e-14));
    CHECK(normal_cdf(-2.3) == Catch::Approx(0.010724110021675809).margin(1e-14));
}

TEST_CASE("normal quantile reference points", "[special]") {
    CHECK(normal_quantile(0.975) == Catch::Approx(1.959963984540054).margin(1e-10));
    CHECK(normal_quantile(0.995) == Catch::Approx(2.5758293035489004).margin(1e-10));
    CHECK(normal_quantile(0.3) == Catch::Approx(-0.5244005127080409).margin(1e-10));
    CHECK(normal_quantile(1e-6) == Catch::Approx(-4.753424308822899).margin(1e-9));
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("normal quantile inverts the cdf", "[special]") {
    for (double x = -5.0; x <= 5.0; x += 0.25)
        CHECK(normal_quantile(normal_cdf(x)) == Catch::Approx(x).margin(1e-8));
}

TEST_CASE("regularized incomplete gamma reference points", "[special]") {
    CHECK(lower_gamma_regularized(0.5, 0.5) == Catch::Approx(0.6826894921370859).epsilon(1e-12));
    CHECK(lower_gamma_regularized(3.0, 2.5) == Catch::Approx(0.45618688411667035).epsilon(1e-12));
    CHECK(lower_gamma_regularized(10.0, 3.0) == Catch::Approx(0.0011024881301154815).epsilon(1e-11));
    CHECK(lower_gamma_regularized(2.0, 0.0) == 0.0);
    CHECK(upper_gamma_regularized(1.0, 0.0) == 1.0);
    CHECK_THROWS_AS(lower_gamma_regularized(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(lower_gamma_regularized(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("gamma quantile reference points", "[special]") {
    // Gamma(k/2, 2) is chi-squared(k).
    CHECK(gamma_quantile(1.5, 2.0, 0.95) == Catch::Approx(7.814727903251179).margin(1e-8));
    CHECK(chi_squared_quantile(3, 0.95) == Catch::Approx(7.814727903251179).margin(1e-8));
    CHECK(gamma_quantile(2.7, 0.9, 0.5) == Catch::Approx(2.1374823669300436).margin(1e-8));
    CHECK_THROWS_AS(gamma_quantile(0.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(gamma_quantile(1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("gamma quantile inverts the regularized gamma", "[special]") {
    for (const double shape : {0.7, 1.5, 4.0}) {
        for (const double p : {0.05, 0.5, 0.95, 0.999}) {
            const double x = gamma_quantile(shape, 1.0, p);
            CHECK(lower_gamma_regularized(shape, x) == Catch::Approx(p).margin(1e-9));
        }
    }
}

TEST_CASE("ks distance against exact plug-in quantiles", "[special]") {
    // Sample placed at the (i - 0.5)/n normal quantiles has KS distance
    // exactly 0.5/n.
    const int n = 200;
    std::vector<double> xs;
    for (int i = 1; i <= n; ++i)
        xs.push_back(normal_quantile((static_cast<double>(i) - 0.5) / n));
    CHECK(ks_distance_normal(xs) == Catch::Approx(0.5 / n).margin(1e-10));
    CHECK_THROWS_AS(ks_distance_normal({}), std::invalid_argument);
}
