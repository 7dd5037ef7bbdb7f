#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace spenet {

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Inverse standard normal CDF.
///
/// Acklam's rational approximation (|err| < 1.2e-9 over (0,1)) followed by
/// one Halley step against the erfc-based CDF, which brings the absolute
/// error to ~1e-15. No tables, no external dependencies.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

namespace detail {

// Lower regularized incomplete gamma by its power series; valid for x < a+1.
inline double gamma_p_series(double a, double x) {
    constexpr int max_iter = 1000;
    constexpr double eps = 1e-15;
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < max_iter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * eps)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error("incomplete gamma: series failed to converge");
}

// Upper regularized incomplete gamma by modified Lentz continued fraction;
// valid for x >= a+1.
inline double gamma_q_contfrac(double a, double x) {
    constexpr int max_iter = 1000;
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= max_iter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error("incomplete gamma: continued fraction failed to converge");
}

}  // namespace detail

/// Lower regularized incomplete gamma P(a, x).
inline double lower_gamma_regularized(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("lower_gamma_regularized: a must be positive");
    if (x < 0.0) throw std::invalid_argument("lower_gamma_regularized: x must be nonnegative");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_contfrac(a, x);
}

inline double upper_gamma_regularized(double a, double x) {
    return 1.0 - lower_gamma_regularized(a, x);
}

/// Quantile of Gamma(shape, scale): the x with P(shape, x/scale) = p.
///
/// Wilson-Hilferty start, then bisection on a safe bracket down to 1e-12
/// relative width. Bisection is slow but unconditionally convergent, and
/// quantiles are computed once per test run.
inline double gamma_quantile(double shape, double scale, double p) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("gamma_quantile: shape and scale must be positive");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gamma_quantile: p must be in (0,1)");

    const double z = normal_quantile(p);
    const double wh = 1.0 - 1.0 / (9.0 * shape) + z / (3.0 * std::sqrt(shape));
    double guess = shape * wh * wh * wh;
    if (!(guess > 0.0)) guess = shape;

    double lo = guess, hi = guess;
    while (lower_gamma_regularized(shape, lo) > p) {
        lo *= 0.5;
        if (lo < 1e-300) break;
    }
    while (lower_gamma_regularized(shape, hi) < p) {
        hi *= 2.0;
        if (hi > 1e300) throw std::runtime_error("gamma_quantile: bracket expansion failed");
    }
    for (int i = 0; i < 400 && (hi - lo) > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (lower_gamma_regularized(shape, mid) < p ? lo : hi) = mid;
    }
    return scale * 0.5 * (lo + hi);
}

inline double chi_squared_quantile(int dof, double p) {
    if (dof < 1) throw std::invalid_argument("chi_squared_quantile: dof must be >= 1");
    return gamma_quantile(0.5 * dof, 2.0, p);
}

/// Kolmogorov-Smirnov distance between the empirical distribution of the
/// sample and the standard normal.
inline double ks_distance_normal(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("ks_distance_normal: empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double cdf = normal_cdf(xs[i]);
        d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - cdf,
                                 cdf - static_cast<double>(i) / n));
    }
    return d;
}

}  // namespace spenet
