#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spenet/estimators.hpp"
#include "spenet/matrix.hpp"
#include "spenet/rng.hpp"

namespace spenet {

/// Random diagonal: independent signs, realized values +-  1/sqrt(n).
struct DiagonalB {
    int n = 0;
    std::vector<std::int8_t> signs;

    double value(int i) const {
        return static_cast<double>(signs[static_cast<std::size_t>(i)]) /
               std::sqrt(static_cast<double>(n));
    }
};

inline DiagonalB sample_b(int n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("sample_b: n must be >= 1");
    DiagonalB b;
    b.n = n;
    b.signs.resize(static_cast<std::size_t>(n));
    for (auto& s : b.signs) s = rng.bernoulli(0.5) ? std::int8_t{1} : std::int8_t{-1};
    return b;
}

namespace detail {

// Shared core of every two-sample Z: off-diagonal entries are the mean
// difference scaled by sqrt(n * per-entry variance of the difference), the
// diagonal is the random B.
template <typename VarianceAt>
SymMatrix build_z(const SymMatrix& abar1, const SymMatrix& abar2, int n, const DiagonalB& b,
                  VarianceAt&& variance_at, const char* degenerate_message) {
    if (abar1.n() != n || abar2.n() != n || b.n != n)
        throw std::invalid_argument("build_z: dimension mismatch");
    SymMatrix z(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = variance_at(i, j);
            if (!(v > 0.0)) throw std::runtime_error(degenerate_message);
            z.set(i, j, (abar1(i, j) - abar2(i, j)) / std::sqrt(static_cast<double>(n) * v));
        }
        z.set(i, i, b.value(i));
    }
    return z;
}

}  // namespace detail

/// Z with known link-probability matrices (Bernoulli variance in the
/// denominator). Off-diagonal P entries must lie strictly inside (0,1).
inline SymMatrix build_z_oracle_binary(const SymMatrix& abar1, const SymMatrix& abar2,
                                       const SymMatrix& p1, const SymMatrix& p2, int m1, int m2,
                                       const DiagonalB& b) {
    const int n = abar1.n();
    if (p1.n() != n || p2.n() != n) throw std::invalid_argument("build_z: dimension mismatch");
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("build_z: sample sizes must be >= 1");
    return detail::build_z(abar1, abar2, n, b,
                           [&](int i, int j) {
                               return p1(i, j) * (1.0 - p1(i, j)) / m1 +
                                      p2(i, j) * (1.0 - p2(i, j)) / m2;
                           },
                           "degenerate link probability");
}

/// Plug-in Z: same formula with estimated link probabilities; their clamp
/// keeps the denominator positive.
inline SymMatrix build_z_plugin_binary(const SymMatrix& abar1, const SymMatrix& abar2,
                                       const LinkProbEstimate& p1, const LinkProbEstimate& p2,
                                       int m1, int m2, const DiagonalB& b) {
    return build_z_oracle_binary(abar1, abar2, p1.matrix, p2.matrix, m1, m2, b);
}

/// Weighted-network Z: estimated elementwise variances in the denominator.
inline SymMatrix build_z_weighted(const SymMatrix& abar1, const SymMatrix& abar2,
                                  const VarianceEstimate& s1, const VarianceEstimate& s2, int m1,
                                  int m2, const DiagonalB& b) {
    const int n = abar1.n();
    if (s1.matrix.n() != n || s2.matrix.n() != n)
        throw std::invalid_argument("build_z: dimension mismatch");
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("build_z: sample sizes must be >= 1");
    return detail::build_z(abar1, abar2, n, b,
                           [&](int i, int j) {
                               return s1.matrix(i, j) / m1 + s2.matrix(i, j) / m2;
                           },
                           "degenerate weight variance");
}

/// theta = Tr(Z^3) / sqrt(15); standard normal in the null limit.
inline double theta(const SymMatrix& z) {
    const double value = trace_cubed(z) / std::sqrt(15.0);
    if (!std::isfinite(value)) throw std::runtime_error("theta: non-finite statistic");
    return value;
}

/// Group-vs-pooled Z for the multi-sample (ANOVA-style) test. With
/// vhat_s = Phat_s (1 - Phat_s), the per-entry deflator is the exact
/// variance of (Abar_s - Abar):
///   (1/m_s - 2/m) vhat_s + (1/m^2) sum_{s'} m_{s'} vhat_{s'} .
inline SymMatrix build_z_multisample(const SymMatrix& abar_s, const SymMatrix& abar,
                                     const std::vector<LinkProbEstimate>& phat,
                                     const std::vector<int>& m_per_group, int group_index,
                                     const DiagonalB& b) {
    const int n = abar_s.n();
    const std::size_t groups = phat.size();
    if (m_per_group.size() != groups || groups < 2)
        throw std::invalid_argument("build_z_multisample: need one sample size per group");
    if (group_index < 0 || static_cast<std::size_t>(group_index) >= groups)
        throw std::invalid_argument("build_z_multisample: group index out of range");
    for (const LinkProbEstimate& e : phat)
        if (e.matrix.n() != n) throw std::invalid_argument("build_z_multisample: dimension mismatch");

    double total = 0.0;
    for (int m_s : m_per_group) {
        if (m_s < 1) throw std::invalid_argument("build_z_multisample: sample sizes must be >= 1");
        total += static_cast<double>(m_s);
    }
    const double m_own = static_cast<double>(m_per_group[static_cast<std::size_t>(group_index)]);
    const SymMatrix& p_own = phat[static_cast<std::size_t>(group_index)].matrix;

    return detail::build_z(abar_s, abar, n, b,
                           [&](int i, int j) {
                               const double v_own = p_own(i, j) * (1.0 - p_own(i, j));
                               double pooled = 0.0;
                               for (std::size_t s = 0; s < groups; ++s) {
                                   const double p = phat[s].matrix(i, j);
                                   pooled += static_cast<double>(m_per_group[s]) * p * (1.0 - p);
                               }
                               return (1.0 / m_own - 2.0 / total) * v_own +
                                      pooled / (total * total);
                           },
                           "degenerate multisample variance");
}

/// Gamma reference for the sum of the S dependent squared statistics:
/// Gamma(shape = S/u, scale = u).
struct GammaApproxParams {
    int groups = 0;
    double u = 2.0;
    Eigen::MatrixXd rho;  // pairwise correlations of the squared statistics

    double shape() const { return static_cast<double>(groups) / u; }
};

struct MultisampleStatistic {
    double value = 0.0;
    GammaApproxParams params;
};

/// Sum of squared per-group statistics plus its gamma reference. The scale
/// is u = 2 (1 + 2 sum_{q != r} rho_qr / S) with the sum over ordered pairs,
/// floored at u_min against pathological negative correlation estimates;
/// rho = 0 recovers chi-squared(S).
inline MultisampleStatistic multisample_statistic(const std::vector<double>& thetas,
                                                  Eigen::MatrixXd rho, double u_min = 0.1) {
    const int s_count = static_cast<int>(thetas.size());
    if (s_count < 2) throw std::invalid_argument("multisample_statistic: need at least two groups");
    if (rho.rows() != s_count || rho.cols() != s_count)
        throw std::invalid_argument("multisample_statistic: correlation matrix size mismatch");

    double value = 0.0;
    for (double t : thetas) value += t * t;

    double offdiag = 0.0;
    for (int q = 0; q < s_count; ++q)
        for (int r = 0; r < s_count; ++r)
            if (q != r) offdiag += rho(q, r);

    MultisampleStatistic out;
    out.value = value;
    out.params.groups = s_count;
    out.params.u = std::max(2.0 * (1.0 + 2.0 * offdiag / s_count), u_min);
    out.params.rho = std::move(rho);
    return out;
}

/// Diagnostic for the sufficient power conditions on the deterministic
/// signal matrix Z''.
///
/// All n^3 index triples (i,k,l) are partitioned by the sign of
/// Z''_ik Z''_kl Z''_li; a and b are the fractions of the two parts. The
/// min/max summaries of cubed entries range over the three entry positions
/// of every triple, skipping positions with coinciding indices (the diagonal
/// is structurally zero, not signal). Sets without any off-diagonal position
/// contribute zero to the condition sums and NaN summaries.
struct PowerConditionReport {
    double a = 0.0, b = 0.0;
    bool condition_i = false, condition_ii = false;
    double min_cubed_a = std::numeric_limits<double>::quiet_NaN();
    double max_cubed_a = std::numeric_limits<double>::quiet_NaN();
    double min_cubed_b = std::numeric_limits<double>::quiet_NaN();
    double max_cubed_b = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t triples_a = 0, triples_b = 0;
    SymMatrix zpp;
};

namespace detail {

inline PowerConditionReport power_condition_from_zpp(SymMatrix zpp) {
    const int n = zpp.n();
    PowerConditionReport rep;

    struct Extrema {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        bool any = false;
        void add(double v) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            any = true;
        }
    };
    Extrema ext_a, ext_b;

    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double z_ik = zpp(i, k);
            for (int l = 0; l < n; ++l) {
                const double product = z_ik * zpp(k, l) * zpp(l, i);
                Extrema& ext = product >= 0.0 ? ext_a : ext_b;
                (product >= 0.0 ? rep.triples_a : rep.triples_b) += 1;
                if (i != k) ext.add(z_ik);
                if (k != l) ext.add(zpp(k, l));
                if (l != i) ext.add(zpp(l, i));
            }
        }
    }

    const double total = static_cast<double>(n) * n * n;
    rep.a = static_cast<double>(rep.triples_a) / total;
    rep.b = static_cast<double>(rep.triples_b) / total;

    const auto cube = [](double v) { return v * v * v; };
    const double min_a = ext_a.any ? cube(ext_a.lo) : 0.0;
    const double max_a = ext_a.any ? cube(ext_a.hi) : 0.0;
    const double min_b = ext_b.any ? cube(ext_b.lo) : 0.0;
    const double max_b = ext_b.any ? cube(ext_b.hi) : 0.0;
    rep.condition_i = rep.a * min_a + rep.b * min_b > 0.0;
    rep.condition_ii = rep.a * max_a + rep.b * max_b < 0.0;
    if (ext_a.any) {
        rep.min_cubed_a = min_a;
        rep.max_cubed_a = max_a;
    }
    if (ext_b.any) {
        rep.min_cubed_b = min_b;
        rep.max_cubed_b = max_b;
    }
    rep.zpp = std::move(zpp);
    return rep;
}

}  // namespace detail

/// Binary variant. The common probability in the printed denominator is not
/// pinned down under the alternative; this diagnostic pools the two sides:
/// P = (m1 P1 + m2 P2) / (m1 + m2).
inline PowerConditionReport power_condition_check(const SymMatrix& p1, const SymMatrix& p2, int m1,
                                                  int m2) {
    const int n = p1.n();
    if (p2.n() != n) throw std::invalid_argument("power_condition_check: dimension mismatch");
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("power_condition_check: sample sizes must be >= 1");
    SymMatrix zpp(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double pooled = (m1 * p1(i, j) + m2 * p2(i, j)) / (m1 + m2);
            const double v = pooled * (1.0 - pooled) * (1.0 / m1 + 1.0 / m2);
            if (!(v > 0.0)) throw std::runtime_error("degenerate link probability");
            zpp.set(i, j, (p1(i, j) - p2(i, j)) / std::sqrt(static_cast<double>(n) * v));
        }
    }
    return detail::power_condition_from_zpp(std::move(zpp));
}

/// Weighted variant: per-entry variances in the denominator.
inline PowerConditionReport power_condition_check(const SymMatrix& p1, const SymMatrix& p2,
                                                  const SymMatrix& sigma1, const SymMatrix& sigma2,
                                                  int m1, int m2) {
    const int n = p1.n();
    if (p2.n() != n || sigma1.n() != n || sigma2.n() != n)
        throw std::invalid_argument("power_condition_check: dimension mismatch");
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("power_condition_check: sample sizes must be >= 1");
    SymMatrix zpp(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = sigma1(i, j) / m1 + sigma2(i, j) / m2;
            if (!(v > 0.0)) throw std::runtime_error("degenerate weight variance");
            zpp.set(i, j, (p1(i, j) - p2(i, j)) / std::sqrt(static_cast<double>(n) * v));
        }
    }
    return detail::power_condition_from_zpp(std::move(zpp));
}

}  // namespace spenet
