#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spenet/estimators.hpp"
#include "spenet/matrix.hpp"
#include "spenet/models.hpp"
#include "spenet/parallel.hpp"
#include "spenet/rng.hpp"
#include "spenet/special.hpp"
#include "spenet/teststat.hpp"

namespace spenet {

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::Sbm;
    int communities = 2;
    double mnbs_c = kDefaultMnbsC;
    double delta = 0.0;  // 0 resolves to 1/(m n) per group
    double sigma_min = kDefaultSigmaMin;
};

struct TestConfig {
    double alpha = 0.05;
    int q = 1000;
    EstimatorConfig estimator;
    bool weighted = false;
    std::uint64_t seed = 0;
    double u_min = 0.1;
};

struct TestResult {
    double rejection_rate = 0.0;
    std::vector<double> theta_samples;
    double mean_theta = 0.0;
    // Normal (or gamma) reference on the iteration-averaged statistic; the
    // null law of that average is not pinned down, so this is advisory and
    // the rejection rate is the primary decision output.
    double approx_p_value = 1.0;
    double critical_value = 0.0;
    int n = 0;
    std::vector<int> sample_sizes;
    bool weighted = false;
    TestConfig config;
    std::optional<GammaApproxParams> gamma;
    double elapsed_seconds = 0.0;
};

namespace detail {

// Stream purposes under one master seed.
constexpr std::uint64_t kStreamEstimator = 1;
constexpr std::uint64_t kStreamIterationB = 2;
constexpr std::uint64_t kStreamReplicateData = 3;
constexpr std::uint64_t kStreamReplicateB = 4;
constexpr std::uint64_t kStreamReplicateEstimator = 5;
constexpr std::uint64_t kStreamModel = 6;

inline double resolve_delta(const EstimatorConfig& cfg, int m, int n) {
    return cfg.delta > 0.0 ? cfg.delta : default_clamp_delta(m, n);
}

inline LinkProbEstimate run_link_estimator(const NetworkGroup& group, const EstimatorConfig& cfg,
                                           RngStream&& rng) {
    const double delta = resolve_delta(cfg, group.size(), group.node_count());
    switch (cfg.kind) {
        case EstimatorKind::Avg: return estimate_avg(group, delta);
        case EstimatorKind::Sbm: return estimate_sbm(group, cfg.communities, delta, rng);
        case EstimatorKind::Mnbs: return estimate_mnbs(group, cfg.mnbs_c, delta);
    }
    throw std::logic_error("unreachable");
}

inline VarianceEstimate run_variance_estimator(const NetworkGroup& group,
                                               const EstimatorConfig& cfg, RngStream&& rng) {
    switch (cfg.kind) {
        case EstimatorKind::Avg: return estimate_var_avg(group, cfg.sigma_min);
        case EstimatorKind::Sbm: return estimate_var_sbm(group, cfg.communities, cfg.sigma_min, rng);
        case EstimatorKind::Mnbs:
            throw std::invalid_argument("mnbs has no variance form; use avg or sbm for weighted groups");
    }
    throw std::logic_error("unreachable");
}

inline void check_groups(const NetworkGroup& g1, const NetworkGroup& g2, const TestConfig& cfg) {
    g1.validate();
    g2.validate();
    if (g1.node_count() != g2.node_count())
        throw std::invalid_argument("two-sample test: node count mismatch between groups");
    if (cfg.weighted != g1.weighted || cfg.weighted != g2.weighted)
        throw std::invalid_argument(cfg.weighted
                                        ? "weighted test requires weighted groups"
                                        : "binary test requires binary groups");
}

inline double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

inline double variance_of(const std::vector<double>& xs) {
    const double mean = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size() - 1);
}

}  // namespace detail

/// Two-sample Monte Carlo test. The sample means and the plug-in estimates
/// are computed once; only the random diagonal varies across the Q
/// iterations, each on its own (seed, iteration) stream so the loop
/// parallelizes without changing the result.
inline TestResult run_two_sample_test(const NetworkGroup& g1, const NetworkGroup& g2,
                                      const TestConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    detail::check_groups(g1, g2, cfg);
    if (cfg.q < 1) throw std::invalid_argument("two-sample test: Q must be >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("two-sample test: alpha must be in (0,1)");

    const int n = g1.node_count();
    const int m1 = g1.size(), m2 = g2.size();
    const SymMatrix abar1 = sample_mean(g1);
    const SymMatrix abar2 = sample_mean(g2);

    std::optional<LinkProbEstimate> phat1, phat2;
    std::optional<VarianceEstimate> shat1, shat2;
    if (cfg.weighted) {
        shat1 = detail::run_variance_estimator(g1, cfg.estimator,
                                               RngStream(cfg.seed, substream(detail::kStreamEstimator, 0)));
        shat2 = detail::run_variance_estimator(g2, cfg.estimator,
                                               RngStream(cfg.seed, substream(detail::kStreamEstimator, 1)));
    } else {
        phat1 = detail::run_link_estimator(g1, cfg.estimator,
                                           RngStream(cfg.seed, substream(detail::kStreamEstimator, 0)));
        phat2 = detail::run_link_estimator(g2, cfg.estimator,
                                           RngStream(cfg.seed, substream(detail::kStreamEstimator, 1)));
    }

    TestResult result;
    result.theta_samples.resize(static_cast<std::size_t>(cfg.q));
    parallel_for(static_cast<std::size_t>(cfg.q), [&](std::size_t q) {
        RngStream rng(cfg.seed, substream(detail::kStreamIterationB, q));
        const DiagonalB b = sample_b(n, rng);
        const SymMatrix z = cfg.weighted
                                ? build_z_weighted(abar1, abar2, *shat1, *shat2, m1, m2, b)
                                : build_z_plugin_binary(abar1, abar2, *phat1, *phat2, m1, m2, b);
        result.theta_samples[q] = theta(z);
    });

    const double crit = normal_quantile(1.0 - cfg.alpha / 2.0);
    int rejections = 0;
    for (double t : result.theta_samples)
        if (std::abs(t) > crit) ++rejections;

    result.rejection_rate = static_cast<double>(rejections) / cfg.q;
    result.mean_theta = detail::mean_of(result.theta_samples);
    result.approx_p_value = 2.0 * (1.0 - normal_cdf(std::abs(result.mean_theta)));
    result.critical_value = crit;
    result.n = n;
    result.sample_sizes = {m1, m2};
    result.weighted = cfg.weighted;
    result.config = cfg;
    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

/// Multi-sample test: one shared random diagonal per iteration feeds all S
/// group-vs-pooled statistics, their squared sum is referred to a gamma law
/// whose scale comes from the pairwise correlations of the squared
/// statistics, estimated across the same Q iterations.
inline TestResult run_multisample_test(const std::vector<NetworkGroup>& groups,
                                       const TestConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    const int s_count = static_cast<int>(groups.size());
    if (s_count < 2) throw std::invalid_argument("multisample test: need at least two groups");
    if (cfg.q < 2) throw std::invalid_argument("correlation estimation needs Q >= 2");
    if (cfg.weighted) throw std::invalid_argument("multisample test supports binary groups");
    for (const NetworkGroup& g : groups) {
        g.validate();
        if (g.weighted) throw std::invalid_argument("multisample test supports binary groups");
    }
    const int n = groups.front().node_count();
    for (const NetworkGroup& g : groups)
        if (g.node_count() != n) throw std::invalid_argument("multisample test: node count mismatch");

    std::vector<int> m_per_group(groups.size());
    std::vector<SymMatrix> abar_s(groups.size());
    double total_m = 0.0;
    for (std::size_t s = 0; s < groups.size(); ++s) {
        m_per_group[s] = groups[s].size();
        abar_s[s] = sample_mean(groups[s]);
        total_m += m_per_group[s];
    }
    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t s = 0; s < groups.size(); ++s)
        pooled += m_per_group[s] * abar_s[s].dense();
    const SymMatrix abar = SymMatrix::from_dense_unchecked(pooled / total_m);

    std::vector<LinkProbEstimate> phat;
    phat.reserve(groups.size());
    for (std::size_t s = 0; s < groups.size(); ++s)
        phat.push_back(detail::run_link_estimator(
            groups[s], cfg.estimator, RngStream(cfg.seed, substream(detail::kStreamEstimator, s))));

    // theta_by_group[s][q]
    std::vector<std::vector<double>> theta_by_group(
        groups.size(), std::vector<double>(static_cast<std::size_t>(cfg.q)));
    parallel_for(static_cast<std::size_t>(cfg.q), [&](std::size_t q) {
        RngStream rng(cfg.seed, substream(detail::kStreamIterationB, q));
        const DiagonalB b = sample_b(n, rng);
        for (std::size_t s = 0; s < groups.size(); ++s) {
            const SymMatrix z = build_z_multisample(abar_s[s], abar, phat, m_per_group,
                                                    static_cast<int>(s), b);
            theta_by_group[s][q] = theta(z);
        }
    });

    // Sample correlation of the squared statistics across iterations;
    // degenerate spreads count as zero correlation.
    Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(s_count, s_count);
    std::vector<std::vector<double>> squared(groups.size(),
                                             std::vector<double>(static_cast<std::size_t>(cfg.q)));
    for (std::size_t s = 0; s < groups.size(); ++s)
        for (int q = 0; q < cfg.q; ++q)
            squared[s][static_cast<std::size_t>(q)] =
                theta_by_group[s][static_cast<std::size_t>(q)] *
                theta_by_group[s][static_cast<std::size_t>(q)];
    std::vector<double> sq_mean(groups.size());
    for (std::size_t s = 0; s < groups.size(); ++s) sq_mean[s] = detail::mean_of(squared[s]);
    for (int qi = 0; qi < s_count; ++qi) {
        for (int ri = qi + 1; ri < s_count; ++ri) {
            double cov = 0.0, var_q = 0.0, var_r = 0.0;
            for (int it = 0; it < cfg.q; ++it) {
                const double dq = squared[static_cast<std::size_t>(qi)][static_cast<std::size_t>(it)] -
                                  sq_mean[static_cast<std::size_t>(qi)];
                const double dr = squared[static_cast<std::size_t>(ri)][static_cast<std::size_t>(it)] -
                                  sq_mean[static_cast<std::size_t>(ri)];
                cov += dq * dr;
                var_q += dq * dq;
                var_r += dr * dr;
            }
            const double denom = std::sqrt(var_q * var_r);
            const double c = denom > 0.0 ? cov / denom : 0.0;
            rho(qi, ri) = c;
            rho(ri, qi) = c;
        }
    }

    TestResult result;
    result.theta_samples.resize(static_cast<std::size_t>(cfg.q));
    GammaApproxParams params;
    for (int q = 0; q < cfg.q; ++q) {
        std::vector<double> thetas(groups.size());
        for (std::size_t s = 0; s < groups.size(); ++s)
            thetas[s] = theta_by_group[s][static_cast<std::size_t>(q)];
        MultisampleStatistic stat = multisample_statistic(thetas, rho, cfg.u_min);
        result.theta_samples[static_cast<std::size_t>(q)] = stat.value;
        params = std::move(stat.params);
    }
    const double crit = gamma_quantile(params.shape(), params.u, 1.0 - cfg.alpha);
    int rejections = 0;
    for (double v : result.theta_samples)
        if (v > crit) ++rejections;

    result.rejection_rate = static_cast<double>(rejections) / cfg.q;
    result.mean_theta = detail::mean_of(result.theta_samples);
    result.approx_p_value =
        upper_gamma_regularized(params.shape(), result.mean_theta / params.u);
    result.critical_value = crit;
    result.n = n;
    result.sample_sizes = m_per_group;
    result.weighted = false;
    result.config = cfg;
    result.gamma = std::move(params);
    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

struct CalibrationSummary {
    std::vector<double> thetas;
    double mean = 0.0;
    double variance = 0.0;
    double ks_distance = 0.0;
    double rejection_rate = 0.0;
};

/// Draws fresh group pairs from a common link-probability model and collects
/// one statistic per replicate: the oracle variant plugs the true P into the
/// denominator, otherwise the configured estimator is used. The summary is
/// the empirical check that the null statistic looks standard normal.
inline CalibrationSummary null_calibration(const std::function<SymMatrix(RngStream&)>& prob_model,
                                           int m, int replicates, const TestConfig& cfg,
                                           bool oracle) {
    if (replicates < 100) throw std::invalid_argument("null_calibration: replicates must be >= 100");
    if (m < 1) throw std::invalid_argument("null_calibration: m must be >= 1");

    CalibrationSummary summary;
    summary.thetas.resize(static_cast<std::size_t>(replicates));
    parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t rep) {
        RngStream model_rng(cfg.seed, substream(detail::kStreamModel, rep));
        const SymMatrix p = prob_model(model_rng);
        const int n = p.n();
        RngStream data_rng(cfg.seed, substream(detail::kStreamReplicateData, rep));
        const NetworkGroup g1 = sample_binary_group(p, m, data_rng);
        const NetworkGroup g2 = sample_binary_group(p, m, data_rng);
        const SymMatrix abar1 = sample_mean(g1);
        const SymMatrix abar2 = sample_mean(g2);
        RngStream b_rng(cfg.seed, substream(detail::kStreamReplicateB, rep));
        const DiagonalB b = sample_b(n, b_rng);
        SymMatrix z;
        if (oracle) {
            z = build_z_oracle_binary(abar1, abar2, p, p, m, m, b);
        } else {
            const LinkProbEstimate phat1 = detail::run_link_estimator(
                g1, cfg.estimator,
                RngStream(cfg.seed, substream(detail::kStreamReplicateEstimator, 2 * rep)));
            const LinkProbEstimate phat2 = detail::run_link_estimator(
                g2, cfg.estimator,
                RngStream(cfg.seed, substream(detail::kStreamReplicateEstimator, 2 * rep + 1)));
            z = build_z_plugin_binary(abar1, abar2, phat1, phat2, m, m, b);
        }
        summary.thetas[rep] = theta(z);
    });

    summary.mean = detail::mean_of(summary.thetas);
    summary.variance = detail::variance_of(summary.thetas);
    summary.ks_distance = ks_distance_normal(summary.thetas);
    const double crit = normal_quantile(1.0 - cfg.alpha / 2.0);
    int rejections = 0;
    for (double t : summary.thetas)
        if (std::abs(t) > crit) ++rejections;
    summary.rejection_rate = static_cast<double>(rejections) / replicates;
    return summary;
}

}  // namespace spenet
