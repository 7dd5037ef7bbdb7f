#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "spenet/matrix.hpp"
#include "spenet/rng.hpp"

namespace spenet {

enum class EstimatorKind { Avg, Sbm, Mnbs };

inline const char* to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Avg: return "avg";
        case EstimatorKind::Sbm: return "sbm";
        case EstimatorKind::Mnbs: return "mnbs";
    }
    return "?";
}

inline EstimatorKind estimator_from_string(const std::string& name) {
    if (name == "avg") return EstimatorKind::Avg;
    if (name == "sbm") return EstimatorKind::Sbm;
    if (name == "mnbs") return EstimatorKind::Mnbs;
    throw std::invalid_argument("unknown estimator: " + name);
}

/// Link-probability estimate with entries clamped to [delta, 1 - delta] so
/// the plug-in denominators never vanish.
struct LinkProbEstimate {
    SymMatrix matrix;
    EstimatorKind method = EstimatorKind::Avg;
    double delta = 0.0;
    int communities = 0;    // SBM only
    double quantile_c = 0.0;  // MNBS only
};

/// Elementwise variance estimate floored at sigma_min > 0.
struct VarianceEstimate {
    SymMatrix matrix;
    EstimatorKind method = EstimatorKind::Avg;
    double sigma_min = 0.0;
    int communities = 0;
};

struct CommunityAssignment {
    std::vector<int> labels;  // 1-based, in {1..k}
    int k = 0;
};

/// Default clamp: vanishes as the sample grows, stays safely positive.
inline double default_clamp_delta(int m, int n) {
    return 1.0 / (static_cast<double>(m) * static_cast<double>(n));
}

constexpr double kDefaultSigmaMin = 1e-6;
constexpr double kDefaultMnbsC = 1.0;

namespace detail {

inline void require_binary_group(const NetworkGroup& group, const char* who) {
    if (group.nets.empty()) throw std::invalid_argument(std::string(who) + ": empty sample");
    if (group.weighted) throw std::invalid_argument(std::string(who) + ": binary estimator on weighted group");
    group.validate();
}

inline SymMatrix clamp_probabilities(const Eigen::MatrixXd& m, double lo, double hi) {
    return SymMatrix::from_dense_unchecked(m.cwiseMax(lo).cwiseMin(hi));
}

// Lloyd iterations from a k-means++ seeding. Returns false when any cluster
// ends up empty (the caller retries with a fresh seeding).
inline bool kmeans_once(const Eigen::MatrixXd& points, int k, RngStream& rng,
                        std::vector<int>& labels, double& objective) {
    const int n = static_cast<int>(points.rows());
    constexpr int max_iter = 100;

    // k-means++ seeding: first center uniform, the rest D^2-weighted.
    Eigen::MatrixXd centers(k, points.cols());
    centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    Eigen::VectorXd dist2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = dist2.sum();
        int pick = 0;
        if (total > 0.0) {
            double target = rng.uniform01() * total;
            for (int i = 0; i < n; ++i) {
                target -= dist2(i);
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
                pick = i;
            }
        } else {
            pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centers.row(c) = points.row(pick);
        dist2 = dist2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    labels.assign(static_cast<std::size_t>(n), 0);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (points.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d = (points.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {  // ties keep the lowest cluster index
                    best_d = d;
                    best = c;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
            ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }

    std::fill(counts.begin(), counts.end(), 0);
    objective = 0.0;
    for (int i = 0; i < n; ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        ++counts[static_cast<std::size_t>(c)];
        objective += (points.row(i) - centers.row(c)).squaredNorm();
    }
    return std::all_of(counts.begin(), counts.end(), [](int c) { return c > 0; });
}

}  // namespace detail

/// Entrywise sample-proportion estimate of the link probabilities.
inline LinkProbEstimate estimate_avg(const NetworkGroup& group, double delta) {
    detail::require_binary_group(group, "estimate_avg");
    const SymMatrix mean = sample_mean(group);
    LinkProbEstimate est;
    est.matrix = detail::clamp_probabilities(mean.dense(), delta, 1.0 - delta);
    est.method = EstimatorKind::Avg;
    est.delta = delta;
    return est;
}

/// Spectral clustering of the mean adjacency matrix.
///
/// Normalized-adjacency embedding: D^{-1/2} A D^{-1/2} with a ridge
/// tau = mean degree / n added to the degree diagonal so isolated nodes do
/// not produce zero pivots. The embedding keeps the k eigenvectors of
/// largest-magnitude eigenvalue: block structure shows up at the spectrum's
/// extremes, with disassortative blocks (between-community weights above
/// within-community ones) landing at the negative end. Rows are normalized
/// to unit length and clustered with k-means (k-means++ seeding, 10
/// restarts, 100-iteration cap, squared-Euclidean objective). The winning
/// restart is the smallest objective, ties to the lowest restart index. A
/// restart whose final assignment leaves a community empty is discarded;
/// after 20 extra reseedings the input is reported as degenerate.
inline CommunityAssignment spectral_cluster(const SymMatrix& mean_adj, int k, RngStream& rng) {
    const int n = mean_adj.n();
    if (k < 1 || k > n) throw std::invalid_argument("spectral_cluster: k must be in [1, n]");
    CommunityAssignment out;
    out.k = k;
    if (k == 1) {
        out.labels.assign(static_cast<std::size_t>(n), 1);
        return out;
    }

    const Eigen::MatrixXd& a = mean_adj.dense();
    Eigen::VectorXd degree = a.rowwise().sum();
    const double ridge = degree.mean() / static_cast<double>(n);
    degree.array() += ridge;
    if ((degree.array() <= 0.0).any())
        throw std::runtime_error("spectral_cluster: degenerate clustering");
    const Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
    const Eigen::MatrixXd lsym = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lsym);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectral_cluster: eigendecomposition failed");
    // Eigenvalues come out ascending; pick the k of largest magnitude from
    // the two ends, ties to the positive end.
    Eigen::MatrixXd embedding(n, k);
    {
        int lo = 0, hi = n - 1;
        for (int c = 0; c < k; ++c) {
            const bool take_hi =
                std::abs(solver.eigenvalues()(hi)) >= std::abs(solver.eigenvalues()(lo));
            embedding.col(c) = solver.eigenvectors().col(take_hi ? hi : lo);
            take_hi ? --hi : ++lo;
        }
    }
    for (int i = 0; i < n; ++i) {
        const double norm = embedding.row(i).norm();
        if (norm > 0.0) embedding.row(i) /= norm;
    }

    constexpr int restarts = 10;
    constexpr int extra_retries = 20;
    std::vector<int> labels, best_labels;
    double best_objective = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int r = 0; r < restarts + extra_retries; ++r) {
        double objective = 0.0;
        if (!detail::kmeans_once(embedding, k, rng, labels, objective)) continue;
        if (objective < best_objective) {
            best_objective = objective;
            best_labels = labels;
            found = true;
        }
        if (found && r + 1 >= restarts) break;
    }
    if (!found) throw std::runtime_error("spectral_cluster: degenerate clustering");

    out.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.labels[static_cast<std::size_t>(i)] = best_labels[static_cast<std::size_t>(i)] + 1;
    return out;
}

namespace detail {

// Per-block mean of the off-diagonal entries of abar given an assignment.
// Empty blocks (possible with singleton communities) fall back to the global
// off-diagonal mean.
inline Eigen::MatrixXd block_means(const SymMatrix& abar, const CommunityAssignment& comm) {
    const int n = abar.n();
    const int k = comm.k;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
    double global_sum = 0.0, global_count = 0.0;
    for (int i = 0; i < n; ++i) {
        const int ci = comm.labels[static_cast<std::size_t>(i)] - 1;
        for (int j = i + 1; j < n; ++j) {
            const int cj = comm.labels[static_cast<std::size_t>(j)] - 1;
            const double v = abar(i, j);
            sums(ci, cj) += v;
            counts(ci, cj) += 1.0;
            if (ci != cj) {
                sums(cj, ci) += v;
                counts(cj, ci) += 1.0;
            }
            global_sum += v;
            global_count += 1.0;
        }
    }
    const double global_mean = global_count > 0.0 ? global_sum / global_count : 0.0;
    Eigen::MatrixXd means(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            means(a, b) = counts(a, b) > 0.0 ? sums(a, b) / counts(a, b) : global_mean;
    return means;
}

}  // namespace detail

/// Block-constant estimate: cluster the mean adjacency, then average it over
/// each community block. Diagonal entries of the mean are structural zeros,
/// not samples, so block averages exclude them.
inline LinkProbEstimate estimate_sbm(const NetworkGroup& group, int k, double delta, RngStream& rng) {
    detail::require_binary_group(group, "estimate_sbm");
    const SymMatrix abar = sample_mean(group);
    const CommunityAssignment comm = spectral_cluster(abar, k, rng);
    const Eigen::MatrixXd means = detail::block_means(abar, comm);

    const int n = abar.n();
    SymMatrix p(n);
    for (int i = 0; i < n; ++i) {
        const int ci = comm.labels[static_cast<std::size_t>(i)] - 1;
        for (int j = i; j < n; ++j) {
            const int cj = comm.labels[static_cast<std::size_t>(j)] - 1;
            p.set(i, j, std::clamp(means(ci, cj), delta, 1.0 - delta));
        }
    }
    LinkProbEstimate est;
    est.matrix = std::move(p);
    est.method = EstimatorKind::Sbm;
    est.delta = delta;
    est.communities = k;
    return est;
}

/// Row distances driving the neighborhood smoother:
///   d(i,i') = max_{k != i,i'} |(Abar^2)_ik - (Abar^2)_i'k| / n ,
/// zero on the diagonal (and zero when n = 2 leaves no witness index).
inline Eigen::MatrixXd mnbs_distances(const SymMatrix& abar) {
    const int n = abar.n();
    const Eigen::MatrixXd sq = abar.dense() * abar.dense();
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int ip = i + 1; ip < n; ++ip) {
            double worst = 0.0;
            for (int k = 0; k < n; ++k) {
                if (k == i || k == ip) continue;
                worst = std::max(worst, std::abs(sq(i, k) - sq(ip, k)));
            }
            dist(i, ip) = worst / static_cast<double>(n);
            dist(ip, i) = dist(i, ip);
        }
    }
    return dist;
}

/// Neighborhood smoothing of the mean adjacency with a shrunken
/// neighborhood.
///
/// N_i = { i' != i : d(i,i') <= q_i(h) } where q_i(h) is the empirical
/// h-quantile of {d(i,i')} (order statistic of rank ceil(h (n-1)), never
/// below 1 so the nearest row always qualifies) and h = C sqrt(log n / (n m));
/// then Ptilde_ij = mean_{i' in N_i} Abar_i'j and the estimate is the
/// clamped symmetrization (Ptilde + Ptilde^T) / 2.
inline LinkProbEstimate estimate_mnbs(const NetworkGroup& group, double quantile_c, double delta) {
    detail::require_binary_group(group, "estimate_mnbs");
    const SymMatrix abar = sample_mean(group);
    const int n = abar.n();
    const int m = group.size();
    const Eigen::MatrixXd& a = abar.dense();

    if (n == 1) {
        LinkProbEstimate est;
        est.matrix = detail::clamp_probabilities(a, delta, 1.0 - delta);
        est.method = EstimatorKind::Mnbs;
        est.delta = delta;
        est.quantile_c = quantile_c;
        return est;
    }

    const Eigen::MatrixXd dist = mnbs_distances(abar);
    const double h = quantile_c * std::sqrt(std::log(static_cast<double>(n)) /
                                            (static_cast<double>(n) * static_cast<double>(m)));

    Eigen::MatrixXd smoothed(n, n);
    std::vector<double> sorted;
    for (int i = 0; i < n; ++i) {
        sorted.clear();
        for (int ip = 0; ip < n; ++ip)
            if (ip != i) sorted.push_back(dist(i, ip));
        std::sort(sorted.begin(), sorted.end());
        const int rank = std::clamp(static_cast<int>(std::ceil(h * static_cast<double>(n - 1))), 1, n - 1);
        const double cutoff = sorted[static_cast<std::size_t>(rank - 1)];

        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(n);
        int members = 0;
        for (int ip = 0; ip < n; ++ip) {
            if (ip == i) continue;
            if (dist(i, ip) <= cutoff) {
                acc += a.row(ip);
                ++members;
            }
        }
        if (members == 0) {  // fall back to the row itself
            acc = a.row(i);
            members = 1;
        }
        smoothed.row(i) = acc / static_cast<double>(members);
    }

    const Eigen::MatrixXd sym = 0.5 * (smoothed + smoothed.transpose());
    LinkProbEstimate est;
    est.matrix = detail::clamp_probabilities(sym, delta, 1.0 - delta);
    est.method = EstimatorKind::Mnbs;
    est.delta = delta;
    est.quantile_c = quantile_c;
    return est;
}

/// Entrywise unbiased sample variance over the group, floored at sigma_min.
inline VarianceEstimate estimate_var_avg(const NetworkGroup& group, double sigma_min) {
    if (group.nets.empty()) throw std::invalid_argument("estimate_var_avg: empty sample");
    if (group.size() < 2) throw std::invalid_argument("need at least two networks");
    group.validate();
    const int n = group.node_count();
    const int m = group.size();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n, n);
    for (const SymMatrix& net : group.nets) {
        sum += net.dense();
        sum_sq += net.dense().cwiseProduct(net.dense());
    }
    const Eigen::MatrixXd var =
        (sum_sq - sum.cwiseProduct(sum) / static_cast<double>(m)) / static_cast<double>(m - 1);
    VarianceEstimate est;
    est.matrix = SymMatrix::from_dense_unchecked(var.cwiseMax(sigma_min));
    est.method = EstimatorKind::Avg;
    est.sigma_min = sigma_min;
    return est;
}

/// Block-pooled variance: cluster the mean adjacency, then pool every
/// (entry, network) observation within a block and assign the pooled sample
/// variance to the whole block. Blocks without off-diagonal entries fall
/// back to the globally pooled variance.
inline VarianceEstimate estimate_var_sbm(const NetworkGroup& group, int k, double sigma_min,
                                         RngStream& rng) {
    if (group.nets.empty()) throw std::invalid_argument("estimate_var_sbm: empty sample");
    if (group.size() < 2) throw std::invalid_argument("need at least two networks");
    group.validate();
    const SymMatrix abar = sample_mean(group);
    const CommunityAssignment comm = spectral_cluster(abar, k, rng);
    const int n = abar.n();

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd count = Eigen::MatrixXd::Zero(k, k);
    for (const SymMatrix& net : group.nets) {
        for (int i = 0; i < n; ++i) {
            const int ci = comm.labels[static_cast<std::size_t>(i)] - 1;
            for (int j = i + 1; j < n; ++j) {
                const int cj = comm.labels[static_cast<std::size_t>(j)] - 1;
                const double v = net(i, j);
                const int a = std::min(ci, cj), b = std::max(ci, cj);
                sum(a, b) += v;
                sum_sq(a, b) += v * v;
                count(a, b) += 1.0;
            }
        }
    }
    const double total_count = count.sum();
    const double total_sum = sum.sum();
    const double total_sq = sum_sq.sum();
    const double global_var =
        total_count > 1.0 ? (total_sq - total_sum * total_sum / total_count) / (total_count - 1.0)
                          : 0.0;
    Eigen::MatrixXd block_var(k, k);
    for (int a = 0; a < k; ++a) {
        for (int b = a; b < k; ++b) {
            const double c = count(a, b);
            block_var(a, b) = c > 1.0 ? (sum_sq(a, b) - sum(a, b) * sum(a, b) / c) / (c - 1.0)
                                      : global_var;
            block_var(b, a) = block_var(a, b);
        }
    }

    SymMatrix est_matrix(n);
    for (int i = 0; i < n; ++i) {
        const int ci = comm.labels[static_cast<std::size_t>(i)] - 1;
        for (int j = i; j < n; ++j) {
            const int cj = comm.labels[static_cast<std::size_t>(j)] - 1;
            est_matrix.set(i, j, std::max(block_var(ci, cj), sigma_min));
        }
    }
    VarianceEstimate est;
    est.matrix = std::move(est_matrix);
    est.method = EstimatorKind::Sbm;
    est.sigma_min = sigma_min;
    est.communities = k;
    return est;
}

}  // namespace spenet
