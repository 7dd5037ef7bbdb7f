#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spenet/matrix.hpp"
#include "spenet/rng.hpp"

namespace spenet {

/// Stochastic block model: link probability depends only on the community
/// labels of the endpoints. Labels are 1-based in {1..K}.
struct SbmSpec {
    int n = 0;
    std::vector<int> membership;
    SymMatrix block;
};

/// Two-community rule used by the binary benchmark model: the first third of
/// the nodes form community 1, the rest community 2.
inline std::vector<int> two_block_membership_thirds(int n) {
    std::vector<int> labels(static_cast<std::size_t>(n), 2);
    for (int i = 0; i < n / 3; ++i) labels[static_cast<std::size_t>(i)] = 1;
    return labels;
}

/// Two-community rule used by the weighted benchmark model: first half vs.
/// second half.
inline std::vector<int> two_block_membership_halves(int n) {
    std::vector<int> labels(static_cast<std::size_t>(n), 2);
    for (int i = 0; i < n / 2; ++i) labels[static_cast<std::size_t>(i)] = 1;
    return labels;
}

/// [[0.5 + within_shift, 0.25], [0.25, 0.5]]
inline SymMatrix two_block_matrix(double within_shift) {
    SymMatrix b(2);
    b.set(0, 0, 0.5 + within_shift);
    b.set(0, 1, 0.25);
    b.set(1, 1, 0.5);
    return b;
}

inline SymMatrix sbm_prob_matrix(const SbmSpec& spec) {
    const int k = spec.block.n();
    if (static_cast<int>(spec.membership.size()) != spec.n)
        throw std::invalid_argument("sbm_prob_matrix: membership length must equal n");
    for (int label : spec.membership)
        if (label < 1 || label > k) throw std::invalid_argument("sbm_prob_matrix: label out of range");
    SymMatrix p(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        const int ci = spec.membership[static_cast<std::size_t>(i)] - 1;
        for (int j = i; j < spec.n; ++j) {
            const int cj = spec.membership[static_cast<std::size_t>(j)] - 1;
            p.set(i, j, spec.block(ci, cj));
        }
    }
    return p;
}

/// Latent-position model: P_ij = f0(eta_i, eta_j) with eta in [0,1].
struct GraphonSpec {
    int n = 0;
    std::vector<double> latent;
    int graphon_id = 0;
};

inline double graphon_f0(double v1, double v2) {
    return (v1 * v1 + v2 * v2 + std::sqrt(v1) + std::sqrt(v2)) / 4.0;
}

inline std::vector<double> sample_latents(int n, RngStream& rng) {
    std::vector<double> eta(static_cast<std::size_t>(n));
    for (double& e : eta) e = rng.uniform01();
    return eta;
}

inline SymMatrix graphon_prob_matrix(const GraphonSpec& spec) {
    if (spec.graphon_id != 0) throw std::invalid_argument("graphon_prob_matrix: unknown graphon id");
    if (static_cast<int>(spec.latent.size()) != spec.n)
        throw std::invalid_argument("graphon_prob_matrix: latent length must equal n");
    for (double e : spec.latent)
        if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("graphon_prob_matrix: latent out of [0,1]");
    SymMatrix p(spec.n);
    for (int i = 0; i < spec.n; ++i)
        for (int j = i; j < spec.n; ++j)
            p.set(i, j, graphon_f0(spec.latent[static_cast<std::size_t>(i)],
                                   spec.latent[static_cast<std::size_t>(j)]));
    return p;
}

/// One parent graph plus per-network edge thinning; children share the
/// parent's edge set, so networks are marginally ER(n, p*eps) but correlated.
struct CorrErSpec {
    int n = 0;
    double p = 0.0;
    double eps = 0.0;
};

/// Two-community weighted model. Within-community weights are
/// Beta(within_a + shift, within_b + shift), between-community weights
/// Beta(between_a + shift, between_b + shift); membership is halves.
struct BetaWeightSpec {
    int n = 0;
    double within_a = 2.0, within_b = 8.0;
    double between_a = 4.0, between_b = 1.0;
    double shift = 0.0;
};

/// Symmetric 0/1 matrix with zero diagonal; independent Bernoulli(P_ij)
/// entries on the upper triangle, mirrored below.
inline SymMatrix sample_binary(const SymMatrix& p, RngStream& rng) {
    const int n = p.n();
    SymMatrix a(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double pij = p(i, j);
            if (!(pij >= 0.0 && pij <= 1.0))
                throw std::invalid_argument("sample_binary: probability out of [0,1]");
            if (rng.bernoulli(pij)) a.set(i, j, 1.0);
        }
    }
    return a;
}

inline NetworkGroup sample_binary_group(const SymMatrix& p, int m, RngStream& rng) {
    if (m < 1) throw std::invalid_argument("sample_binary_group: m must be >= 1");
    NetworkGroup g;
    g.weighted = false;
    g.nets.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) g.nets.push_back(sample_binary(p, rng));
    return g;
}

inline NetworkGroup sample_correlated_er_group(const CorrErSpec& spec, int m, RngStream& rng) {
    if (m < 1) throw std::invalid_argument("sample_correlated_er_group: m must be >= 1");
    if (!(spec.p >= 0.0 && spec.p <= 1.0) || !(spec.eps >= 0.0 && spec.eps <= 1.0))
        throw std::invalid_argument("sample_correlated_er_group: probability out of [0,1]");
    const SymMatrix parent = sample_binary(SymMatrix::constant_offdiag(spec.n, spec.p), rng);
    NetworkGroup g;
    g.weighted = false;
    g.nets.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        SymMatrix child(spec.n);
        for (int i = 0; i < spec.n; ++i)
            for (int j = i + 1; j < spec.n; ++j)
                if (parent(i, j) != 0.0 && rng.bernoulli(spec.eps)) child.set(i, j, 1.0);
        g.nets.push_back(std::move(child));
    }
    return g;
}

inline NetworkGroup sample_beta_group(const BetaWeightSpec& spec, int m, RngStream& rng) {
    if (m < 1) throw std::invalid_argument("sample_beta_group: m must be >= 1");
    const double wa = spec.within_a + spec.shift;
    const double wb = spec.within_b + spec.shift;
    const double ba = spec.between_a + spec.shift;
    const double bb = spec.between_b + spec.shift;
    if (!(wa > 0.0 && wb > 0.0 && ba > 0.0 && bb > 0.0))
        throw std::invalid_argument("sample_beta_group: nonpositive Beta parameter");
    const std::vector<int> labels = two_block_membership_halves(spec.n);
    NetworkGroup g;
    g.weighted = true;
    g.nets.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        SymMatrix a(spec.n);
        for (int i = 0; i < spec.n; ++i) {
            for (int j = i + 1; j < spec.n; ++j) {
                const bool within = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
                a.set(i, j, within ? rng.beta(wa, wb) : rng.beta(ba, bb));
            }
        }
        g.nets.push_back(std::move(a));
    }
    return g;
}

/// Uniform subset of {0..n-1} of the given size, without replacement, sorted.
inline std::vector<int> sample_index_subset(int n, int size, RngStream& rng) {
    if (size < 0 || size > n) throw std::invalid_argument("sample_index_subset: bad size");
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < size; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(size));
    std::sort(pool.begin(), pool.end());
    return pool;
}

/// Subtracts eps from P on pairs whose endpoints BOTH lie in the subset
/// (mixed pairs are left untouched), then clamps to [0,1]. The clamp only
/// guards misuse; benchmark perturbations stay interior.
inline SymMatrix perturb_on_subset(const SymMatrix& p, const std::vector<int>& subset, double eps) {
    std::vector<char> in(static_cast<std::size_t>(p.n()), 0);
    for (int i : subset) {
        if (i < 0 || i >= p.n()) throw std::invalid_argument("perturb_on_subset: index out of range");
        in[static_cast<std::size_t>(i)] = 1;
    }
    SymMatrix out = p;
    for (int i = 0; i < p.n(); ++i)
        for (int j = i; j < p.n(); ++j)
            if (in[static_cast<std::size_t>(i)] && in[static_cast<std::size_t>(j)])
                out.set(i, j, std::clamp(p(i, j) - eps, 0.0, 1.0));
    return out;
}

}  // namespace spenet
