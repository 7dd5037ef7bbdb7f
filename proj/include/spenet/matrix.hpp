#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>
#include <vector>

namespace spenet {

/// Dense symmetric n x n matrix of doubles.
///
/// Symmetry holds by construction: set() mirrors every write and the checked
/// factory rejects asymmetric input, so data(i,j) == data(j,i) exactly.
/// Values are immutable in practice once a matrix leaves its builder, which
/// makes sharing across threads safe.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(int n) {
        if (n < 1) throw std::invalid_argument("SymMatrix: n must be >= 1");
        data_ = Eigen::MatrixXd::Zero(n, n);
    }

    static SymMatrix identity(int n) {
        SymMatrix m(n);
        m.data_.setIdentity();
        return m;
    }

    /// Constant off-diagonal value, zero diagonal.
    static SymMatrix constant_offdiag(int n, double value) {
        SymMatrix m(n);
        m.data_.setConstant(value);
        m.data_.diagonal().setZero();
        return m;
    }

    /// Wraps a matrix the caller guarantees to be symmetric. Used on hot
    /// paths where the symmetry is structural (means of symmetric matrices,
    /// elementwise maps of symmetric matrices).
    static SymMatrix from_dense_unchecked(Eigen::MatrixXd m) {
        SymMatrix s;
        s.data_ = std::move(m);
        return s;
    }

    /// Checked wrap: throws unless m is square and exactly symmetric.
    static SymMatrix from_dense(Eigen::MatrixXd m) {
        if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix: matrix not square");
        if (m.rows() < 1) throw std::invalid_argument("SymMatrix: n must be >= 1");
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < j; ++i)
                if (m(i, j) != m(j, i)) throw std::invalid_argument("SymMatrix: matrix not symmetric");
        return from_dense_unchecked(std::move(m));
    }

    int n() const { return static_cast<int>(data_.rows()); }

    double operator()(int i, int j) const { return data_(i, j); }

    void set(int i, int j, double v) {
        data_(i, j) = v;
        data_(j, i) = v;
    }

    const Eigen::MatrixXd& dense() const { return data_; }

    bool equals(const SymMatrix& other) const {
        return data_.rows() == other.data_.rows() &&
               (data_.array() == other.data_.array()).all();
    }

private:
    Eigen::MatrixXd data_;
};

/// Tr(M^3) = sum_{i,k,l} M_ik M_kl M_li.
///
/// Computed as one matrix product followed by the diagonal sum of the second
/// product, i.e. sum_ij (M^2)_ij M_ij, never materializing M^3. This runs
/// thousands of times per experiment, so the n^2 pass saved matters.
inline double trace_cubed(const SymMatrix& m) {
    const Eigen::MatrixXd& a = m.dense();
    Eigen::MatrixXd sq = a * a;
    return sq.cwiseProduct(a).sum();
}

inline SymMatrix scale(const SymMatrix& m, double c) {
    return SymMatrix::from_dense_unchecked(c * m.dense());
}

/// An ordered sample of networks on a shared node set.
struct NetworkGroup {
    std::vector<SymMatrix> nets;
    bool weighted = false;

    int size() const { return static_cast<int>(nets.size()); }

    int node_count() const {
        if (nets.empty()) throw std::invalid_argument("empty sample");
        return nets.front().n();
    }

    /// All members share the node count.
    void validate() const {
        const int n = node_count();
        for (const SymMatrix& a : nets)
            if (a.n() != n) throw std::invalid_argument("network group: node count mismatch");
    }
};

/// Elementwise mean of the group's adjacency matrices.
inline SymMatrix sample_mean(const NetworkGroup& group) {
    if (group.nets.empty()) throw std::invalid_argument("empty sample");
    group.validate();
    Eigen::MatrixXd acc = group.nets.front().dense();
    for (std::size_t k = 1; k < group.nets.size(); ++k) acc += group.nets[k].dense();
    acc /= static_cast<double>(group.nets.size());
    return SymMatrix::from_dense_unchecked(std::move(acc));
}

}  // namespace spenet
