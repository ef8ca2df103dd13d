#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace sdrq {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Row-wise softmax with max subtraction.
template <typename Derived>
MatrixX<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
    using Scalar = typename Derived::Scalar;
    MatrixX<Scalar> out = logits;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        Scalar m = out.row(i).maxCoeff();
        out.row(i) = (out.row(i).array() - m).exp().matrix();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
    using Scalar = typename Derived::Scalar;
    VectorX<Scalar> shifted = logits.array() - logits.maxCoeff();
    VectorX<Scalar> e = shifted.array().exp();
    return e / e.sum();
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
    auto m = v.maxCoeff();
    return m + std::log((v.array() - m).exp().sum());
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
    auto denom = a.norm() * b.norm();
    if (denom == 0) return 0;
    return a.dot(b) / denom;
}

// n x n matrix of squared Euclidean distances between the rows of x.
template <typename Derived>
MatrixX<typename Derived::Scalar> squared_distances(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = x.rows();
    MatrixX<Scalar> d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Scalar v = (x.row(i) - x.row(j)).squaredNorm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

}  // namespace sdrq
