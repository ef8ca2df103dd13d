#include "sdrq/kmeans.hpp"

#include <limits>
#include <random>

#include "sdrq/error.hpp"

namespace sdrq {
namespace {

KMeansResult lloyd(const MatrixX<double>& points, int k, const KMeansOptions& options, std::mt19937_64& rng) {
    const Eigen::Index n = points.rows();
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    MatrixX<double> centers(k, points.cols());
    centers.row(0) = points.row(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
    VectorX<double> nearest = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = nearest.sum();
        Eigen::Index pick = 0;
        if (total > 0) {
            double r = uniform(rng) * total;
            for (pick = 0; pick < n - 1; ++pick) {
                r -= nearest(pick);
                if (r < 0) break;
            }
            while (nearest(pick) == 0 && pick > 0) --pick;
        } else {
            pick = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
        }
        centers.row(c) = points.row(pick);
        nearest = nearest.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    KMeansResult result;
    result.labels.assign(static_cast<std::size_t>(n), 0);
    for (int it = 0; it < options.max_iterations; ++it) {
        result.iterations = it + 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
            result.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        }
        MatrixX<double> updated = MatrixX<double>::Zero(k, points.cols());
        VectorX<double> counts = VectorX<double>::Zero(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int c = result.labels[static_cast<std::size_t>(i)];
            updated.row(c) += points.row(i);
            counts(c) += 1;
        }
        for (int c = 0; c < k; ++c) {
            updated.row(c) = counts(c) > 0 ? RowVectorX<double>(updated.row(c) / counts(c))
                                           : RowVectorX<double>(centers.row(c));
        }
        const double shift = (updated - centers).rowwise().norm().maxCoeff();
        centers = std::move(updated);
        if (shift <= options.tolerance) break;
    }
    result.inertia = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = 0;
        result.inertia += (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
        result.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    result.centers = std::move(centers);
    return result;
}

}  // namespace

KMeansResult kmeans(const MatrixX<double>& points, int k, const KMeansOptions& options) {
    if (k < 1 || options.restarts < 1) throw Error(ErrorCode::InvalidArgument, "k and restarts must be positive");
    if (k > points.rows()) {
        throw Error(ErrorCode::KTooLarge,
                    "k = " + std::to_string(k) + " exceeds the " + std::to_string(points.rows()) + " points");
    }
    std::mt19937_64 rng(options.seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.restarts; ++r) {
        KMeansResult run = lloyd(points, k, options, rng);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

}  // namespace sdrq
