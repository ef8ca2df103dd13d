#include "sdrq/tsne.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "sdrq/embedding_provider.hpp"
#include "sdrq/error.hpp"

namespace sdrq {
namespace {

MatrixX<double> student_t_kernel(const MatrixX<double>& y) {
    MatrixX<double> w = squared_distances(y);
    w = (1.0 + w.array()).inverse().matrix();
    w.diagonal().setZero();
    return w;
}

MatrixX<double> random_init(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1e-4);
    MatrixX<double> y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i, 0) = normal(rng);
        y(i, 1) = normal(rng);
    }
    return y;
}

void check_perplexity(Eigen::Index n, double perplexity) {
    if (n < 3) {
        throw Error(ErrorCode::TooFewPoints, "t-SNE needs at least 3 points, got " + std::to_string(n));
    }
    if (!(perplexity >= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "perplexity must be at least 1");
    }
    if (perplexity > static_cast<double>(n - 1)) {
        throw Error(ErrorCode::PerplexityTooLarge, "perplexity " + std::to_string(perplexity) +
                                                       " exceeds the " + std::to_string(n - 1) +
                                                       " available neighbours");
    }
}

}  // namespace

ConditionalAffinities conditional_affinities(const MatrixX<double>& sq_distances, double perplexity,
                                             double tolerance, int max_steps) {
    const Eigen::Index n = sq_distances.rows();
    check_perplexity(n, perplexity);
    const double target = std::log(perplexity);

    ConditionalAffinities out;
    out.p = MatrixX<double>::Zero(n, n);
    out.beta.resize(n);
    out.entropy.resize(n);
    VectorX<double> d(n - 1);
    VectorX<double> p(n - 1);

    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0, k = 0; j < n; ++j) {
            if (j != i) d(k++) = sq_distances(i, j);
        }
        d.array() -= d.minCoeff();  // entropy is shift invariant

        const double mean = d.mean();
        double beta = mean > 0 ? 1.0 / mean : 1.0;
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        double h = 0.0;
        for (int step = 0; step < max_steps; ++step) {
            p = (-beta * d.array()).exp().matrix();
            const double sum = p.sum();
            h = std::log(sum) + beta * d.dot(p) / sum;
            p /= sum;
            const double diff = h - target;
            if (std::abs(diff) < tolerance) break;
            if (diff > 0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        for (Eigen::Index j = 0, k = 0; j < n; ++j) {
            if (j != i) out.p(i, j) = p(k++);
        }
        out.beta(i) = beta;
        out.entropy(i) = h;
    }
    return out;
}

MatrixX<double> joint_probabilities(const MatrixX<double>& conditional) {
    const auto n = static_cast<double>(conditional.rows());
    return (conditional + conditional.transpose()) / (2.0 * n);
}

MatrixX<double> student_t_affinities(const MatrixX<double>& y) {
    MatrixX<double> w = student_t_kernel(y);
    return w / w.sum();
}

double kl_divergence(const MatrixX<double>& p, const MatrixX<double>& y) {
    MatrixX<double> q = student_t_affinities(y);
    double kl = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            if (i == j || p(i, j) <= 0) continue;
            kl += p(i, j) * std::log(p(i, j) / std::max(q(i, j), std::numeric_limits<double>::min()));
        }
    }
    return kl;
}

MatrixX<double> kl_gradient(const MatrixX<double>& p, const MatrixX<double>& y) {
    MatrixX<double> w = student_t_kernel(y);
    const double z = w.sum();
    MatrixX<double> m = ((p - w / z).array() * w.array()).matrix();
    VectorX<double> row_sums = m.rowwise().sum();
    return 4.0 * (row_sums.asDiagonal() * y - m * y);
}

ProjectionState tsne(const MatrixX<double>& embeddings, const TsneParams& params, std::vector<std::string> ids,
                     const std::optional<MatrixX<double>>& init) {
    const Eigen::Index n = embeddings.rows();
    check_perplexity(n, params.perplexity);
    if (params.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be positive");
    if (ids.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    }
    if (static_cast<Eigen::Index>(ids.size()) != n) {
        throw Error(ErrorCode::LengthMismatch, "ids and embeddings disagree in length");
    }
    if (init && (init->rows() != n || init->cols() != 2)) {
        throw Error(ErrorCode::DimensionMismatch, "warm-start coordinates must be n x 2");
    }

    const auto cond = conditional_affinities(squared_distances(embeddings), params.perplexity);
    const MatrixX<double> p = joint_probabilities(cond.p);

    const bool warm = init.has_value();
    MatrixX<double> y = warm ? *init : random_init(n, params.seed);
    MatrixX<double> velocity = MatrixX<double>::Zero(n, 2);
    const int stop_exaggeration = warm ? 0 : static_cast<int>(params.exaggeration_stop * params.iterations);
    const int switch_momentum = static_cast<int>(params.momentum_switch * params.iterations);

    ProjectionState state;
    state.ids = std::move(ids);
    state.embeddings = embeddings;
    state.params = params;
    state.kl_history.reserve(static_cast<std::size_t>(params.iterations));
    for (int it = 0; it < params.iterations; ++it) {
        const double exaggeration = it < stop_exaggeration ? params.exaggeration : 1.0;
        const double momentum = it < switch_momentum ? params.momentum : params.final_momentum;
        velocity = momentum * velocity - params.learning_rate * kl_gradient(exaggeration * p, y);
        y += velocity;
        y.rowwise() -= y.colwise().mean();
        state.kl_history.push_back(kl_divergence(p, y));
    }
    state.coords = std::move(y);
    return state;
}

ProjectionState iterative_update(const ProjectionState& state, const VectorX<double>& embedding, std::string id,
                                 std::optional<int> iterations) {
    const Eigen::Index n = state.embeddings.rows();
    if (embedding.size() != state.embeddings.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "new embedding has dimension " +
                                                      std::to_string(embedding.size()) + ", projection uses " +
                                                      std::to_string(state.embeddings.cols()));
    }
    MatrixX<double> x(n + 1, state.embeddings.cols());
    x.topRows(n) = state.embeddings;
    x.row(n) = embedding.transpose();

    MatrixX<double> init(n + 1, 2);
    init.topRows(n) = state.coords;
    init.row(n) = random_init(1, state.params.seed + static_cast<std::uint64_t>(state.timestamp) + 1).row(0);

    auto ids = state.ids;
    ids.push_back(std::move(id));
    TsneParams params = state.params;
    if (iterations) params.iterations = *iterations;
    ProjectionState next = tsne(x, params, std::move(ids), init);
    next.params = state.params;
    next.timestamp = state.timestamp + 1;
    return next;
}

ProjectionState iterative_update(const ProjectionState& state, std::string_view text,
                                 const EmbeddingProvider& provider, std::optional<int> iterations) {
    return iterative_update(state, provider.encode(text), "input-" + std::to_string(state.timestamp + 1),
                            iterations);
}

}  // namespace sdrq
