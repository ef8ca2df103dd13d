#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdrq/linalg.hpp"

namespace sdrq {

class EmbeddingProvider;

struct TsneParams {
    double perplexity = 30.0;
    int iterations = 500;
    double learning_rate = 200.0;
    double momentum = 0.5;
    double final_momentum = 0.8;
    double momentum_switch = 0.25;  // fraction of iterations at the initial momentum
    double exaggeration = 4.0;
    double exaggeration_stop = 0.25;  // fraction of iterations with exaggerated P
    std::uint64_t seed = 0;
};

struct ProjectionState {
    std::vector<std::string> ids;
    MatrixX<double> coords;      // n x 2
    MatrixX<double> embeddings;  // n x d, kept for later updates
    int timestamp = 0;
    TsneParams params;
    std::vector<double> kl_history;
};

struct ConditionalAffinities {
    MatrixX<double> p;  // row i is p_{.|i}, zero diagonal
    VectorX<double> beta;
    VectorX<double> entropy;  // natural log
};

// Per-point bisection on the Gaussian precision so that each row's entropy is
// log(perplexity) within `tolerance`. Errors: TooFewPoints, PerplexityTooLarge.
ConditionalAffinities conditional_affinities(const MatrixX<double>& sq_distances, double perplexity,
                                             double tolerance = 1e-10, int max_steps = 200);

// (P + P^T) / (2n).
MatrixX<double> joint_probabilities(const MatrixX<double>& conditional);

// Student-t affinities: q_ij = w_ij / sum w, w_ij = 1 / (1 + |y_i - y_j|^2).
MatrixX<double> student_t_affinities(const MatrixX<double>& y);

double kl_divergence(const MatrixX<double>& p, const MatrixX<double>& y);
MatrixX<double> kl_gradient(const MatrixX<double>& p, const MatrixX<double>& y);

// Exact t-SNE. With `init` the run is a warm start and early exaggeration is
// disabled. Errors: TooFewPoints, PerplexityTooLarge, DimensionMismatch.
ProjectionState tsne(const MatrixX<double>& embeddings, const TsneParams& params,
                     std::vector<std::string> ids = {}, const std::optional<MatrixX<double>>& init = {});

// One step of the warm-start loop: append the new embedding at a random
// position and rerun from the previous coordinates.
ProjectionState iterative_update(const ProjectionState& state, const VectorX<double>& embedding,
                                 std::string id, std::optional<int> iterations = {});
ProjectionState iterative_update(const ProjectionState& state, std::string_view text,
                                 const EmbeddingProvider& provider, std::optional<int> iterations = {});

}  // namespace sdrq
