#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdrq/tsne.hpp"

namespace sdrq {

struct FiveNumberSummary {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// Quartiles by linear interpolation between order statistics.
// Errors: EmptyInput.
FiveNumberSummary five_number_summary(std::vector<double> values);

double mean(std::span<const double> values);
double sample_variance(std::span<const double> values);

struct NamedEmbeddings {
    std::string name;
    MatrixX<double> embeddings;  // rows aligned with the label vector
};

struct EvaluationOptions {
    TsneParams tsne;
    int seeds = 10;
    int restarts = 10;
    std::uint64_t base_seed = 0;
};

struct ProviderScores {
    std::string name;
    std::vector<double> ami;  // one per seed
    FiveNumberSummary summary;
};

// For each embedding set and seed: t-SNE to 2-D, k-means with K equal to the
// number of distinct labels, AMI against the labels.
std::vector<ProviderScores> evaluate_embeddings(const std::vector<NamedEmbeddings>& sets,
                                                std::span<const int> labels, const EvaluationOptions& options);

struct StabilityOptions {
    int seeds = 10;
    int iterations = 100;
    int restarts = 10;
    std::uint64_t base_seed = 0;
    std::uint64_t cluster_seed = 0;  // shared by every k-means run
};

struct StabilityRun {
    std::uint64_t seed = 0;
    double warm_displacement = 0;    // mean over pre-existing points
    double random_displacement = 0;
    double warm_ami = 0;             // pre-existing points vs labels
    double random_ami = 0;
};

struct StabilityReport {
    std::vector<StabilityRun> runs;
    double mean_warm_displacement = 0;
    double mean_random_displacement = 0;
    double warm_ami_variance = 0;
    double random_ami_variance = 0;
};

// Paired comparison of a warm-start update against a fresh random-init run
// with the same iteration budget, one pair per seed. `labels` covers the
// points of `base`.
StabilityReport stability_study(const ProjectionState& base, const VectorX<double>& new_embedding,
                                std::span<const int> labels, const StabilityOptions& options = {});

}  // namespace sdrq
