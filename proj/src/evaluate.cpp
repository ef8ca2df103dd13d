#include "sdrq/evaluate.hpp"

#include <algorithm>
#include <set>

#include "sdrq/ami.hpp"
#include "sdrq/error.hpp"
#include "sdrq/kmeans.hpp"

namespace sdrq {
namespace {

int distinct_count(std::span<const int> labels) {
    return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
}

double clustering_ami(const MatrixX<double>& coords, std::span<const int> labels, int restarts,
                      std::uint64_t seed) {
    KMeansOptions km;
    km.restarts = restarts;
    km.seed = seed;
    auto clusters = kmeans(coords, distinct_count(labels), km);
    return ami(labels, clusters.labels).ami;
}

double mean_displacement(const MatrixX<double>& before, const MatrixX<double>& after) {
    return (after.topRows(before.rows()) - before).rowwise().norm().mean();
}

}  // namespace

FiveNumberSummary five_number_summary(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values to summarize");
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

double mean(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values");
    double s = 0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) return 0;
    const double m = mean(values);
    double s = 0;
    for (double v : values) s += (v - m) * (v - m);
    return s / static_cast<double>(values.size() - 1);
}

std::vector<ProviderScores> evaluate_embeddings(const std::vector<NamedEmbeddings>& sets,
                                                std::span<const int> labels, const EvaluationOptions& options) {
    if (options.seeds < 1) throw Error(ErrorCode::InvalidArgument, "seeds must be positive");
    std::vector<ProviderScores> out;
    for (const auto& set : sets) {
        if (set.embeddings.rows() != static_cast<Eigen::Index>(labels.size())) {
            throw Error(ErrorCode::LengthMismatch, "embeddings '" + set.name + "' do not cover the labels");
        }
        ProviderScores scores;
        scores.name = set.name;
        for (int s = 0; s < options.seeds; ++s) {
            TsneParams params = options.tsne;
            params.seed = options.base_seed + static_cast<std::uint64_t>(s);
            auto state = tsne(set.embeddings, params);
            scores.ami.push_back(clustering_ami(state.coords, labels, options.restarts, params.seed));
        }
        scores.summary = five_number_summary(scores.ami);
        out.push_back(std::move(scores));
    }
    return out;
}

StabilityReport stability_study(const ProjectionState& base, const VectorX<double>& new_embedding,
                                std::span<const int> labels, const StabilityOptions& options) {
    const Eigen::Index n = base.coords.rows();
    if (static_cast<Eigen::Index>(labels.size()) != n) {
        throw Error(ErrorCode::LengthMismatch, "labels do not cover the base projection");
    }
    MatrixX<double> all(n + 1, base.embeddings.cols());
    all.topRows(n) = base.embeddings;
    all.row(n) = new_embedding.transpose();

    StabilityReport report;
    std::vector<double> warm_ami, random_ami, warm_disp, random_disp;
    for (int s = 0; s < options.seeds; ++s) {
        StabilityRun run;
        run.seed = options.base_seed + static_cast<std::uint64_t>(s);

        ProjectionState seeded = base;
        seeded.params.seed = run.seed;
        auto warm = iterative_update(seeded, new_embedding, "input", options.iterations);

        TsneParams params = base.params;
        params.seed = run.seed;
        params.iterations = options.iterations;
        auto fresh = tsne(all, params);

        run.warm_displacement = mean_displacement(base.coords, warm.coords);
        run.random_displacement = mean_displacement(base.coords, fresh.coords);
        run.warm_ami = clustering_ami(warm.coords.topRows(n), labels, options.restarts, options.cluster_seed);
        run.random_ami = clustering_ami(fresh.coords.topRows(n), labels, options.restarts, options.cluster_seed);

        warm_disp.push_back(run.warm_displacement);
        random_disp.push_back(run.random_displacement);
        warm_ami.push_back(run.warm_ami);
        random_ami.push_back(run.random_ami);
        report.runs.push_back(run);
    }
    report.mean_warm_displacement = mean(warm_disp);
    report.mean_random_displacement = mean(random_disp);
    report.warm_ami_variance = sample_variance(warm_ami);
    report.random_ami_variance = sample_variance(random_ami);
    return report;
}

}  // namespace sdrq
