#include "sdrq/recommend.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "sdrq/error.hpp"

namespace sdrq {

HeadLogitProvider::HeadLogitProvider(std::shared_ptr<const EmbeddingProvider> base,
                                     std::shared_ptr<const ClassifierHead> head)
    : base_(std::move(base)), head_(std::move(head)) {
    if (!head_ || !head_->trained()) throw Error(ErrorCode::UntrainedHead, "no trained classification head");
    if (head_->dimension() != base_->dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "head and embedding provider disagree in dimension");
    }
}

Recommender::Recommender(std::shared_ptr<const EmbeddingProvider> provider, std::vector<QuestionRecord> questions,
                         std::shared_ptr<const ClassifierHead> head)
    : provider_(std::move(provider)), questions_(std::move(questions)), head_(std::move(head)) {
    corpus_ = corpus_embeddings(*provider_, questions_);
}

HardRecommendation Recommender::hard(const VectorX<double>& embedding) const {
    if (!head_ || !head_->trained()) {
        throw Error(ErrorCode::UntrainedHead, "no trained classification head is loaded");
    }
    auto [index, probability] = head_->predict(embedding);
    return {head_->classes()[static_cast<std::size_t>(index)], probability};
}

HardRecommendation Recommender::hard(std::string_view text) const {
    return hard(provider_->encode(text));
}

std::vector<Neighbor> Recommender::soft(const VectorX<double>& embedding, int k) const {
    const auto n = static_cast<std::size_t>(corpus_.rows());
    std::vector<double> sim(n);
    for (std::size_t i = 0; i < n; ++i) {
        sim[i] = cosine_similarity(corpus_.row(static_cast<Eigen::Index>(i)).transpose(), embedding);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });
    order.resize(std::min(n, static_cast<std::size_t>(std::max(k, 0))));

    std::vector<Neighbor> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back({questions_[i].id, questions_[i].target, sim[i]});
    return out;
}

std::vector<Neighbor> Recommender::soft(std::string_view text, int k) const {
    return soft(provider_->encode(text), k);
}

Recommendation Recommender::recommend(std::string_view text, int k) const {
    VectorX<double> e = provider_->encode(text);
    return {hard(e), soft(e, k)};
}

std::vector<InformationRow> brush_select(const ProjectionState* projection, const Box& box,
                                         const std::vector<QuestionRecord>& questions,
                                         const VariableRegistry& variables) {
    if (!projection || projection->coords.rows() == 0) {
        throw Error(ErrorCode::NoProjection, "no projection has been computed");
    }
    std::unordered_map<std::string, const QuestionRecord*> by_id;
    for (const auto& q : questions) by_id.emplace(std::to_string(q.id), &q);

    std::vector<InformationRow> rows;
    for (std::size_t i = 0; i < projection->ids.size(); ++i) {
        const double x = projection->coords(static_cast<Eigen::Index>(i), 0);
        const double y = projection->coords(static_cast<Eigen::Index>(i), 1);
        if (x < box.x_min || x > box.x_max || y < box.y_min || y > box.y_max) continue;
        auto it = by_id.find(projection->ids[i]);
        if (it == by_id.end()) continue;
        const auto& q = *it->second;
        const auto* var = variables.find(q.target);
        rows.push_back({q.id, q.year, q.survey, q.wave, q.text, q.target, var ? var->label : std::string()});
    }
    return rows;
}

}  // namespace sdrq
