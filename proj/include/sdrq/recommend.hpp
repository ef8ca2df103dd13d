#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sdrq/classifier.hpp"
#include "sdrq/dataset.hpp"
#include "sdrq/embedding_provider.hpp"
#include "sdrq/tsne.hpp"

namespace sdrq {

// Task-adapted embedding: the head's logits over the base provider's vector.
class HeadLogitProvider final : public EmbeddingProvider {
public:
    HeadLogitProvider(std::shared_ptr<const EmbeddingProvider> base, std::shared_ptr<const ClassifierHead> head);

    int dimension() const override { return head_->num_classes(); }
    VectorX<double> encode(std::string_view text) const override { return head_->logits(base_->encode(text)); }
    VectorX<double> lookup(int question_id) const override { return head_->logits(base_->lookup(question_id)); }
    std::string_view kind() const override { return "trained"; }

private:
    std::shared_ptr<const EmbeddingProvider> base_;
    std::shared_ptr<const ClassifierHead> head_;
};

struct HardRecommendation {
    std::string target;
    double probability = 0;
};

struct Neighbor {
    int question_id = 0;
    std::string target;
    double similarity = 0;
};

struct Recommendation {
    HardRecommendation hard;
    std::vector<Neighbor> soft;  // similarity descending
};

// Query-by-question over a fixed corpus. The head may be absent, in which
// case only soft recommendation is served.
class Recommender {
public:
    Recommender(std::shared_ptr<const EmbeddingProvider> provider, std::vector<QuestionRecord> questions,
                std::shared_ptr<const ClassifierHead> head = nullptr);

    const EmbeddingProvider& provider() const noexcept { return *provider_; }
    const std::vector<QuestionRecord>& questions() const noexcept { return questions_; }
    const MatrixX<double>& corpus() const noexcept { return corpus_; }
    const ClassifierHead* head() const noexcept { return head_.get(); }

    // Errors: UntrainedHead.
    HardRecommendation hard(const VectorX<double>& embedding) const;
    HardRecommendation hard(std::string_view text) const;

    // Top-k corpus questions by cosine similarity; k is clamped to the corpus
    // size and ties keep corpus order.
    std::vector<Neighbor> soft(const VectorX<double>& embedding, int k = 10) const;
    std::vector<Neighbor> soft(std::string_view text, int k = 10) const;

    Recommendation recommend(std::string_view text, int k = 10) const;

private:
    std::shared_ptr<const EmbeddingProvider> provider_;
    std::vector<QuestionRecord> questions_;
    std::shared_ptr<const ClassifierHead> head_;
    MatrixX<double> corpus_;
};

struct Box {
    double x_min = 0, x_max = 0;
    double y_min = 0, y_max = 0;
};

// One line of the information table behind the scatterplot.
struct InformationRow {
    int question_id = 0;
    int year = 0;
    std::string survey;
    std::string wave;
    std::string question;
    std::string target;
    std::string target_label;
};

// Corpus questions whose projected coordinates lie in the closed box; user
// inputs in the projection are skipped. Errors: NoProjection.
std::vector<InformationRow> brush_select(const ProjectionState* projection, const Box& box,
                                         const std::vector<QuestionRecord>& questions,
                                         const VariableRegistry& variables);

}  // namespace sdrq
