#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdrq/linalg.hpp"

namespace sdrq {

struct TrainOptions {
    int batch_size = 32;
    int epochs = 10;
    double learning_rate = 0.05;
    double split = 0.9;  // training fraction, stratified per class
    std::uint64_t seed = 7;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0;
    double validation_loss = 0;
    double validation_accuracy = 0;
};

// Linear softmax layer over frozen sentence embeddings. Inputs are whitened
// with the training-set mean and covariance before the affine map.
class ClassifierHead {
public:
    ClassifierHead() = default;
    ClassifierHead(MatrixX<double> weights, VectorX<double> bias, std::vector<std::string> classes,
                   VectorX<double> feature_mean, MatrixX<double> feature_transform);

    bool trained() const noexcept { return !classes_.empty(); }
    int num_classes() const noexcept { return static_cast<int>(classes_.size()); }
    int dimension() const noexcept { return static_cast<int>(weights_.cols()); }

    const MatrixX<double>& weights() const noexcept { return weights_; }
    const VectorX<double>& bias() const noexcept { return bias_; }
    const std::vector<std::string>& classes() const noexcept { return classes_; }
    const VectorX<double>& feature_mean() const noexcept { return mean_; }
    const MatrixX<double>& feature_transform() const noexcept { return transform_; }
    std::optional<int> class_index(std::string_view name) const;

    VectorX<double> standardize(const VectorX<double>& x) const;
    VectorX<double> logits(const VectorX<double>& x) const;
    VectorX<double> probabilities(const VectorX<double>& x) const;
    // Argmax class and its probability; ties go to the lowest class index.
    std::pair<int, double> predict(const VectorX<double>& x) const;

    std::vector<EpochLog> training_log;
    double initial_validation_loss = 0;
    std::vector<std::size_t> validation_rows;
    std::string config_hash;

private:
    MatrixX<double> weights_;  // C x d
    VectorX<double> bias_;     // C
    std::vector<std::string> classes_;
    VectorX<double> mean_;
    MatrixX<double> transform_;
};

struct HeadGradient {
    double loss = 0;
    MatrixX<double> weights;
    VectorX<double> bias;
};

// Mean softmax cross-entropy over the rows of `features` and its analytic
// gradient with respect to (weights, bias).
HeadGradient cross_entropy_gradient(const MatrixX<double>& weights, const VectorX<double>& bias,
                                    const MatrixX<double>& features, std::span<const int> labels);
double cross_entropy_loss(const MatrixX<double>& weights, const VectorX<double>& bias,
                          const MatrixX<double>& features, std::span<const int> labels);

// Symmetric inverse square root of the feature covariance, with eigenvalues
// floored at ridge times the largest one.
MatrixX<double> whitening_transform(const MatrixX<double>& features, const VectorX<double>& mean,
                                    double ridge = 1e-3);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

// Per class: shuffle with seed and keep round(split * count) for training,
// leaving at least one validation row for classes with two or more members.
Split stratified_split(std::span<const int> labels, double split, std::uint64_t seed);

// Mini-batch gradient descent on the head; embeddings are n x d, labels are
// Target names. Errors: EmptyCorpus, SingleClassCorpus, InvalidArgument.
ClassifierHead train_head(const MatrixX<double>& embeddings, const std::vector<std::string>& labels,
                          const TrainOptions& options = {});

std::string head_to_json(const ClassifierHead& head);
ClassifierHead head_from_json(std::string_view text);

}  // namespace sdrq
