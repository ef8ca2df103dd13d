#include "sdrq/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "sdrq/error.hpp"

namespace sdrq {

ClassifierHead::ClassifierHead(MatrixX<double> weights, VectorX<double> bias,
                               std::vector<std::string> classes, VectorX<double> feature_mean,
                               MatrixX<double> feature_transform)
    : weights_(std::move(weights)),
      bias_(std::move(bias)),
      classes_(std::move(classes)),
      mean_(std::move(feature_mean)),
      transform_(std::move(feature_transform)) {
    if (weights_.rows() != static_cast<Eigen::Index>(classes_.size()) || bias_.size() != weights_.rows() ||
        mean_.size() != weights_.cols() || transform_.rows() != weights_.cols() ||
        transform_.cols() != weights_.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "classifier head shapes are inconsistent");
    }
    if (!weights_.allFinite() || !bias_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "classifier head has non-finite weights");
    }
}

std::optional<int> ClassifierHead::class_index(std::string_view name) const {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

VectorX<double> ClassifierHead::standardize(const VectorX<double>& x) const {
    if (x.size() != weights_.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "embedding has dimension " + std::to_string(x.size()) +
                                                      ", head expects " + std::to_string(weights_.cols()));
    }
    return transform_ * (x - mean_);
}

VectorX<double> ClassifierHead::logits(const VectorX<double>& x) const {
    return weights_ * standardize(x) + bias_;
}

VectorX<double> ClassifierHead::probabilities(const VectorX<double>& x) const {
    return softmax(logits(x));
}

std::pair<int, double> ClassifierHead::predict(const VectorX<double>& x) const {
    VectorX<double> p = probabilities(x);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < p.size(); ++i) {
        if (p(i) > p(best)) best = i;
    }
    return {static_cast<int>(best), p(best)};
}

HeadGradient cross_entropy_gradient(const MatrixX<double>& weights, const VectorX<double>& bias,
                                    const MatrixX<double>& features, std::span<const int> labels) {
    HeadGradient g;
    g.weights = MatrixX<double>::Zero(weights.rows(), weights.cols());
    g.bias = VectorX<double>::Zero(bias.size());
    const auto n = features.rows();
    if (n == 0) return g;
    MatrixX<double> logits = (features * weights.transpose()).rowwise() + bias.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        VectorX<double> row = logits.row(i).transpose();
        const int y = labels[static_cast<std::size_t>(i)];
        g.loss += log_sum_exp(row) - row(y);
        VectorX<double> delta = softmax(row);
        delta(y) -= 1.0;
        g.weights.noalias() += delta * features.row(i);
        g.bias += delta;
    }
    const double inv = 1.0 / static_cast<double>(n);
    g.loss *= inv;
    g.weights *= inv;
    g.bias *= inv;
    return g;
}

double cross_entropy_loss(const MatrixX<double>& weights, const VectorX<double>& bias,
                          const MatrixX<double>& features, std::span<const int> labels) {
    double loss = 0;
    const auto n = features.rows();
    if (n == 0) return 0;
    MatrixX<double> logits = (features * weights.transpose()).rowwise() + bias.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        VectorX<double> row = logits.row(i).transpose();
        loss += log_sum_exp(row) - row(labels[static_cast<std::size_t>(i)]);
    }
    return loss / static_cast<double>(n);
}

Split stratified_split(std::span<const int> labels, double split, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::mt19937_64 rng(seed);
    Split out;
    for (auto& [label, rows] : by_class) {
        std::shuffle(rows.begin(), rows.end(), rng);
        auto n_train = static_cast<std::size_t>(std::llround(split * static_cast<double>(rows.size())));
        if (rows.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
        else n_train = rows.size();
        out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.validation.insert(out.validation.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train),
                              rows.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    return out;
}

namespace {

MatrixX<double> gather_rows(const MatrixX<double>& m, std::span<const std::size_t> rows) {
    MatrixX<double> out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

std::vector<int> gather(std::span<const int> v, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(v[r]);
    return out;
}

double accuracy(const MatrixX<double>& weights, const VectorX<double>& bias, const MatrixX<double>& features,
                std::span<const int> labels) {
    if (features.rows() == 0) return 0;
    MatrixX<double> logits = (features * weights.transpose()).rowwise() + bias.transpose();
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < logits.cols(); ++c) {
            if (logits(i, c) > logits(i, best)) best = c;
        }
        if (best == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(features.rows());
}

}  // namespace

MatrixX<double> whitening_transform(const MatrixX<double>& features, const VectorX<double>& mean,
                                    double ridge) {
    MatrixX<double> centered = features.rowwise() - mean.transpose();
    MatrixX<double> cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(features.rows(), 1));
    Eigen::SelfAdjointEigenSolver<MatrixX<double>> eig(cov);
    const double floor = std::max(ridge * eig.eigenvalues().maxCoeff(), 1e-12);
    VectorX<double> inv_sqrt = (eig.eigenvalues().array().max(0.0) + floor).rsqrt().matrix();
    return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

ClassifierHead train_head(const MatrixX<double>& embeddings, const std::vector<std::string>& labels,
                          const TrainOptions& options) {
    if (embeddings.rows() == 0 || labels.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "cannot train a head on an empty corpus");
    }
    if (static_cast<std::size_t>(embeddings.rows()) != labels.size()) {
        throw Error(ErrorCode::LengthMismatch, "embedding rows and labels differ in length");
    }
    if (!(options.split > 0.0 && options.split < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "split must lie in (0, 1)");
    }
    if (options.batch_size < 1 || options.epochs < 1 || !(options.learning_rate > 0)) {
        throw Error(ErrorCode::InvalidArgument, "batch size, epochs and learning rate must be positive");
    }

    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) {
        throw Error(ErrorCode::SingleClassCorpus, "training corpus has a single target class");
    }
    std::vector<std::string> classes(distinct.begin(), distinct.end());
    std::map<std::string, int> class_of;
    for (std::size_t i = 0; i < classes.size(); ++i) class_of[classes[i]] = static_cast<int>(i);
    std::vector<int> y;
    y.reserve(labels.size());
    for (const auto& l : labels) y.push_back(class_of[l]);

    Split split = stratified_split(y, options.split, options.seed);

    MatrixX<double> train_x = gather_rows(embeddings, split.train);
    VectorX<double> mean = train_x.colwise().mean().transpose();
    MatrixX<double> transform = whitening_transform(train_x, mean);
    auto standardize = [&](const MatrixX<double>& m) -> MatrixX<double> {
        return (m.rowwise() - mean.transpose()) * transform.transpose();
    };
    MatrixX<double> train_z = standardize(train_x);
    MatrixX<double> val_z = standardize(gather_rows(embeddings, split.validation));
    std::vector<int> train_y = gather(y, split.train);
    std::vector<int> val_y = gather(y, split.validation);

    const auto c = static_cast<Eigen::Index>(classes.size());
    MatrixX<double> w = MatrixX<double>::Zero(c, embeddings.cols());
    VectorX<double> b = VectorX<double>::Zero(c);

    std::vector<EpochLog> log;
    const double initial_val_loss = cross_entropy_loss(w, b, val_z, val_y);

    std::mt19937_64 rng(options.seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<std::size_t> order(split.train.size());
    std::iota(order.begin(), order.end(), 0);
    const auto batch = static_cast<std::size_t>(options.batch_size);
    for (int epoch = 1; epoch <= options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::size_t end = std::min(order.size(), start + batch);
            std::span<const std::size_t> idx(order.data() + start, end - start);
            MatrixX<double> bz = gather_rows(train_z, idx);
            std::vector<int> by = gather(train_y, idx);
            HeadGradient g = cross_entropy_gradient(w, b, bz, by);
            w -= options.learning_rate * g.weights;
            b -= options.learning_rate * g.bias;
        }
        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = cross_entropy_loss(w, b, train_z, train_y);
        entry.validation_loss = cross_entropy_loss(w, b, val_z, val_y);
        entry.validation_accuracy = accuracy(w, b, val_z, val_y);
        log.push_back(entry);
    }

    ClassifierHead head(std::move(w), std::move(b), std::move(classes), std::move(mean), std::move(transform));
    head.training_log = std::move(log);
    head.initial_validation_loss = initial_val_loss;
    head.validation_rows = std::move(split.validation);
    return head;
}

std::string head_to_json(const ClassifierHead& head) {
    using nlohmann::json;
    auto vec = [](const VectorX<double>& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    auto rows_of = [&](const MatrixX<double>& m) {
        json out = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec(m.row(i).transpose()));
        return out;
    };
    json w = rows_of(head.weights());
    json log = json::array();
    for (const auto& e : head.training_log) {
        log.push_back(json{{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"validation_loss", e.validation_loss},
                           {"validation_accuracy", e.validation_accuracy}});
    }
    json root{{"W", w},
              {"b", vec(head.bias())},
              {"class_index", head.classes()},
              {"config_hash", head.config_hash},
              {"feature_mean", vec(head.feature_mean())},
              {"feature_transform", rows_of(head.feature_transform())},
              {"initial_validation_loss", head.initial_validation_loss},
              {"validation_rows", head.validation_rows},
              {"training_log", log}};
    return root.dump() + "\n";
}

ClassifierHead head_from_json(std::string_view text) {
    using nlohmann::json;
    try {
        json root = json::parse(text);
        auto to_vec = [](const json& j) {
            auto v = j.get<std::vector<double>>();
            return VectorX<double>(Eigen::Map<const VectorX<double>>(v.data(), static_cast<Eigen::Index>(v.size())));
        };
        auto to_mat = [&](const json& rows, Eigen::Index cols) {
            MatrixX<double> m(static_cast<Eigen::Index>(rows.size()), cols);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                VectorX<double> r = to_vec(rows[i]);
                if (r.size() != cols) throw Error(ErrorCode::DimensionMismatch, "head matrix row width mismatch");
                m.row(static_cast<Eigen::Index>(i)) = r.transpose();
            }
            return m;
        };
        auto classes = root.at("class_index").get<std::vector<std::string>>();
        VectorX<double> mean = to_vec(root.at("feature_mean"));
        MatrixX<double> w = to_mat(root.at("W"), mean.size());
        MatrixX<double> transform = to_mat(root.at("feature_transform"), mean.size());
        ClassifierHead head(std::move(w), to_vec(root.at("b")), std::move(classes), std::move(mean),
                            std::move(transform));
        head.config_hash = root.value("config_hash", "");
        head.initial_validation_loss = root.value("initial_validation_loss", 0.0);
        head.validation_rows = root.value("validation_rows", std::vector<std::size_t>{});
        if (auto it = root.find("training_log"); it != root.end()) {
            for (const auto& e : *it) {
                head.training_log.push_back(EpochLog{e.at("epoch").get<int>(), e.at("train_loss").get<double>(),
                                                     e.at("validation_loss").get<double>(),
                                                     e.at("validation_accuracy").get<double>()});
            }
        }
        return head;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedFile, std::string("head checkpoint: ") + e.what());
    }
}

}  // namespace sdrq
