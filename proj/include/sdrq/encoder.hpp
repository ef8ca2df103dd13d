#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sdrq/linalg.hpp"

namespace sdrq {

struct EncoderConfig {
    int d_model = 64;
    int heads = 4;
    int layers = 2;
    int d_ff = 128;
    int max_len = 32;
    int vocab_size = 0;  // set from the vocabulary
    std::uint64_t seed = 42;

    int d_k() const noexcept { return d_model / heads; }
    void validate() const;  // throws InvalidArgument

    bool operator==(const EncoderConfig&) const = default;
};

// Word-level vocabulary with three reserved ids.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;

    Vocabulary();

    // Every word of every text, in first-seen order (minimum frequency 1).
    static Vocabulary build(std::span<const std::string> texts);
    static Vocabulary from_words(std::vector<std::string> words);  // words[0..2] must be the specials

    int id(std::string_view word) const;  // kUnk when absent
    const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
    int size() const noexcept { return static_cast<int>(words_.size()); }
    const std::vector<std::string>& words() const noexcept { return words_; }

private:
    void add(std::string word);

    std::vector<std::string> words_;
    std::unordered_map<std::string, int> index_;
};

// Lowercased maximal runs of ASCII alphanumerics.
std::vector<std::string> split_words(std::string_view text);

struct TokenSequence {
    std::vector<int> ids;            // length max_len
    std::vector<std::uint8_t> mask;  // 1 = real token, 0 = padding
    int length = 0;                  // number of real tokens (>= 1, [CLS])
};

TokenSequence tokenize(std::string_view text, const Vocabulary& vocab, int max_len);

// ---------------------------------------------------------------------------
// Encoder kernels. All take row-per-token matrices.

// Q K^T / sqrt(d_k).
template <typename DerivedQ, typename DerivedK>
MatrixX<typename DerivedQ::Scalar> attention_scores(const Eigen::MatrixBase<DerivedQ>& q,
                                                    const Eigen::MatrixBase<DerivedK>& k) {
    using Scalar = typename DerivedQ::Scalar;
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(q.cols()));
    return (q * k.transpose()) * scale;
}

// Row-stochastic weights over the unmasked key positions; masked keys get 0.
template <typename DerivedQ, typename DerivedK>
MatrixX<typename DerivedQ::Scalar> attention_weights(const Eigen::MatrixBase<DerivedQ>& q,
                                                     const Eigen::MatrixBase<DerivedK>& k,
                                                     std::span<const std::uint8_t> key_mask) {
    using Scalar = typename DerivedQ::Scalar;
    MatrixX<Scalar> s = attention_scores(q, k);
    const Eigen::Index n = s.cols();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        Scalar m = -std::numeric_limits<Scalar>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (key_mask.empty() || key_mask[static_cast<std::size_t>(j)]) m = std::max(m, s(i, j));
        }
        Scalar total = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (key_mask.empty() || key_mask[static_cast<std::size_t>(j)]) {
                s(i, j) = std::exp(s(i, j) - m);
                total += s(i, j);
            } else {
                s(i, j) = 0;
            }
        }
        s.row(i) /= total;
    }
    return s;
}

// softmax(Q K^T / sqrt(d_k)) V
template <typename DerivedQ, typename DerivedK, typename DerivedV>
MatrixX<typename DerivedQ::Scalar> attention_head(const Eigen::MatrixBase<DerivedQ>& q,
                                                  const Eigen::MatrixBase<DerivedK>& k,
                                                  const Eigen::MatrixBase<DerivedV>& v,
                                                  std::span<const std::uint8_t> key_mask = {}) {
    return attention_weights(q, k, key_mask) * v;
}

template <typename Scalar>
struct HeadWeights {
    MatrixX<Scalar> query;  // d_model x d_k
    MatrixX<Scalar> key;
    MatrixX<Scalar> value;
};

template <typename Scalar>
struct LayerWeights {
    std::vector<HeadWeights<Scalar>> heads;
    MatrixX<Scalar> output;  // (h * d_k) x d_model
    MatrixX<Scalar> ffn_in;  // d_model x d_ff
    VectorX<Scalar> ffn_in_bias;
    MatrixX<Scalar> ffn_out;  // d_ff x d_model
    VectorX<Scalar> ffn_out_bias;
    VectorX<Scalar> norm1_gain, norm1_bias;
    VectorX<Scalar> norm2_gain, norm2_bias;
};

// Concat(Z_1..Z_h) W^O
template <typename Derived>
MatrixX<typename Derived::Scalar> multi_head(const Eigen::MatrixBase<Derived>& x,
                                             const LayerWeights<typename Derived::Scalar>& layer,
                                             std::span<const std::uint8_t> key_mask = {}) {
    using Scalar = typename Derived::Scalar;
    const auto h = static_cast<Eigen::Index>(layer.heads.size());
    const Eigen::Index dk = layer.heads.front().query.cols();
    MatrixX<Scalar> concat(x.rows(), h * dk);
    for (Eigen::Index i = 0; i < h; ++i) {
        const auto& w = layer.heads[static_cast<std::size_t>(i)];
        MatrixX<Scalar> q = x * w.query;
        MatrixX<Scalar> k = x * w.key;
        MatrixX<Scalar> v = x * w.value;
        concat.middleCols(i * dk, dk) = attention_head(q, k, v, key_mask);
    }
    return concat * layer.output;
}

// max(0, x W1 + b1) W2 + b2, position-wise.
template <typename Derived>
MatrixX<typename Derived::Scalar> ffn(const Eigen::MatrixBase<Derived>& x,
                                      const MatrixX<typename Derived::Scalar>& w1,
                                      const VectorX<typename Derived::Scalar>& b1,
                                      const MatrixX<typename Derived::Scalar>& w2,
                                      const VectorX<typename Derived::Scalar>& b2) {
    using Scalar = typename Derived::Scalar;
    MatrixX<Scalar> hidden = (x * w1).rowwise() + b1.transpose();
    hidden = hidden.cwiseMax(Scalar(0));
    return (hidden * w2).rowwise() + b2.transpose();
}

// Per-row standardization (population variance) followed by gain and bias.
template <typename Derived>
MatrixX<typename Derived::Scalar> layer_norm(const Eigen::MatrixBase<Derived>& x,
                                             const VectorX<typename Derived::Scalar>& gain,
                                             const VectorX<typename Derived::Scalar>& bias,
                                             typename Derived::Scalar eps = 1e-12) {
    using Scalar = typename Derived::Scalar;
    MatrixX<Scalar> out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Scalar mean = x.row(i).mean();
        RowVectorX<Scalar> centered = x.row(i).array() - mean;
        Scalar var = centered.squaredNorm() / static_cast<Scalar>(x.cols());
        out.row(i) = centered / std::sqrt(var + eps);
    }
    out = (out.array().rowwise() * gain.transpose().array()).rowwise() + bias.transpose().array();
    return out;
}

// Sinusoidal encodings: even dims sin(pos / 10000^(2i/d)), odd dims cos.
MatrixX<double> positional_encoding(int length, int d_model);

struct EncoderWeights {
    MatrixX<double> token_embeddings;  // vocab_size x d_model
    std::vector<LayerWeights<double>> layers;

    // Projection matrices ~ normal(0, 0.02); token table ~ normal(0, d_model^-1/2)
    // (scaled by sqrt(d_model) on lookup); layer-norm gain 1 and bias 0.
    static EncoderWeights initialize(const EncoderConfig& config);
};

struct SentenceEmbedding {
    VectorX<double> vector;
    std::string source_id;
};

// Frozen post-norm transformer encoder returning the [CLS] row.
class ToyEncoder {
public:
    ToyEncoder(EncoderConfig config, Vocabulary vocab);

    const EncoderConfig& config() const noexcept { return config_; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    const EncoderWeights& weights() const noexcept { return weights_; }
    int dimension() const noexcept { return config_.d_model; }

    // max_len x d_model final hidden states.
    MatrixX<double> hidden_states(const TokenSequence& tokens) const;
    SentenceEmbedding encode(std::string_view text, std::string source_id = "user-input") const;

private:
    EncoderConfig config_;
    Vocabulary vocab_;
    EncoderWeights weights_;
    MatrixX<double> positions_;
};

}  // namespace sdrq
