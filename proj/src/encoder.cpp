#include "sdrq/encoder.hpp"

#include <cctype>
#include <random>

#include "sdrq/error.hpp"

namespace sdrq {

void EncoderConfig::validate() const {
    if (d_model < 1 || heads < 1 || layers < 1 || d_ff < 1 || max_len < 1 || vocab_size < 1) {
        throw Error(ErrorCode::InvalidArgument, "encoder dimensions must all be >= 1");
    }
    if (d_model % heads != 0) {
        throw Error(ErrorCode::InvalidArgument, "d_model must be divisible by the head count");
    }
}

Vocabulary::Vocabulary() {
    add("[PAD]");
    add("[UNK]");
    add("[CLS]");
}

void Vocabulary::add(std::string word) {
    if (index_.contains(word)) return;
    index_.emplace(word, static_cast<int>(words_.size()));
    words_.push_back(std::move(word));
}

Vocabulary Vocabulary::build(std::span<const std::string> texts) {
    Vocabulary v;
    for (const auto& text : texts) {
        for (auto& w : split_words(text)) v.add(std::move(w));
    }
    return v;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
    if (words.size() < 3 || words[0] != "[PAD]" || words[1] != "[UNK]" || words[2] != "[CLS]") {
        throw Error(ErrorCode::InvalidArgument, "vocabulary must start with [PAD], [UNK], [CLS]");
    }
    Vocabulary v;
    for (std::size_t i = 3; i < words.size(); ++i) v.add(std::move(words[i]));
    return v;
}

int Vocabulary::id(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? kUnk : it->second;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

TokenSequence tokenize(std::string_view text, const Vocabulary& vocab, int max_len) {
    TokenSequence seq;
    const auto len = static_cast<std::size_t>(max_len);
    seq.ids.assign(len, Vocabulary::kPad);
    seq.mask.assign(len, 0);
    seq.ids[0] = Vocabulary::kCls;
    seq.mask[0] = 1;
    std::size_t pos = 1;
    for (const auto& w : split_words(text)) {
        if (pos >= len) break;
        seq.ids[pos] = vocab.id(w);
        seq.mask[pos] = 1;
        ++pos;
    }
    seq.length = static_cast<int>(pos);
    return seq;
}

MatrixX<double> positional_encoding(int length, int d_model) {
    MatrixX<double> pe(length, d_model);
    for (int pos = 0; pos < length; ++pos) {
        for (int i = 0; i < d_model; ++i) {
            double exponent = static_cast<double>(2 * (i / 2)) / d_model;
            double angle = pos / std::pow(10000.0, exponent);
            pe(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

EncoderWeights EncoderWeights::initialize(const EncoderConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> projection(0.0, 0.02);
    std::normal_distribution<double> embedding(0.0, 1.0 / std::sqrt(static_cast<double>(config.d_model)));

    auto sample = [&](Eigen::Index rows, Eigen::Index cols, auto& dist) {
        MatrixX<double> m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
        return m;
    };

    EncoderWeights w;
    w.token_embeddings = sample(config.vocab_size, config.d_model, embedding);
    const int dk = config.d_k();
    for (int l = 0; l < config.layers; ++l) {
        LayerWeights<double> layer;
        for (int h = 0; h < config.heads; ++h) {
            HeadWeights<double> head;
            head.query = sample(config.d_model, dk, projection);
            head.key = sample(config.d_model, dk, projection);
            head.value = sample(config.d_model, dk, projection);
            layer.heads.push_back(std::move(head));
        }
        layer.output = sample(config.heads * dk, config.d_model, projection);
        layer.ffn_in = sample(config.d_model, config.d_ff, projection);
        layer.ffn_in_bias = VectorX<double>::Zero(config.d_ff);
        layer.ffn_out = sample(config.d_ff, config.d_model, projection);
        layer.ffn_out_bias = VectorX<double>::Zero(config.d_model);
        layer.norm1_gain = VectorX<double>::Ones(config.d_model);
        layer.norm1_bias = VectorX<double>::Zero(config.d_model);
        layer.norm2_gain = VectorX<double>::Ones(config.d_model);
        layer.norm2_bias = VectorX<double>::Zero(config.d_model);
        w.layers.push_back(std::move(layer));
    }
    return w;
}

ToyEncoder::ToyEncoder(EncoderConfig config, Vocabulary vocab)
    : config_(config), vocab_(std::move(vocab)) {
    config_.vocab_size = vocab_.size();
    weights_ = EncoderWeights::initialize(config_);
    positions_ = positional_encoding(config_.max_len, config_.d_model);
}

MatrixX<double> ToyEncoder::hidden_states(const TokenSequence& tokens) const {
    const double scale = std::sqrt(static_cast<double>(config_.d_model));
    MatrixX<double> x(config_.max_len, config_.d_model);
    for (int pos = 0; pos < config_.max_len; ++pos) {
        x.row(pos) = weights_.token_embeddings.row(tokens.ids[static_cast<std::size_t>(pos)]) * scale +
                     positions_.row(pos);
    }
    for (const auto& layer : weights_.layers) {
        MatrixX<double> attended = multi_head(x, layer, tokens.mask);
        x = layer_norm(x + attended, layer.norm1_gain, layer.norm1_bias);
        MatrixX<double> transformed =
            ffn(x, layer.ffn_in, layer.ffn_in_bias, layer.ffn_out, layer.ffn_out_bias);
        x = layer_norm(x + transformed, layer.norm2_gain, layer.norm2_bias);
    }
    return x;
}

SentenceEmbedding ToyEncoder::encode(std::string_view text, std::string source_id) const {
    auto states = hidden_states(tokenize(text, vocab_, config_.max_len));
    return SentenceEmbedding{states.row(0).transpose(), std::move(source_id)};
}

}  // namespace sdrq
