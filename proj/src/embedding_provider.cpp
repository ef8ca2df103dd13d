#include "sdrq/embedding_provider.hpp"

#include <cstring>

#include <httplib.h>
#include <json.hpp>

#include "sdrq/error.hpp"

namespace sdrq {

ToyEncoderProvider::ToyEncoderProvider(std::shared_ptr<const ToyEncoder> encoder,
                                       const std::vector<QuestionRecord>& questions)
    : encoder_(std::move(encoder)) {
    for (const auto& q : questions) {
        cache_.emplace(q.id, encoder_->encode(q.text, std::to_string(q.id)).vector);
    }
}

VectorX<double> ToyEncoderProvider::encode(std::string_view text) const {
    return encoder_->encode(text).vector;
}

VectorX<double> ToyEncoderProvider::lookup(int question_id) const {
    auto it = cache_.find(question_id);
    if (it == cache_.end()) {
        throw Error(ErrorCode::UnknownQuestionId, "unknown question id " + std::to_string(question_id));
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// SDRE files

namespace {

constexpr char kMagic[4] = {'S', 'D', 'R', 'E'};
constexpr std::uint8_t kVersion = 0x01;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    }
    return v;
}

}  // namespace

VectorX<double> EmbeddingTable::row(std::size_t i) const {
    VectorX<double> v(dim);
    for (std::uint32_t d = 0; d < dim; ++d) v(d) = values[i * dim + d];
    return v;
}

EmbeddingTable make_embedding_table(const MatrixX<double>& rows) {
    EmbeddingTable t;
    t.count = static_cast<std::uint32_t>(rows.rows());
    t.dim = static_cast<std::uint32_t>(rows.cols());
    t.values.reserve(static_cast<std::size_t>(rows.size()));
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (Eigen::Index j = 0; j < rows.cols(); ++j) t.values.push_back(static_cast<float>(rows(i, j)));
    return t;
}

std::string encode_embedding_table(const EmbeddingTable& table) {
    std::string out(kMagic, 4);
    out.push_back(static_cast<char>(kVersion));
    put_u32(out, table.count);
    put_u32(out, table.dim);
    out.reserve(out.size() + table.values.size() * 4);
    for (float f : table.values) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, &f, sizeof bits);
        put_u32(out, bits);
    }
    return out;
}

EmbeddingTable decode_embedding_table(std::string_view bytes) {
    constexpr std::size_t header = 4 + 1 + 4 + 4;
    if (bytes.size() < header || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw Error(ErrorCode::MalformedFile, "embedding file: bad magic (expected SDRE)");
    }
    if (static_cast<std::uint8_t>(bytes[4]) != kVersion) {
        throw Error(ErrorCode::MalformedFile, "embedding file: unsupported version " +
                                                  std::to_string(static_cast<int>(bytes[4])));
    }
    EmbeddingTable t;
    t.count = get_u32(bytes, 5);
    t.dim = get_u32(bytes, 9);
    const std::size_t expected = header + static_cast<std::size_t>(t.count) * t.dim * 4;
    if (bytes.size() != expected) {
        throw Error(ErrorCode::MalformedFile, "embedding file: expected " + std::to_string(expected) +
                                                  " bytes, found " + std::to_string(bytes.size()));
    }
    t.values.resize(static_cast<std::size_t>(t.count) * t.dim);
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        std::uint32_t bits = get_u32(bytes, header + 4 * i);
        std::memcpy(&t.values[i], &bits, sizeof bits);
    }
    return t;
}

void write_embedding_file(const std::filesystem::path& path, const EmbeddingTable& table) {
    write_text_file(path, encode_embedding_table(table));
}

EmbeddingTable read_embedding_file(const std::filesystem::path& path) {
    return decode_embedding_table(read_text_file(path));
}

FileEmbeddingProvider::FileEmbeddingProvider(EmbeddingTable table,
                                             const std::vector<QuestionRecord>& questions)
    : table_(std::move(table)) {
    if (table_.count != questions.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "embedding file has " + std::to_string(table_.count) + " rows but metadata lists " +
                        std::to_string(questions.size()) + " questions");
    }
    for (std::size_t i = 0; i < questions.size(); ++i) {
        row_of_id_.emplace(questions[i].id, i);
        row_of_text_.emplace(questions[i].text, i);
    }
}

VectorX<double> FileEmbeddingProvider::encode(std::string_view text) const {
    auto it = row_of_text_.find(std::string(text));
    if (it == row_of_text_.end()) {
        throw Error(ErrorCode::UnseenText,
                    "file embedding provider cannot encode text outside the corpus");
    }
    return table_.row(it->second);
}

VectorX<double> FileEmbeddingProvider::lookup(int question_id) const {
    auto it = row_of_id_.find(question_id);
    if (it == row_of_id_.end()) {
        throw Error(ErrorCode::UnknownQuestionId, "unknown question id " + std::to_string(question_id));
    }
    return table_.row(it->second);
}

// ---------------------------------------------------------------------------
// Remote service

RemoteServiceProvider::RemoteServiceProvider(std::string url, int dimension,
                                             const std::vector<QuestionRecord>& questions,
                                             std::chrono::milliseconds timeout)
    : dimension_(dimension), timeout_(timeout) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "service URL must include a scheme: '" + url + "'");
    }
    auto path_begin = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_begin);
    path_ = path_begin == std::string::npos ? "/" : url.substr(path_begin);
    for (const auto& q : questions) text_of_id_.emplace(q.id, q.text);
}

VectorX<double> RemoteServiceProvider::encode(std::string_view text) const {
    httplib::Client client(origin_);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());

    nlohmann::json body{{"text", std::string(text)}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) {
        throw Error(ErrorCode::ServiceUnreachable,
                    "embedding service " + origin_ + path_ + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(ErrorCode::ServiceUnreachable,
                    "embedding service answered HTTP " + std::to_string(res->status));
    }
    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(res->body);
        if (reply.is_object()) reply = reply.at("embedding");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ServiceUnreachable, std::string("embedding service reply: ") + e.what());
    }
    if (!reply.is_array()) {
        throw Error(ErrorCode::ServiceUnreachable, "embedding service reply is not an array");
    }
    if (static_cast<int>(reply.size()) != dimension_) {
        throw Error(ErrorCode::DimensionMismatch, "embedding service returned " +
                                                      std::to_string(reply.size()) +
                                                      " values, expected " + std::to_string(dimension_));
    }
    VectorX<double> v(dimension_);
    for (int i = 0; i < dimension_; ++i) {
        const auto& x = reply[static_cast<std::size_t>(i)];
        if (!x.is_number()) {
            throw Error(ErrorCode::ServiceUnreachable, "embedding service returned a non-number");
        }
        v(i) = x.get<double>();
    }
    return v;
}

VectorX<double> RemoteServiceProvider::lookup(int question_id) const {
    auto it = text_of_id_.find(question_id);
    if (it == text_of_id_.end()) {
        throw Error(ErrorCode::UnknownQuestionId, "unknown question id " + std::to_string(question_id));
    }
    return encode(it->second);
}

std::shared_ptr<const EmbeddingProvider> make_provider(const ProviderOptions& options,
                                                       const std::vector<QuestionRecord>& questions) {
    switch (options.kind) {
        case ProviderKind::ToyEncoder:
            if (!options.encoder) throw Error(ErrorCode::InvalidArgument, "toy provider needs an encoder");
            return std::make_shared<ToyEncoderProvider>(options.encoder, questions);
        case ProviderKind::File:
            return std::make_shared<FileEmbeddingProvider>(read_embedding_file(options.file), questions);
        case ProviderKind::RemoteService:
            return std::make_shared<RemoteServiceProvider>(options.url, options.dimension, questions);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown provider kind");
}

MatrixX<double> corpus_embeddings(const EmbeddingProvider& provider,
                                  const std::vector<QuestionRecord>& questions) {
    if (questions.empty()) throw Error(ErrorCode::EmptyCorpus, "question corpus is empty");
    MatrixX<double> out(static_cast<Eigen::Index>(questions.size()), provider.dimension());
    for (std::size_t i = 0; i < questions.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = provider.lookup(questions[i].id).transpose();
    }
    return out;
}

}  // namespace sdrq
