#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sdrq/dataset.hpp"
#include "sdrq/encoder.hpp"

namespace sdrq {

// Uniform text -> vector interface over the toy encoder, a precomputed
// embedding file, or an external embedding service.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual int dimension() const = 0;
    virtual VectorX<double> encode(std::string_view text) const = 0;
    virtual VectorX<double> lookup(int question_id) const = 0;
    virtual std::string_view kind() const = 0;
};

class ToyEncoderProvider final : public EmbeddingProvider {
public:
    ToyEncoderProvider(std::shared_ptr<const ToyEncoder> encoder,
                       const std::vector<QuestionRecord>& questions);

    int dimension() const override { return encoder_->dimension(); }
    VectorX<double> encode(std::string_view text) const override;
    VectorX<double> lookup(int question_id) const override;
    std::string_view kind() const override { return "toy"; }

    const ToyEncoder& encoder() const noexcept { return *encoder_; }

private:
    std::shared_ptr<const ToyEncoder> encoder_;
    std::unordered_map<int, VectorX<double>> cache_;  // filled eagerly, read-only afterwards
};

// "SDRE" binary: magic, version 0x01, u32 LE count, u32 LE dim, count*dim f32 LE row-major.
struct EmbeddingTable {
    std::uint32_t count = 0;
    std::uint32_t dim = 0;
    std::vector<float> values;

    VectorX<double> row(std::size_t i) const;
};

EmbeddingTable make_embedding_table(const MatrixX<double>& rows);
std::string encode_embedding_table(const EmbeddingTable& table);
EmbeddingTable decode_embedding_table(std::string_view bytes);  // throws MalformedFile
void write_embedding_file(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable read_embedding_file(const std::filesystem::path& path);

// Serves rows of a precomputed table; row i belongs to questions[i].
// encode() only accepts texts identical to a corpus question.
class FileEmbeddingProvider final : public EmbeddingProvider {
public:
    FileEmbeddingProvider(EmbeddingTable table, const std::vector<QuestionRecord>& questions);

    int dimension() const override { return static_cast<int>(table_.dim); }
    VectorX<double> encode(std::string_view text) const override;
    VectorX<double> lookup(int question_id) const override;
    std::string_view kind() const override { return "file"; }

private:
    EmbeddingTable table_;
    std::unordered_map<int, std::size_t> row_of_id_;
    std::unordered_map<std::string, std::size_t> row_of_text_;
};

// POSTs {"text": ...} to an HTTP endpoint answering with a JSON float array
// (or {"embedding": [...]}).
class RemoteServiceProvider final : public EmbeddingProvider {
public:
    RemoteServiceProvider(std::string url, int dimension, const std::vector<QuestionRecord>& questions,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

    int dimension() const override { return dimension_; }
    VectorX<double> encode(std::string_view text) const override;
    VectorX<double> lookup(int question_id) const override;
    std::string_view kind() const override { return "remote"; }

private:
    std::string origin_;  // scheme://host[:port]
    std::string path_;
    int dimension_;
    std::chrono::milliseconds timeout_;
    std::unordered_map<int, std::string> text_of_id_;
};

enum class ProviderKind { ToyEncoder, File, RemoteService };

struct ProviderOptions {
    ProviderKind kind = ProviderKind::ToyEncoder;
    std::shared_ptr<const ToyEncoder> encoder;  // ToyEncoder
    std::filesystem::path file;                 // File
    std::string url;                            // RemoteService
    int dimension = 64;                         // RemoteService
};

std::shared_ptr<const EmbeddingProvider> make_provider(const ProviderOptions& options,
                                                       const std::vector<QuestionRecord>& questions);

// questions.size() x dim matrix of lookup(id) in question order.
MatrixX<double> corpus_embeddings(const EmbeddingProvider& provider,
                                  const std::vector<QuestionRecord>& questions);

}  // namespace sdrq
