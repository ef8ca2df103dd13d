#include "sdrq/workspace.hpp"

#include <cstdint>
#include <cstdio>

#include "sdrq/error.hpp"

namespace sdrq {
namespace {

class Fnv1a {
public:
    void bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    void text(std::string_view s) {
        bytes(s.data(), s.size());
        bytes("", 1);
    }
    template <typename T>
    void value(T v) {
        bytes(&v, sizeof v);
    }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
        return buf;
    }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string encoder_fingerprint(const EncoderConfig& config, const Vocabulary& vocab) {
    Fnv1a h;
    for (int v : {config.d_model, config.heads, config.layers, config.d_ff, config.max_len, config.vocab_size}) {
        h.value(static_cast<std::int64_t>(v));
    }
    h.value(config.seed);
    for (const auto& w : vocab.words()) h.text(w);
    return h.hex();
}

std::string provider_fingerprint(const EmbeddingProvider& provider) {
    if (const auto* toy = dynamic_cast<const ToyEncoderProvider*>(&provider)) {
        const auto& enc = toy->encoder();
        return "toy:" + encoder_fingerprint(enc.config(), enc.vocabulary());
    }
    return std::string(provider.kind()) + ":" + std::to_string(provider.dimension());
}

std::shared_ptr<const EmbeddingProvider> Workspace::projection_provider() const {
    if (head) return std::make_shared<HeadLogitProvider>(provider, head);
    return provider;
}

Workspace assemble_workspace(HarmonizedDataset dataset, const WorkspaceOptions& options,
                             std::shared_ptr<const ClassifierHead> head, const std::filesystem::path& dir) {
    Workspace ws;
    ws.dataset = std::make_shared<const HarmonizedDataset>(std::move(dataset));
    const auto& questions = ws.dataset->questions();

    ProviderOptions po;
    po.kind = options.provider;
    po.url = options.url;
    po.dimension = options.dimension;
    po.file = options.embeddings.empty() ? dir / kEmbeddingFile : options.embeddings;
    if (po.kind == ProviderKind::ToyEncoder) {
        std::vector<std::string> texts;
        for (const auto& q : questions) texts.push_back(q.text);
        po.encoder = std::make_shared<const ToyEncoder>(options.encoder, Vocabulary::build(texts));
    }
    ws.provider = make_provider(po, questions);

    if (head) {
        const auto expected = provider_fingerprint(*ws.provider);
        if (head->config_hash != expected) {
            throw Error(ErrorCode::InvalidArgument, "classifier head was trained for embedding space '" +
                                                        head->config_hash + "', workspace uses '" + expected + "'");
        }
    }
    ws.head = std::move(head);
    ws.recommender = std::make_shared<const Recommender>(ws.provider, questions, ws.head);
    return ws;
}

Workspace open_workspace(const std::filesystem::path& dir, const WorkspaceOptions& options) {
    auto dataset = load_dataset(dir / kDataFile, dir / kMetaFile);
    std::shared_ptr<const ClassifierHead> head;
    if (std::filesystem::exists(dir / kHeadFile)) {
        head = std::make_shared<const ClassifierHead>(head_from_json(read_text_file(dir / kHeadFile)));
    }
    return assemble_workspace(std::move(dataset), options, std::move(head), dir);
}

ClassifierHead train_workspace_head(const Workspace& workspace, const TrainOptions& options) {
    const auto& questions = workspace.dataset->questions();
    std::vector<std::string> labels;
    for (const auto& q : questions) labels.push_back(q.target);
    auto head = train_head(corpus_embeddings(*workspace.provider, questions), labels, options);
    head.config_hash = provider_fingerprint(*workspace.provider);
    return head;
}

}  // namespace sdrq
