#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "sdrq/classifier.hpp"
#include "sdrq/dataset.hpp"
#include "sdrq/embedding_provider.hpp"
#include "sdrq/recommend.hpp"

namespace sdrq {

// Files inside a workspace directory.
inline constexpr const char* kDataFile = "data.csv";
inline constexpr const char* kMetaFile = "metadata.json";
inline constexpr const char* kHeadFile = "head.json";
inline constexpr const char* kEmbeddingFile = "embeddings.sdre";

// FNV-1a over the encoder config and vocabulary, as 16 hex digits.
std::string encoder_fingerprint(const EncoderConfig& config, const Vocabulary& vocab);

// Identifies the embedding space a head was trained in.
std::string provider_fingerprint(const EmbeddingProvider& provider);

struct WorkspaceOptions {
    ProviderKind provider = ProviderKind::ToyEncoder;
    std::filesystem::path embeddings;  // File; defaults to the workspace table
    std::string url;                   // RemoteService
    int dimension = 64;                // RemoteService
    EncoderConfig encoder;
};

// A loaded dataset with its embedding provider, optional trained head and
// recommender. Everything is immutable once assembled.
struct Workspace {
    std::shared_ptr<const HarmonizedDataset> dataset;
    std::shared_ptr<const EmbeddingProvider> provider;
    std::shared_ptr<const ClassifierHead> head;  // null when untrained
    std::shared_ptr<const Recommender> recommender;

    // Head logits when a head is trained, the raw provider otherwise.
    std::shared_ptr<const EmbeddingProvider> projection_provider() const;
};

// Builds the provider and recommender. A head whose config_hash differs from
// the provider fingerprint is rejected with InvalidArgument.
Workspace assemble_workspace(HarmonizedDataset dataset, const WorkspaceOptions& options = {},
                             std::shared_ptr<const ClassifierHead> head = nullptr,
                             const std::filesystem::path& dir = {});

// Loads data.csv, metadata.json and head.json (if present) from `dir`.
Workspace open_workspace(const std::filesystem::path& dir, const WorkspaceOptions& options = {});

// Trains a head on the workspace corpus and stamps it with the provider fingerprint.
ClassifierHead train_workspace_head(const Workspace& workspace, const TrainOptions& options = {});

}  // namespace sdrq
