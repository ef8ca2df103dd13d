#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sdrq {

enum class VariableKind { Source, Target, HarmonizationControl, QualityControl, Demographic };

std::string_view to_string(VariableKind kind) noexcept;
std::optional<VariableKind> parse_variable_kind(std::string_view text) noexcept;

struct VariableDescriptor {
    std::string name;
    VariableKind kind = VariableKind::Target;
    std::string label;
    std::string topic;
    std::map<int, std::string> value_labels;
    std::vector<std::string> controls;       // HarmonizationControl names, Target only
    std::vector<std::string> quality_flags;  // QualityControl names

    bool operator==(const VariableDescriptor&) const = default;
};

struct QuestionRecord {
    int id = 0;
    std::string text;
    std::string survey;
    std::string wave;
    int year = 0;
    std::string target;

    bool operator==(const QuestionRecord&) const = default;
};

// Name-indexed set of variable descriptors. Construction validates name
// uniqueness and that every control / quality-flag reference resolves to a
// variable of the right kind.
class VariableRegistry {
public:
    VariableRegistry() = default;
    explicit VariableRegistry(std::vector<VariableDescriptor> variables);

    const std::vector<VariableDescriptor>& all() const noexcept { return variables_; }
    std::size_t size() const noexcept { return variables_.size(); }

    const VariableDescriptor* find(std::string_view name) const;
    const VariableDescriptor& at(std::string_view name) const;  // throws UnknownVariable
    std::optional<std::size_t> index_of(std::string_view name) const;
    std::vector<std::string> names_of_kind(VariableKind kind) const;

    bool operator==(const VariableRegistry& other) const { return variables_ == other.variables_; }

private:
    std::vector<VariableDescriptor> variables_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Metadata {
    VariableRegistry variables;
    std::vector<QuestionRecord> questions;
    std::vector<int> missing_sentinels;
    int quality_no_issue_code = 0;
    std::map<std::string, std::string> survey_descriptions;

    bool operator==(const Metadata&) const = default;
};

Metadata parse_metadata(std::string_view json_text);
std::string serialize_metadata(const Metadata& metadata);

using Cell = std::optional<std::int32_t>;

struct RespondentKey {
    std::string respondent_id;
    std::string survey;
    std::string wave;
    int year = 0;
    std::string country;
};

inline constexpr std::string_view kKeyColumns[] = {"respondent_id", "survey", "wave", "year",
                                                   "country"};

// Immutable columnar table of respondents x harmonized variables. Build one
// through HarmonizedDataset::Builder or load_dataset; after construction only
// const access exists.
class HarmonizedDataset {
public:
    class Builder {
    public:
        Builder(Metadata metadata, std::vector<std::string> value_columns);

        // line is only used in diagnostics (0 = unknown).
        Builder& add_row(RespondentKey key, std::vector<Cell> cells, std::size_t line = 0);
        HarmonizedDataset build() &&;

    private:
        Metadata metadata_;
        std::vector<std::string> value_columns_;
        std::vector<RespondentKey> keys_;
        std::vector<std::vector<Cell>> columns_;
        std::vector<std::size_t> lines_;
    };

    HarmonizedDataset() = default;

    std::size_t rows() const noexcept { return years_.size(); }
    const Metadata& metadata() const noexcept { return metadata_; }
    const VariableRegistry& variables() const noexcept { return metadata_.variables; }
    const std::vector<QuestionRecord>& questions() const noexcept { return metadata_.questions; }

    const std::vector<std::string>& respondent_ids() const noexcept { return respondent_ids_; }
    const std::vector<std::string>& surveys() const noexcept { return surveys_; }
    const std::vector<std::string>& waves() const noexcept { return waves_; }
    const std::vector<int>& years() const noexcept { return years_; }
    const std::vector<std::string>& countries() const noexcept { return countries_; }

    const std::vector<std::string>& value_columns() const noexcept { return value_columns_; }
    std::optional<std::size_t> value_column_index(std::string_view name) const;
    const std::vector<Cell>& column(std::size_t index) const { return columns_.at(index); }
    const std::vector<Cell>& column(std::string_view name) const;  // throws UnknownVariable

    // Sorted distinct survey names.
    std::vector<std::string> survey_names() const;

    bool operator==(const HarmonizedDataset& other) const;

private:
    Metadata metadata_;
    std::vector<std::string> respondent_ids_;
    std::vector<std::string> surveys_;
    std::vector<std::string> waves_;
    std::vector<int> years_;
    std::vector<std::string> countries_;
    std::vector<std::string> value_columns_;
    std::unordered_map<std::string, std::size_t> column_index_;
    std::vector<std::vector<Cell>> columns_;
};

HarmonizedDataset load_dataset_from_strings(std::string_view csv_text, std::string_view meta_json);
HarmonizedDataset load_dataset(const std::filesystem::path& data_path,
                               const std::filesystem::path& meta_path);

std::string dataset_to_csv(const HarmonizedDataset& dataset);
void save_dataset(const HarmonizedDataset& dataset, const std::filesystem::path& data_path,
                  const std::filesystem::path& meta_path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace sdrq
