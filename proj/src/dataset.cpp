#include "sdrq/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sdrq/countries.hpp"
#include "sdrq/csv.hpp"
#include "sdrq/error.hpp"

namespace sdrq {

using nlohmann::json;

std::string_view to_string(VariableKind kind) noexcept {
    switch (kind) {
        case VariableKind::Source: return "Source";
        case VariableKind::Target: return "Target";
        case VariableKind::HarmonizationControl: return "HarmonizationControl";
        case VariableKind::QualityControl: return "QualityControl";
        case VariableKind::Demographic: return "Demographic";
    }
    return "Target";
}

std::optional<VariableKind> parse_variable_kind(std::string_view text) noexcept {
    for (auto kind : {VariableKind::Source, VariableKind::Target, VariableKind::HarmonizationControl,
                      VariableKind::QualityControl, VariableKind::Demographic}) {
        if (to_string(kind) == text) return kind;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// VariableRegistry

VariableRegistry::VariableRegistry(std::vector<VariableDescriptor> variables)
    : variables_(std::move(variables)) {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& name = variables_[i].name;
        if (name.empty()) throw Error(ErrorCode::MalformedFile, "variable with empty name");
        for (auto key : kKeyColumns) {
            if (name == key) {
                throw Error(ErrorCode::MalformedFile,
                            "variable name '" + name + "' collides with a key column");
            }
        }
        if (!index_.emplace(name, i).second) {
            throw Error(ErrorCode::MalformedFile, "duplicate variable name '" + name + "'");
        }
    }

    auto check_refs = [&](const VariableDescriptor& owner, const std::vector<std::string>& refs,
                          VariableKind expected, const char* field) {
        for (const auto& ref : refs) {
            const auto* target = find(ref);
            if (target == nullptr) {
                throw Error(ErrorCode::UnknownVariable, "variable '" + owner.name + "' " + field +
                                                            " references unknown variable '" +
                                                            ref + "'");
            }
            if (target->kind != expected) {
                throw Error(ErrorCode::MalformedFile,
                            "variable '" + owner.name + "' " + field + " entry '" + ref +
                                "' must be of kind " + std::string(to_string(expected)));
            }
        }
    };
    for (const auto& v : variables_) {
        if (!v.controls.empty() && v.kind != VariableKind::Target) {
            throw Error(ErrorCode::MalformedFile,
                        "only Target variables may list controls ('" + v.name + "')");
        }
        check_refs(v, v.controls, VariableKind::HarmonizationControl, "controls");
        check_refs(v, v.quality_flags, VariableKind::QualityControl, "quality_flags");
    }
}

const VariableDescriptor* VariableRegistry::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &variables_[it->second];
}

const VariableDescriptor& VariableRegistry::at(std::string_view name) const {
    const auto* v = find(name);
    if (v == nullptr) {
        throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
    }
    return *v;
}

std::optional<std::size_t> VariableRegistry::index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> VariableRegistry::names_of_kind(VariableKind kind) const {
    std::vector<std::string> out;
    for (const auto& v : variables_) {
        if (v.kind == kind) out.push_back(v.name);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metadata JSON

namespace {

template <typename T>
T field_or(const json& obj, const char* key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    return it->get<T>();
}

VariableDescriptor variable_from_json(const json& j) {
    VariableDescriptor v;
    v.name = j.at("name").get<std::string>();
    auto kind_text = j.at("kind").get<std::string>();
    auto kind = parse_variable_kind(kind_text);
    if (!kind) {
        throw Error(ErrorCode::MalformedFile,
                    "variable '" + v.name + "' has unknown kind '" + kind_text + "'");
    }
    v.kind = *kind;
    v.label = field_or<std::string>(j, "label", "");
    v.topic = field_or<std::string>(j, "topic", "");
    if (auto it = j.find("value_labels"); it != j.end() && !it->is_null()) {
        for (const auto& [code, label] : it->items()) {
            int value = 0;
            auto [ptr, ec] = std::from_chars(code.data(), code.data() + code.size(), value);
            if (ec != std::errc() || ptr != code.data() + code.size()) {
                throw Error(ErrorCode::MalformedFile,
                            "variable '" + v.name + "' has non-integer value label key '" + code + "'");
            }
            v.value_labels.emplace(value, label.get<std::string>());
        }
    }
    v.controls = field_or<std::vector<std::string>>(j, "controls", {});
    v.quality_flags = field_or<std::vector<std::string>>(j, "quality_flags", {});
    return v;
}

json variable_to_json(const VariableDescriptor& v) {
    json labels = json::object();
    for (const auto& [code, label] : v.value_labels) labels[std::to_string(code)] = label;
    return json{{"name", v.name},
                {"kind", std::string(to_string(v.kind))},
                {"label", v.label},
                {"topic", v.topic},
                {"value_labels", labels},
                {"controls", v.controls},
                {"quality_flags", v.quality_flags}};
}

}  // namespace

Metadata parse_metadata(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedFile, std::string("metadata JSON: ") + e.what());
    }
    if (!root.is_object()) throw Error(ErrorCode::MalformedFile, "metadata JSON must be an object");

    Metadata meta;
    try {
        std::vector<VariableDescriptor> vars;
        for (const auto& item : root.at("variables")) vars.push_back(variable_from_json(item));
        meta.variables = VariableRegistry(std::move(vars));

        std::set<int> seen_ids;
        if (auto it = root.find("questions"); it != root.end()) {
            for (const auto& q : *it) {
                QuestionRecord rec;
                rec.id = q.at("id").get<int>();
                rec.text = q.at("text").get<std::string>();
                rec.survey = field_or<std::string>(q, "survey", "");
                rec.wave = field_or<std::string>(q, "wave", "");
                rec.year = field_or<int>(q, "year", 0);
                rec.target = q.at("target").get<std::string>();
                meta.questions.push_back(std::move(rec));
            }
        }
        meta.missing_sentinels = field_or<std::vector<int>>(root, "missing_sentinels", {});
        meta.quality_no_issue_code = field_or<int>(root, "quality_no_issue_code", 0);
        if (auto it = root.find("surveys"); it != root.end()) {
            for (const auto& s : *it) {
                meta.survey_descriptions[s.at("name").get<std::string>()] =
                    field_or<std::string>(s, "description", "");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedFile, std::string("metadata JSON: ") + e.what());
    }

    std::set<int> ids;
    for (const auto& q : meta.questions) {
        if (!ids.insert(q.id).second) {
            throw Error(ErrorCode::MalformedFile, "duplicate question id " + std::to_string(q.id));
        }
        if (q.text.empty()) {
            throw Error(ErrorCode::MalformedFile, "question " + std::to_string(q.id) + " has empty text");
        }
        const auto* target = meta.variables.find(q.target);
        if (target == nullptr) {
            throw Error(ErrorCode::UnknownVariable, "question " + std::to_string(q.id) +
                                                        " references unknown target '" + q.target + "'");
        }
        if (target->kind != VariableKind::Target) {
            throw Error(ErrorCode::MalformedFile, "question " + std::to_string(q.id) + " label '" +
                                                      q.target + "' is not a Target variable");
        }
    }
    return meta;
}

std::string serialize_metadata(const Metadata& meta) {
    json vars = json::array();
    for (const auto& v : meta.variables.all()) vars.push_back(variable_to_json(v));
    json questions = json::array();
    for (const auto& q : meta.questions) {
        questions.push_back(json{{"id", q.id},
                                 {"text", q.text},
                                 {"survey", q.survey},
                                 {"wave", q.wave},
                                 {"year", q.year},
                                 {"target", q.target}});
    }
    json surveys = json::array();
    for (const auto& [name, description] : meta.survey_descriptions) {
        surveys.push_back(json{{"name", name}, {"description", description}});
    }
    json root{{"variables", vars},
              {"questions", questions},
              {"missing_sentinels", meta.missing_sentinels},
              {"quality_no_issue_code", meta.quality_no_issue_code},
              {"surveys", surveys}};
    return root.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// HarmonizedDataset

HarmonizedDataset::Builder::Builder(Metadata metadata, std::vector<std::string> value_columns)
    : metadata_(std::move(metadata)), value_columns_(std::move(value_columns)) {
    const auto& reg = metadata_.variables;
    std::set<std::string> seen;
    std::optional<std::size_t> last_index;
    for (const auto& name : value_columns_) {
        const auto* v = reg.find(name);
        if (v == nullptr) {
            throw Error(ErrorCode::UnknownVariable,
                        "data column '" + name + "' is not declared in the metadata");
        }
        if (v->kind == VariableKind::Source) {
            throw Error(ErrorCode::MalformedFile,
                        "Source variable '" + name + "' cannot be a harmonized data column");
        }
        if (!seen.insert(name).second) {
            throw Error(ErrorCode::MalformedFile, "duplicate data column '" + name + "'");
        }
        auto idx = *reg.index_of(name);
        if (last_index && idx < *last_index) {
            throw Error(ErrorCode::MalformedFile,
                        "data column '" + name + "' is out of registry order");
        }
        last_index = idx;
    }
    columns_.resize(value_columns_.size());
}

HarmonizedDataset::Builder& HarmonizedDataset::Builder::add_row(RespondentKey key,
                                                                std::vector<Cell> cells,
                                                                std::size_t line) {
    if (cells.size() != value_columns_.size()) {
        throw Error(ErrorCode::MalformedFile,
                    "row" + (line ? " at line " + std::to_string(line) : std::string()) + " has " +
                        std::to_string(cells.size()) + " value cells, expected " +
                        std::to_string(value_columns_.size()));
    }
    keys_.push_back(std::move(key));
    for (std::size_t c = 0; c < cells.size(); ++c) columns_[c].push_back(cells[c]);
    lines_.push_back(line);
    return *this;
}

HarmonizedDataset HarmonizedDataset::Builder::build() && {
    auto where = [&](std::size_t row) {
        return lines_[row] ? "line " + std::to_string(lines_[row]) : "row " + std::to_string(row);
    };

    std::set<std::tuple<std::string, std::string, std::string>> respondent_keys;
    std::map<std::pair<std::string, std::string>, std::set<int>> wave_years;
    for (std::size_t r = 0; r < keys_.size(); ++r) {
        const auto& k = keys_[r];
        if (k.respondent_id.empty() || k.survey.empty() || k.wave.empty()) {
            throw Error(ErrorCode::MalformedFile, where(r) + ": empty key field");
        }
        if (k.year < 1900 || k.year > 2100) {
            throw Error(ErrorCode::MalformedFile,
                        where(r) + ": year " + std::to_string(k.year) + " outside [1900, 2100]");
        }
        if (!is_alpha3(k.country)) {
            throw Error(ErrorCode::MalformedFile,
                        where(r) + ": country '" + k.country + "' is not an ISO alpha-3 code");
        }
        if (!respondent_keys.emplace(k.survey, k.wave, k.respondent_id).second) {
            throw Error(ErrorCode::DuplicateRespondentKey,
                        where(r) + ": duplicate respondent '" + k.respondent_id + "' in " + k.survey +
                            "/" + k.wave);
        }
        wave_years[{k.survey, k.wave}].insert(k.year);
    }

    for (std::size_t c = 0; c < value_columns_.size(); ++c) {
        const auto& v = metadata_.variables.at(value_columns_[c]);
        if (v.value_labels.empty()) continue;
        for (std::size_t r = 0; r < columns_[c].size(); ++r) {
            const auto& cell = columns_[c][r];
            if (cell && !v.value_labels.contains(*cell)) {
                throw Error(ErrorCode::BadValueCode, where(r) + ", column '" + v.name + "': code " +
                                                         std::to_string(*cell) +
                                                         " has no value label");
            }
        }
    }

    HarmonizedDataset ds;
    ds.metadata_ = std::move(metadata_);
    ds.value_columns_ = std::move(value_columns_);
    for (std::size_t c = 0; c < ds.value_columns_.size(); ++c) {
        ds.column_index_.emplace(ds.value_columns_[c], c);
    }
    ds.columns_ = std::move(columns_);
    const auto n = keys_.size();
    ds.respondent_ids_.reserve(n);
    ds.surveys_.reserve(n);
    ds.waves_.reserve(n);
    ds.years_.reserve(n);
    ds.countries_.reserve(n);
    for (auto& k : keys_) {
        ds.respondent_ids_.push_back(std::move(k.respondent_id));
        ds.surveys_.push_back(std::move(k.survey));
        ds.waves_.push_back(std::move(k.wave));
        ds.years_.push_back(k.year);
        ds.countries_.push_back(std::move(k.country));
    }
    return ds;
}

std::optional<std::size_t> HarmonizedDataset::value_column_index(std::string_view name) const {
    auto it = column_index_.find(std::string(name));
    if (it == column_index_.end()) return std::nullopt;
    return it->second;
}

const std::vector<Cell>& HarmonizedDataset::column(std::string_view name) const {
    auto idx = value_column_index(name);
    if (!idx) {
        throw Error(ErrorCode::UnknownVariable,
                    "dataset has no column '" + std::string(name) + "'");
    }
    return columns_[*idx];
}

std::vector<std::string> HarmonizedDataset::survey_names() const {
    std::set<std::string> names(surveys_.begin(), surveys_.end());
    return {names.begin(), names.end()};
}

bool HarmonizedDataset::operator==(const HarmonizedDataset& other) const {
    return metadata_ == other.metadata_ && respondent_ids_ == other.respondent_ids_ &&
           surveys_ == other.surveys_ && waves_ == other.waves_ && years_ == other.years_ &&
           countries_ == other.countries_ && value_columns_ == other.value_columns_ &&
           columns_ == other.columns_;
}

// ---------------------------------------------------------------------------
// Loading and saving

namespace {

std::optional<std::int64_t> parse_integer(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

}  // namespace

HarmonizedDataset load_dataset_from_strings(std::string_view csv_text, std::string_view meta_json) {
    Metadata meta = parse_metadata(meta_json);
    auto records = csv::parse(csv_text);
    if (records.empty()) throw Error(ErrorCode::MalformedFile, "data CSV is empty");

    const auto& header = records.front().fields;
    const std::size_t nkeys = std::size(kKeyColumns);
    if (header.size() < nkeys) {
        throw Error(ErrorCode::MalformedFile, "data CSV header must start with respondent_id,survey,wave,year,country");
    }
    for (std::size_t i = 0; i < nkeys; ++i) {
        if (header[i] != kKeyColumns[i]) {
            throw Error(ErrorCode::MalformedFile, "data CSV header column " + std::to_string(i + 1) +
                                                      " must be '" + std::string(kKeyColumns[i]) +
                                                      "', found '" + header[i] + "'");
        }
    }
    std::vector<std::string> value_columns(header.begin() + nkeys, header.end());
    std::set<int> sentinels(meta.missing_sentinels.begin(), meta.missing_sentinels.end());
    HarmonizedDataset::Builder builder(std::move(meta), value_columns);

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size()) {
            throw Error(ErrorCode::MalformedFile,
                        "line " + std::to_string(rec.line) + ": expected " +
                            std::to_string(header.size()) + " fields, found " +
                            std::to_string(rec.fields.size()));
        }
        RespondentKey key;
        key.respondent_id = rec.fields[0];
        key.survey = rec.fields[1];
        key.wave = rec.fields[2];
        auto year = parse_integer(rec.fields[3]);
        if (!year) {
            throw Error(ErrorCode::MalformedFile, "line " + std::to_string(rec.line) +
                                                      ", column 'year': not an integer: '" +
                                                      rec.fields[3] + "'");
        }
        key.year = static_cast<int>(*year);
        key.country = rec.fields[4];

        std::vector<Cell> cells;
        cells.reserve(value_columns.size());
        for (std::size_t c = nkeys; c < rec.fields.size(); ++c) {
            const auto& text = rec.fields[c];
            if (text.empty()) {
                cells.emplace_back();
                continue;
            }
            auto value = parse_integer(text);
            if (!value || *value < INT32_MIN || *value > INT32_MAX) {
                throw Error(ErrorCode::MalformedFile,
                            "line " + std::to_string(rec.line) + ", column '" + header[c] +
                                "': non-integer value '" + text + "' (coded columns only)");
            }
            if (sentinels.contains(static_cast<int>(*value))) {
                cells.emplace_back();
            } else {
                cells.emplace_back(static_cast<std::int32_t>(*value));
            }
        }
        builder.add_row(std::move(key), std::move(cells), rec.line);
    }
    return std::move(builder).build();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MalformedFile, "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

HarmonizedDataset load_dataset(const std::filesystem::path& data_path,
                               const std::filesystem::path& meta_path) {
    return load_dataset_from_strings(read_text_file(data_path), read_text_file(meta_path));
}

std::string dataset_to_csv(const HarmonizedDataset& ds) {
    std::string out;
    for (std::size_t i = 0; i < std::size(kKeyColumns); ++i) {
        if (i) out.push_back(',');
        out += kKeyColumns[i];
    }
    for (const auto& name : ds.value_columns()) {
        out.push_back(',');
        out += csv::escape(name);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        out += csv::escape(ds.respondent_ids()[r]);
        out.push_back(',');
        out += csv::escape(ds.surveys()[r]);
        out.push_back(',');
        out += csv::escape(ds.waves()[r]);
        out.push_back(',');
        out += std::to_string(ds.years()[r]);
        out.push_back(',');
        out += ds.countries()[r];
        for (std::size_t c = 0; c < ds.value_columns().size(); ++c) {
            out.push_back(',');
            const auto& cell = ds.column(c)[r];
            if (cell) out += std::to_string(*cell);
        }
        out.push_back('\n');
    }
    return out;
}

void save_dataset(const HarmonizedDataset& ds, const std::filesystem::path& data_path,
                  const std::filesystem::path& meta_path) {
    write_text_file(data_path, dataset_to_csv(ds));
    write_text_file(meta_path, serialize_metadata(ds.metadata()));
}

}  // namespace sdrq
