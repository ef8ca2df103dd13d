#include "sdrq/availability.hpp"

#include <algorithm>
#include <climits>

#include "sdrq/error.hpp"

namespace sdrq {
namespace {

std::vector<std::size_t> target_columns(const HarmonizedDataset& dataset, const AvailabilityQuery& query) {
    if (query.targets.empty()) throw Error(ErrorCode::InvalidArgument, "at least one target is required");
    std::vector<std::size_t> cols;
    for (const auto& t : query.targets) {
        const auto* var = dataset.variables().find(t);
        auto col = dataset.value_column_index(t);
        if (!var || var->kind != VariableKind::Target || !col) {
            throw Error(ErrorCode::UnknownTarget, "'" + t + "' is not a target variable of the dataset");
        }
        cols.push_back(*col);
    }
    return cols;
}

bool all_present(const HarmonizedDataset& dataset, const std::vector<std::size_t>& cols, std::size_t row) {
    for (std::size_t c : cols) {
        if (!dataset.column(c)[row]) return false;
    }
    return true;
}

// Dataset year span narrowed by year bounds among the conditions.
std::vector<int> year_span(const HarmonizedDataset& dataset, const ConditionSet& conditions) {
    const auto& years = dataset.years();
    if (years.empty()) return {};
    auto [mn, mx] = std::minmax_element(years.begin(), years.end());
    long lo = *mn, hi = *mx;
    for (const auto& c : conditions.conjuncts) {
        if (c.kind != FieldKind::Year) continue;
        const auto v = std::get<std::int64_t>(c.literal);
        switch (c.op) {
            case CompareOp::Eq: lo = std::max<long>(lo, v); hi = std::min<long>(hi, v); break;
            case CompareOp::Ge: lo = std::max<long>(lo, v); break;
            case CompareOp::Gt: lo = std::max<long>(lo, v + 1); break;
            case CompareOp::Le: hi = std::min<long>(hi, v); break;
            case CompareOp::Lt: hi = std::min<long>(hi, v - 1); break;
            case CompareOp::Ne: break;
        }
    }
    std::vector<int> out;
    for (long y = lo; y <= hi; ++y) out.push_back(static_cast<int>(y));
    return out;
}

}  // namespace

std::string_view to_string(Level level) noexcept {
    return level == Level::Micro ? "micro" : "macro";
}

std::string_view to_string(YearCase c) noexcept {
    switch (c) {
        case YearCase::Case1: return "case1";
        case YearCase::Case2: return "case2";
        case YearCase::Case3: return "case3";
        case YearCase::AllEmpty: return "all_empty";
    }
    return "all_empty";
}

std::string_view to_string(SortMethod m) noexcept {
    return m == SortMethod::Availability ? "availability" : "quality";
}

std::optional<Level> parse_level(std::string_view text) noexcept {
    if (text == "micro") return Level::Micro;
    if (text == "macro") return Level::Macro;
    return std::nullopt;
}

std::optional<SortMethod> parse_sort_method(std::string_view text) noexcept {
    if (text == "availability") return SortMethod::Availability;
    if (text == "quality") return SortMethod::Quality;
    return std::nullopt;
}

std::map<std::string, YearCounts> separate_availability(const HarmonizedDataset& dataset,
                                                        const AvailabilityQuery& query) {
    const auto cols = target_columns(dataset, query);
    std::map<std::string, YearCounts> out;
    for (const auto& t : query.targets) out[t];
    for (std::size_t row : filter_rows(dataset, query.conditions)) {
        const int year = dataset.years()[row];
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (dataset.column(cols[i])[row]) ++out[query.targets[i]][year];
        }
    }
    return out;
}

JointAvailability joint_availability(const HarmonizedDataset& dataset, const AvailabilityQuery& query) {
    const auto cols = target_columns(dataset, query);
    JointAvailability out;
    for (std::size_t row : filter_rows(dataset, query.conditions)) {
        if (!all_present(dataset, cols, row)) continue;
        const int year = dataset.years()[row];
        ++out.per_year[year];
        ++out.per_survey_year[{dataset.surveys()[row], year}];
    }
    return out;
}

YearCase classify_year(const std::vector<long>& separate, long joint) {
    const bool any_empty = std::any_of(separate.begin(), separate.end(), [](long n) { return n == 0; });
    const bool all_empty = std::all_of(separate.begin(), separate.end(), [](long n) { return n == 0; });
    if (all_empty) return YearCase::AllEmpty;
    if (any_empty) return YearCase::Case2;
    return joint > 0 ? YearCase::Case1 : YearCase::Case3;
}

std::vector<std::string> designated_quality_flags(const HarmonizedDataset& dataset,
                                                  const AvailabilityQuery& query) {
    if (query.quality_flags) {
        for (const auto& f : *query.quality_flags) {
            const auto* var = dataset.variables().find(f);
            if (!var || var->kind != VariableKind::QualityControl || !dataset.value_column_index(f)) {
                throw Error(ErrorCode::UnknownVariable, "'" + f + "' is not a quality-control column");
            }
        }
        return *query.quality_flags;
    }
    std::vector<std::string> flags;
    for (const auto& t : query.targets) {
        const auto* var = dataset.variables().find(t);
        if (!var) continue;
        for (const auto& f : var->quality_flags) {
            if (std::find(flags.begin(), flags.end(), f) == flags.end() && dataset.value_column_index(f)) {
                flags.push_back(f);
            }
        }
    }
    return flags;
}

std::optional<double> survey_quality(const HarmonizedDataset& dataset, std::string_view survey,
                                     const AvailabilityQuery& query) {
    std::vector<std::size_t> flag_cols;
    for (const auto& f : designated_quality_flags(dataset, query)) flag_cols.push_back(*dataset.value_column_index(f));
    const int code = dataset.metadata().quality_no_issue_code;

    long total = 0, clean = 0;
    auto visit = [&](std::size_t row) {
        if (dataset.surveys()[row] != survey) return;
        ++total;
        for (std::size_t c : flag_cols) {
            const auto& cell = dataset.column(c)[row];
            if (!cell || *cell != code) return;
        }
        ++clean;
    };
    if (query.quality_unfiltered) {
        for (std::size_t row = 0; row < dataset.rows(); ++row) visit(row);
    } else {
        for (std::size_t row : filter_rows(dataset, query.conditions)) visit(row);
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(clean) / static_cast<double>(total);
}

long level_counts(const HarmonizedDataset& dataset, const AvailabilityQuery& query, std::string_view survey,
                  int year) {
    const auto cols = target_columns(dataset, query);
    long rows = 0;
    std::set<std::string> countries;
    for (std::size_t row : filter_rows(dataset, query.conditions)) {
        if (dataset.surveys()[row] != survey || dataset.years()[row] != year) continue;
        if (!all_present(dataset, cols, row)) continue;
        ++rows;
        countries.insert(dataset.countries()[row]);
    }
    return query.level == Level::Micro ? rows : static_cast<long>(countries.size());
}

std::vector<std::string> sort_surveys(const AvailabilityProfile& profile, SortMethod method) {
    std::vector<const SurveySummary*> order;
    for (const auto& s : profile.surveys) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [&](const SurveySummary* a, const SurveySummary* b) {
        if (method == SortMethod::Availability) {
            if (a->distinct_years != b->distinct_years) return a->distinct_years > b->distinct_years;
        } else {
            if (a->quality.has_value() != b->quality.has_value()) return a->quality.has_value();
            if (a->quality && *a->quality != *b->quality) return *a->quality > *b->quality;
        }
        return a->name < b->name;
    });
    std::vector<std::string> names;
    for (const auto* s : order) names.push_back(s->name);
    return names;
}

std::set<std::string> country_coverage(const HarmonizedDataset& dataset, const AvailabilityQuery& query,
                                       const std::vector<std::string>& surveys, int year) {
    const auto cols = target_columns(dataset, query);
    std::set<std::string> out;
    for (std::size_t row : filter_rows(dataset, query.conditions)) {
        if (dataset.years()[row] != year || !all_present(dataset, cols, row)) continue;
        if (std::find(surveys.begin(), surveys.end(), dataset.surveys()[row]) == surveys.end()) continue;
        out.insert(dataset.countries()[row]);
    }
    return out;
}

AvailabilityProfile availability_profile(const HarmonizedDataset& dataset, const AvailabilityQuery& query) {
    const auto cols = target_columns(dataset, query);
    AvailabilityProfile profile;
    profile.targets = query.targets;
    profile.level = query.level;
    profile.years = year_span(dataset, query.conditions);
    for (const auto& t : query.targets) {
        auto& counts = profile.separate[t];
        for (int y : profile.years) counts[y] = 0;
    }
    for (int y : profile.years) profile.joint.per_year[y] = 0;

    std::map<SurveyYear, std::set<std::string>> countries;
    for (std::size_t row : filter_rows(dataset, query.conditions)) {
        const int year = dataset.years()[row];
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (dataset.column(cols[i])[row]) ++profile.separate[query.targets[i]][year];
        }
        if (!all_present(dataset, cols, row)) continue;
        ++profile.joint.per_year[year];
        SurveyYear key{dataset.surveys()[row], year};
        ++profile.joint.per_survey_year[key];
        countries[key].insert(dataset.countries()[row]);
    }

    for (int y : profile.years) {
        std::vector<long> sep;
        for (const auto& t : query.targets) sep.push_back(profile.separate[t][y]);
        profile.cases[y] = classify_year(sep, profile.joint.per_year[y]);
    }

    const auto& descriptions = dataset.metadata().survey_descriptions;
    for (const auto& name : dataset.survey_names()) {
        SurveySummary s;
        s.name = name;
        s.quality = survey_quality(dataset, name, query);
        for (const auto& [key, n] : profile.joint.per_survey_year) {
            if (key.first != name) continue;
            auto& cell = s.per_year[key.second];
            cell.micro = n;
            cell.countries = countries[key];
            cell.macro = static_cast<long>(cell.countries.size());
        }
        s.distinct_years = static_cast<int>(s.per_year.size());
        if (auto it = descriptions.find(name); it != descriptions.end()) s.description = it->second;
        profile.surveys.push_back(std::move(s));
    }
    return profile;
}

}  // namespace sdrq
