#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdrq/conditions.hpp"

namespace sdrq {

enum class Level { Micro, Macro };
enum class YearCase { Case1, Case2, Case3, AllEmpty };
enum class SortMethod { Availability, Quality };

std::string_view to_string(Level level) noexcept;
std::string_view to_string(YearCase c) noexcept;
std::string_view to_string(SortMethod m) noexcept;
std::optional<Level> parse_level(std::string_view text) noexcept;
std::optional<SortMethod> parse_sort_method(std::string_view text) noexcept;

struct AvailabilityQuery {
    ConditionSet conditions;
    std::vector<std::string> targets;
    Level level = Level::Micro;
    // Flags that define a quality issue; defaults to the union of the
    // targets' quality_flags.
    std::optional<std::vector<std::string>> quality_flags;
    bool quality_unfiltered = false;  // score surveys over all their rows
};

using YearCounts = std::map<int, long>;
using SurveyYear = std::pair<std::string, int>;

struct JointAvailability {
    YearCounts per_year;
    std::map<SurveyYear, long> per_survey_year;
};

struct SurveyYearCell {
    long micro = 0;
    long macro = 0;
    std::set<std::string> countries;
};

struct SurveySummary {
    std::string name;
    std::optional<double> quality;  // nullopt: no samples
    int distinct_years = 0;         // years with joint rows
    std::map<int, SurveyYearCell> per_year;
    std::string description;
};

struct AvailabilityProfile {
    std::vector<std::string> targets;
    Level level = Level::Micro;
    std::vector<int> years;  // contiguous, ascending
    std::map<std::string, YearCounts> separate;
    JointAvailability joint;
    std::map<int, YearCase> cases;
    std::vector<SurveySummary> surveys;  // ascending by name
};

// Errors: UnknownTarget, InvalidArgument (empty target list).
std::map<std::string, YearCounts> separate_availability(const HarmonizedDataset& dataset,
                                                        const AvailabilityQuery& query);
JointAvailability joint_availability(const HarmonizedDataset& dataset, const AvailabilityQuery& query);

YearCase classify_year(const std::vector<long>& separate, long joint);

// Fraction of condition-passing rows of `survey` whose designated flags all
// equal the no-issue code; a missing flag counts as an issue. nullopt when
// no rows qualify.
std::optional<double> survey_quality(const HarmonizedDataset& dataset, std::string_view survey,
                                     const AvailabilityQuery& query);

long level_counts(const HarmonizedDataset& dataset, const AvailabilityQuery& query, std::string_view survey,
                  int year);

// Availability: distinct years descending. Quality: score descending with
// missing scores last. Ties by ascending name.
std::vector<std::string> sort_surveys(const AvailabilityProfile& profile, SortMethod method);

std::set<std::string> country_coverage(const HarmonizedDataset& dataset, const AvailabilityQuery& query,
                                       const std::vector<std::string>& surveys, int year);

AvailabilityProfile availability_profile(const HarmonizedDataset& dataset, const AvailabilityQuery& query);

// Flags a query scores quality against.
std::vector<std::string> designated_quality_flags(const HarmonizedDataset& dataset,
                                                  const AvailabilityQuery& query);

}  // namespace sdrq
