#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sdrq::fixtures {

// Scripted facts are declarative: the generator makes them true and tests can
// read the expected values straight from the fact.

// `country` has rows in every year of [first_year, last_year] with both gap
// targets present, except that each listed (year, target) is entirely missing.
struct CountryGapsFact {
    std::string country = "RUS";
    int first_year = 2005;
    int last_year = 2012;
    std::vector<std::pair<int, std::string>> gaps = {{2007, "T_TRPARL_11"}, {2009, "T_DEMONST"}};
};

// `survey` covers exactly the given number of countries in each listed year,
// with every target populated.
struct SurveyCoverageFact {
    std::string survey = "WVS";
    std::vector<std::pair<int, int>> countries_per_year = {{2006, 23}, {2007, 9}};
};

// Quality-control flags rise with `correlated_target`; `independent_target`
// is drawn independently of every flag.
struct QualityContrastFact {
    std::string correlated_target = "T_DEMONST";
    std::string independent_target = "T_EDU";
};

// A survey with two waves of known size and known issue-free counts.
struct WaveQualityFact {
    std::string survey = "PILOT";
    struct Wave {
        std::string name;
        int year;
        int rows;
        int issue_free;
    };
    std::vector<Wave> waves = {{"W1", 2001, 100, 60}, {"W2", 2003, 50, 40}};
};

using ScriptedFact = std::variant<CountryGapsFact, SurveyCoverageFact, QualityContrastFact, WaveQualityFact>;

std::vector<ScriptedFact> default_facts();

struct FixtureSpec {
    std::uint64_t seed = 2021;
    int n_targets = 10;
    int n_questions_per_target = 30;
    std::optional<int> total_questions;  // overrides the per-target count, assigned round-robin
    int n_surveys = 6;
    int year_first = 1990;
    int year_last = 2015;
    int countries_per_survey_year = 6;
    int respondents_per_country = 8;
    int embedding_dim = 0;  // > 0 adds a class-clustered SDRE table
    std::vector<ScriptedFact> scripted_facts = default_facts();
};

struct FixtureFiles {
    std::string data_csv;
    std::string metadata_json;
    std::optional<std::string> embeddings;  // SDRE bytes
};

// Errors: InconsistentSpec.
FixtureFiles generate(const FixtureSpec& spec);

// Writes data.csv, metadata.json and (if present) embeddings.sdre.
void write_files(const FixtureFiles& files, const std::filesystem::path& dir);

// Names of the built-in target catalogue, in generation order.
std::vector<std::string> target_catalogue();

}  // namespace sdrq::fixtures
