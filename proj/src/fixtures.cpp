#include "sdrq/fixtures.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <set>

#include "sdrq/dataset.hpp"
#include "sdrq/embedding_provider.hpp"
#include "sdrq/error.hpp"

namespace sdrq::fixtures {
namespace {

enum class ValueModel { Trust11, Trust4, Interest4, Binary, Age, Gender, Education };

struct TargetSpec {
    const char* name;
    const char* label;
    const char* topic;
    ValueModel model;
    std::vector<const char*> templates;  // "{period}" and "{inst}" are substituted
    std::vector<const char*> controls;
    std::vector<const char*> institutions;
};

const std::vector<TargetSpec>& catalogue() {
    static const std::vector<TargetSpec> specs = {
        {"T_TRPARL_11", "trust in the parliament (0-10 scale)", "trust in political institutions",
         ValueModel::Trust11,
         {"On a scale from 0 to 10, how much do you personally trust {inst}?",
          "Using this card, please tell me on a score of 0 to 10 how much you trust {inst}.",
          "How much do you trust {inst}? 0 means no trust at all and 10 means complete trust.",
          "Trust in {inst}, scale from 0 to 10",
          "Trust in {inst} (0-10)",
          "Please rate your trust in {inst} from 0 to 10."},
         {"C_TRPARL_SCALE", "C_TRPARL_DIRECTION"},
         {"parliament", "the parliament", "the national parliament", "the country's parliament"}},
        {"T_TRPARL_DISTRIB", "trust in the parliament", "trust in political institutions", ValueModel::Trust4,
         {"How much confidence do you have in {inst}: a great deal, quite a lot, not very much or none at all?",
          "Do you tend to trust or tend not to trust {inst}?",
          "Trust in {inst}: a great deal, some, hardly any?",
          "Trust in {inst}, four-point scale",
          "How much do you trust {inst}: fully, somewhat, not much or not at all?",
          "Confidence in {inst}"},
         {"C_TRPARL_SCALE", "C_TRPARL_DIRECTION"},
         {"parliament", "the parliament", "the national parliament", "the country's parliament"}},
        {"T_TRLEG_DISTRIB", "trust in the legal system", "trust in political institutions", ValueModel::Trust4,
         {"How much confidence do you have in {inst}: a great deal, quite a lot, not very much or none at all?",
          "Do you tend to trust or tend not to trust {inst}?",
          "Confidence in {inst}",
          "How much do you trust {inst}?",
          "Trust in {inst}, four-point scale",
          "Please tell me how much confidence you have in {inst}."},
         {"C_TRLEG_SCALE"},
         {"the legal system", "the courts", "the justice system", "the judiciary"}},
        {"T_TRGOV_DISTRIB", "trust in the government", "trust in political institutions", ValueModel::Trust4,
         {"How much confidence do you have in {inst}: a great deal, quite a lot, not very much or none at all?",
          "Do you tend to trust or tend not to trust {inst}?",
          "Confidence in {inst}",
          "How much do you trust {inst}?",
          "Trust in {inst}: a great deal, some, hardly any?",
          "Please tell me how much confidence you have in {inst}."},
         {"C_TRGOV_SCALE"},
         {"the government", "the national government", "the cabinet", "the government in the capital"}},
        {"T_INTPOL_DISTRIB", "interest in politics", "interests", ValueModel::Interest4,
         {"How interested would you say you are in {inst}?",
          "How interested are you in {inst}: very interested, somewhat interested, not very interested or not at all?",
          "Would you say you are interested in {inst}?",
          "Interest in {inst}",
          "How much are you interested in {inst}?",
          "Generally speaking, how interested are you in {inst}?"},
         {"C_INTPOL_SCALE"},
         {"politics", "political affairs", "politics and public affairs"}},
        {"T_DEMONST", "participation in demonstrations", "political behavior", ValueModel::Binary,
         {"Have you taken part in a lawful demonstration in the last {period}?",
          "During the last {period}, have you participated in a public demonstration?",
          "Participation in demonstrations: have you attended a demonstration in the last {period}?",
          "Did you take part in an authorized demonstration in the last {period}?",
          "Have you participated in an unauthorized demonstration or protest march in the last {period}?",
          "Have you ever attended a demonstration?",
          "Participation in a demonstration or protest march in the last {period}"},
         {"C_PR_DEMONST_YEARS", "C_PR_DEMONST_AUTH", "C_PR_DEMONST_FORMAT", "C_PR_DEMONST_EVER"},
         {}},
        {"T_PETITION", "signing petitions", "political behavior", ValueModel::Binary,
         {"Have you signed a petition in the last {period}?",
          "During the last {period}, have you signed a petition or a public letter?",
          "Signing a petition: have you done this in the last {period}?",
          "Have you ever signed a petition?",
          "Did you sign any petition in the last {period}?",
          "Have you collected signatures or signed a petition in the last {period}?"},
         {"C_PR_PETITION_YEARS"},
         {}},
        {"T_AGE", "age", "socio-demographics", ValueModel::Age,
         {"How old are you?", "What is your age in years?", "Age of {inst}",
          "Could you tell me how old you are?", "In what year were you born and how old are you now?",
          "Age of {inst} at last birthday"},
         {},
         {"respondent", "the respondent"}},
        {"T_GENDER", "gender", "socio-demographics", ValueModel::Gender,
         {"Sex of {inst}: male or female", "Are you male or female?", "Sex of {inst}",
          "Gender of {inst}, recorded by the interviewer", "What is your gender?",
          "Interviewer: code the sex of {inst}"},
         {},
         {"respondent", "the respondent"}},
        {"T_EDU", "education", "socio-demographics", ValueModel::Education,
         {"What is the highest level of education you have completed?",
          "What is the highest educational degree that you have obtained?",
          "Highest level of schooling completed by {inst}",
          "How many years of full time education have you completed?",
          "What is the highest school level you have attained?",
          "Education of {inst}: highest qualification achieved"},
         {"C_EDU_SCALE"},
         {"respondent", "the respondent"}},
        {"T_TRPARTY_DISTRIB", "trust in political parties", "trust in political institutions", ValueModel::Trust4,
         {"How much confidence do you have in {inst}?",
          "Do you tend to trust or tend not to trust {inst}?",
          "Trust in {inst}: a great deal, some, hardly any?",
          "How much do you trust {inst}?"},
         {},
         {"political parties", "the political parties"}},
        {"T_METRO", "living in metropolitan area", "socio-demographics", ValueModel::Binary,
         {"Do you live in a big city or metropolitan area?", "Size of town: metropolitan area or not",
          "Would you describe the place where you live as a big city?",
          "Is the respondent living in a metropolitan area?"},
         {},
         {}},
    };
    return specs;
}

const char* const kPeriods[] = {"twelve months", "year", "2 years", "3 years", "5 years", "10 years"};

struct SurveySpec {
    const char* name;
    const char* description;
    int region;  // 0 Europe, 1 Latin America, 2 Asia, 3 world
    std::vector<int> years;
};

std::vector<SurveySpec> survey_catalogue() {
    auto range = [](int a, int b, int step) {
        std::vector<int> v;
        for (int y = a; y <= b; y += step) v.push_back(y);
        return v;
    };
    std::vector<int> wvs = {1990, 1995, 1996, 1997, 1998, 2005, 2006, 2007, 2010, 2011, 2012, 2013, 2014};
    return {
        {"ESS", "European Social Survey: biennial survey of social structure, conditions and attitudes in Europe since 2002.", 0, range(2002, 2014, 2)},
        {"ISSP", "International Social Survey Programme: continuing cross-national collaboration on social science topics.", 3, range(1990, 2015, 1)},
        {"LITS", "Life in Transition Survey: conducted in 2006 and 2010 in central-eastern Europe and the Baltic states.", 0, {2006, 2010}},
        {"WVS", "World Values Survey: economic life, religion and basic political values worldwide.", 3, wvs},
        {"EVS", "European Values Study: social, political and economic values, conducted about every nine years.", 0, {1990, 1999, 2008}},
        {"LB", "Latinobarometro: annual public opinion survey in Latin America.", 1, range(1995, 2015, 1)},
        {"ASES", "Asia Europe Survey: attitudes in Asian and European countries.", 2, {2000}},
        {"CB", "Caucasus Barometer: household survey in the South Caucasus.", 0, range(2008, 2013, 1)},
    };
}

const std::vector<std::string> kEurope = {"ALB", "AUT", "BEL", "BGR", "CHE", "CZE", "DEU", "DNK", "ESP", "EST",
                                          "FIN", "FRA", "GBR", "GRC", "HRV", "HUN", "IRL", "ITA", "LTU", "LVA",
                                          "NLD", "NOR", "POL", "PRT", "ROU", "SVK", "SVN", "SWE", "UKR", "SRB"};
const std::vector<std::string> kLatin = {"ARG", "BOL", "BRA", "CHL", "COL", "CRI", "DOM", "ECU", "GTM", "HND",
                                         "MEX", "NIC", "PAN", "PER", "PRY", "SLV", "URY", "VEN"};
const std::vector<std::string> kAsia = {"CHN", "IDN", "IND", "JPN", "KOR", "MYS", "PHL", "THA", "TWN", "VNM",
                                        "PAK", "MNG"};

std::map<int, std::string> code_labels(ValueModel model) {
    switch (model) {
        case ValueModel::Trust11: {
            std::map<int, std::string> m;
            for (int i = 0; i <= 10; ++i) m[i] = std::to_string(i);
            m[0] = "no trust at all";
            m[10] = "complete trust";
            return m;
        }
        case ValueModel::Trust4:
            return {{1, "none at all"}, {2, "not very much"}, {3, "quite a lot"}, {4, "a great deal"}};
        case ValueModel::Interest4:
            return {{1, "not at all interested"}, {2, "not very interested"}, {3, "somewhat interested"},
                    {4, "very interested"}};
        case ValueModel::Binary: return {{0, "no"}, {1, "yes"}};
        case ValueModel::Age: return {};
        case ValueModel::Gender: return {{1, "male"}, {2, "female"}};
        case ValueModel::Education:
            return {{1, "primary or less"}, {2, "lower secondary"}, {3, "upper secondary"},
                    {4, "post-secondary"}, {5, "tertiary"}};
    }
    return {};
}

std::map<int, std::string> control_labels(const std::string& name) {
    if (name == "C_PR_DEMONST_YEARS" || name == "C_PR_PETITION_YEARS") {
        return {{1, "twelve months"}, {2, "1 year"}, {3, "2 years"}, {4, "3 years"}, {5, "5 years"},
                {6, "10 years"}, {9, "ever"}};
    }
    if (name == "C_PR_DEMONST_AUTH") return {{1, "any"}, {2, "authorized"}, {3, "unauthorized"}};
    if (name == "C_PR_DEMONST_FORMAT") return {{1, "yes/no"}, {2, "frequency"}};
    if (name == "C_PR_DEMONST_EVER") return {{0, "time-bounded"}, {1, "ever"}};
    if (name.find("DIRECTION") != std::string::npos) return {{0, "ascending"}, {1, "descending"}};
    return {{4, "4-point"}, {5, "5-point"}, {7, "7-point"}, {11, "11-point"}};
}

const char* const kQualityFlags[] = {"Q_WEIGHT", "Q_DUPLICATE", "Q_PROCESSING", "Q_DOC"};

std::string fill_template(std::string text, std::string_view slot, std::string_view value) {
    for (auto pos = text.find(slot); pos != std::string::npos; pos = text.find(slot, pos + value.size())) {
        text.replace(pos, slot.size(), value);
    }
    return text;
}

struct Row {
    RespondentKey key;
    std::vector<Cell> cells;
};

struct Generator {
    const FixtureSpec& spec;
    std::mt19937_64 rng;
    std::vector<const TargetSpec*> targets;
    std::vector<SurveySpec> surveys;
    std::vector<std::string> columns;
    std::map<std::string, std::size_t> column_of;
    std::vector<Row> rows;

    const CountryGapsFact* gaps = nullptr;
    const SurveyCoverageFact* coverage = nullptr;
    const QualityContrastFact* contrast = nullptr;
    const WaveQualityFact* waves = nullptr;

    explicit Generator(const FixtureSpec& s) : spec(s), rng(s.seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
    int uniform_int(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }

    void validate_and_bind() {
        const auto& cat = catalogue();
        if (spec.n_targets < 2 || spec.n_targets > static_cast<int>(cat.size())) {
            throw Error(ErrorCode::InconsistentSpec,
                        "n_targets must lie in [2, " + std::to_string(cat.size()) + "]");
        }
        auto all_surveys = survey_catalogue();
        if (spec.n_surveys < 1 || spec.n_surveys > static_cast<int>(all_surveys.size())) {
            throw Error(ErrorCode::InconsistentSpec, "n_surveys out of range");
        }
        if (spec.year_first > spec.year_last || spec.year_first < 1900 || spec.year_last > 2100) {
            throw Error(ErrorCode::InconsistentSpec, "invalid year range");
        }
        if (spec.countries_per_survey_year < 1 || spec.respondents_per_country < 1 ||
            spec.n_questions_per_target < 1 || (spec.total_questions && *spec.total_questions < 1)) {
            throw Error(ErrorCode::InconsistentSpec, "generation counts must be positive");
        }
        for (int i = 0; i < spec.n_targets; ++i) targets.push_back(&cat[static_cast<std::size_t>(i)]);
        for (int i = 0; i < spec.n_surveys; ++i) {
            auto s = all_surveys[static_cast<std::size_t>(i)];
            std::erase_if(s.years, [&](int y) { return y < spec.year_first || y > spec.year_last; });
            surveys.push_back(std::move(s));
        }

        auto has_target = [&](const std::string& name) {
            return std::any_of(targets.begin(), targets.end(), [&](auto* t) { return t->name == name; });
        };
        auto has_survey = [&](const std::string& name) {
            return std::any_of(surveys.begin(), surveys.end(), [&](auto& s) { return s.name == name; });
        };
        auto in_range = [&](int y) { return y >= spec.year_first && y <= spec.year_last; };

        for (const auto& fact : spec.scripted_facts) {
            if (auto* f = std::get_if<CountryGapsFact>(&fact)) {
                gaps = f;
                if (!in_range(f->first_year) || !in_range(f->last_year) || f->first_year > f->last_year) {
                    throw Error(ErrorCode::InconsistentSpec, "country gap years outside the year range");
                }
                for (const auto& [year, target] : f->gaps) {
                    if (year < f->first_year || year > f->last_year || !has_target(target)) {
                        throw Error(ErrorCode::InconsistentSpec, "gap (" + std::to_string(year) + ", " +
                                                                     target + ") is not generable");
                    }
                }
            } else if (auto* f = std::get_if<SurveyCoverageFact>(&fact)) {
                coverage = f;
                if (!has_survey(f->survey)) {
                    throw Error(ErrorCode::InconsistentSpec, "coverage survey '" + f->survey + "' not generated");
                }
                const std::size_t pool = kEurope.size() + kLatin.size() + kAsia.size();
                for (const auto& [year, count] : f->countries_per_year) {
                    if (!in_range(year) || count < 1 || static_cast<std::size_t>(count) > pool) {
                        throw Error(ErrorCode::InconsistentSpec, "coverage fact not generable");
                    }
                }
            } else if (auto* f = std::get_if<QualityContrastFact>(&fact)) {
                contrast = f;
                if (!has_target(f->correlated_target) || !has_target(f->independent_target)) {
                    throw Error(ErrorCode::InconsistentSpec, "quality contrast targets not generated");
                }
            } else if (auto* f = std::get_if<WaveQualityFact>(&fact)) {
                waves = f;
                if (has_survey(f->survey)) {
                    throw Error(ErrorCode::InconsistentSpec, "wave quality survey name collides");
                }
                for (const auto& w : f->waves) {
                    if (!in_range(w.year) || w.rows < 1 || w.issue_free < 0 || w.issue_free > w.rows) {
                        throw Error(ErrorCode::InconsistentSpec, "wave quality fact not generable");
                    }
                }
            }
        }
        if (gaps && !has_survey("ESS") && !has_survey("ISSP")) {
            throw Error(ErrorCode::InconsistentSpec, "country gaps need ESS or ISSP");
        }
    }

    std::vector<VariableDescriptor> variables() {
        std::vector<VariableDescriptor> vars;
        std::set<std::string> controls_seen;
        std::vector<VariableDescriptor> control_vars;
        for (const auto* t : targets) {
            VariableDescriptor v;
            v.name = t->name;
            v.kind = VariableKind::Target;
            v.label = t->label;
            v.topic = t->topic;
            v.value_labels = code_labels(t->model);
            for (const char* c : t->controls) {
                v.controls.push_back(c);
                if (controls_seen.insert(c).second) {
                    VariableDescriptor cv;
                    cv.name = c;
                    cv.kind = VariableKind::HarmonizationControl;
                    cv.label = std::string("harmonization control for ") + t->label;
                    cv.topic = t->topic;
                    cv.value_labels = control_labels(c);
                    control_vars.push_back(std::move(cv));
                }
            }
            for (const char* q : kQualityFlags) v.quality_flags.push_back(q);
            vars.push_back(std::move(v));
        }
        for (auto& cv : control_vars) vars.push_back(std::move(cv));
        for (const char* q : kQualityFlags) {
            VariableDescriptor qv;
            qv.name = q;
            qv.kind = VariableKind::QualityControl;
            qv.label = std::string("source data quality: ") + q;
            qv.topic = "quality control";
            qv.value_labels = {{0, "no issue"}, {1, "issue"}};
            vars.push_back(std::move(qv));
        }
        return vars;
    }

    Cell draw_value(ValueModel model, double latent) {
        switch (model) {
            case ValueModel::Trust11:
                return std::clamp(static_cast<int>(std::lround(5 + 2.0 * latent + normal())), 0, 10);
            case ValueModel::Trust4:
            case ValueModel::Interest4:
                return std::clamp(static_cast<int>(std::lround(2.5 + 0.8 * latent + 0.6 * normal())), 1, 4);
            case ValueModel::Binary: return uniform() < 0.25 ? 1 : 0;
            case ValueModel::Age: return uniform_int(18, 90);
            case ValueModel::Gender: return uniform_int(1, 2);
            case ValueModel::Education: return uniform_int(1, 5);
        }
        return std::nullopt;
    }

    struct Block {
        std::map<std::string, bool> target_missing;
        std::map<std::string, int> control_value;
        double issue_rate = 0.1;
    };

    Block make_block(bool allow_missing) {
        Block b;
        for (const auto* t : targets) b.target_missing[t->name] = allow_missing && uniform() < 0.12;
        for (const auto& name : columns) {
            if (name.rfind("C_", 0) == 0) {
                auto labels = control_labels(name);
                auto it = labels.begin();
                std::advance(it, uniform_int(0, static_cast<int>(labels.size()) - 1));
                b.control_value[name] = it->first;
            }
        }
        b.issue_rate = 0.05 + 0.15 * uniform();
        return b;
    }

    void emit_row(RespondentKey key, const Block& block, bool cell_missing,
                  const std::map<std::string, bool>& forced_missing,
                  const std::optional<bool>& forced_issue = std::nullopt) {
        Row row;
        row.key = std::move(key);
        row.cells.assign(columns.size(), std::nullopt);
        const double trust = normal();
        for (const auto* t : targets) {
            bool missing = block.target_missing.at(t->name) || (cell_missing && uniform() < 0.03);
            if (auto it = forced_missing.find(t->name); it != forced_missing.end()) missing = it->second;
            Cell value = draw_value(t->model, trust);
            if (!missing) row.cells[column_of.at(t->name)] = value;
        }
        for (const auto& [name, value] : block.control_value) row.cells[column_of.at(name)] = value;

        double rate = block.issue_rate;
        if (contrast) {
            const auto& cell = row.cells[column_of.at(contrast->correlated_target)];
            if (cell && *cell > 0) rate += 0.35;
        }
        for (const char* q : kQualityFlags) {
            bool issue = forced_issue ? *forced_issue : uniform() < rate;
            row.cells[column_of.at(q)] = issue ? 1 : 0;
        }
        rows.push_back(std::move(row));
    }

    void emit_country(const std::string& survey, int year, const std::string& country, int count,
                      const Block& block, bool cell_missing,
                      const std::map<std::string, bool>& forced_missing = {}) {
        for (int k = 0; k < count; ++k) {
            RespondentKey key;
            key.respondent_id = survey + "-" + std::to_string(year) + "-" + country + "-" + std::to_string(k + 1);
            key.survey = survey;
            key.year = year;
            key.country = country;
            emit_row(std::move(key), block, cell_missing, forced_missing);
        }
    }

    std::vector<std::string> pick_countries(int region, int count) {
        std::vector<std::string> pool;
        if (region == 0 || region == 3) pool.insert(pool.end(), kEurope.begin(), kEurope.end());
        if (region == 1 || region == 3) pool.insert(pool.end(), kLatin.begin(), kLatin.end());
        if (region == 2 || region == 3) pool.insert(pool.end(), kAsia.begin(), kAsia.end());
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(count)));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    void generate_rows() {
        std::map<int, int> coverage_years;
        if (coverage) {
            for (const auto& [y, c] : coverage->countries_per_year) coverage_years[y] = c;
        }
        for (const auto& s : surveys) {
            for (int year : s.years) {
                if (coverage && s.name == coverage->survey && coverage_years.contains(year)) continue;
                Block block = make_block(true);
                for (const auto& country : pick_countries(s.region, spec.countries_per_survey_year)) {
                    emit_country(s.name, year, country, spec.respondents_per_country, block, true);
                }
            }
        }
        if (coverage) {
            for (const auto& [year, count] : coverage->countries_per_year) {
                Block block = make_block(false);
                std::vector<std::string> chosen;
                if (year == 2006 || count > 12) {
                    // Wide coverage includes Latin America; narrow years do not.
                    chosen = pick_countries(3, count);
                } else {
                    chosen = pick_countries(0, count);
                }
                for (const auto& country : chosen) {
                    emit_country(coverage->survey, year, country, spec.respondents_per_country, block, false);
                }
            }
        }
        if (gaps) {
            std::vector<int> years;
            if (spec.year_first <= 1995 && 1995 <= spec.year_last) years.push_back(1995);
            for (int y = gaps->first_year; y <= gaps->last_year; ++y) years.push_back(y);
            bool has_ess = std::any_of(surveys.begin(), surveys.end(), [](auto& s) { return std::string(s.name) == "ESS"; });
            bool has_issp = std::any_of(surveys.begin(), surveys.end(), [](auto& s) { return std::string(s.name) == "ISSP"; });
            for (int year : years) {
                std::string survey = (year % 2 == 0 && has_ess) || !has_issp ? "ESS" : "ISSP";
                Block block = make_block(true);
                std::map<std::string, bool> forced;
                for (const auto& [gy, target] : gaps->gaps) forced[target] = false;
                for (const auto& [gy, target] : gaps->gaps) {
                    if (gy == year) forced[target] = true;
                }
                emit_country(survey, year, gaps->country, spec.respondents_per_country * 3, block, true, forced);
            }
        }
        if (waves) {
            for (const auto& w : waves->waves) {
                Block block = make_block(false);
                std::vector<bool> issue(static_cast<std::size_t>(w.rows), true);
                std::fill(issue.begin(), issue.begin() + w.issue_free, false);
                std::shuffle(issue.begin(), issue.end(), rng);
                for (int k = 0; k < w.rows; ++k) {
                    RespondentKey key;
                    key.respondent_id = waves->survey + "-" + w.name + "-" + std::to_string(k + 1);
                    key.survey = waves->survey;
                    key.wave = w.name;
                    key.year = w.year;
                    key.country = "DEU";
                    emit_row(std::move(key), block, false, {}, issue[static_cast<std::size_t>(k)]);
                }
            }
        }

        // Waves: W1.. in year order per survey, unless scripted.
        std::map<std::string, std::set<int>> years_of;
        for (const auto& r : rows) {
            if (r.key.wave.empty()) years_of[r.key.survey].insert(r.key.year);
        }
        for (auto& r : rows) {
            if (!r.key.wave.empty()) continue;
            const auto& ys = years_of[r.key.survey];
            auto idx = std::distance(ys.begin(), ys.find(r.key.year));
            r.key.wave = "W" + std::to_string(idx + 1);
        }
    }

    std::string wave_of(const std::string& survey, int year) const {
        for (const auto& r : rows) {
            if (r.key.survey == survey && r.key.year == year) return r.key.wave;
        }
        return "W1";
    }

    std::vector<QuestionRecord> questions() {
        std::vector<std::pair<std::string, int>> survey_years;
        for (const auto& s : surveys) {
            for (int y : s.years) survey_years.emplace_back(s.name, y);
        }
        const int total = spec.total_questions.value_or(spec.n_questions_per_target * spec.n_targets);
        std::vector<QuestionRecord> out;
        for (int i = 0; i < total; ++i) {
            const auto* t = targets[static_cast<std::size_t>(i % spec.n_targets)];
            const char* tmpl = t->templates[static_cast<std::size_t>(uniform_int(0, static_cast<int>(t->templates.size()) - 1))];
            std::string text = fill_template(tmpl, "{period}", kPeriods[uniform_int(0, static_cast<int>(std::size(kPeriods)) - 1)]);
            if (!t->institutions.empty()) {
                const int pick = uniform_int(0, static_cast<int>(t->institutions.size()) - 1);
                text = fill_template(text, "{inst}", t->institutions[static_cast<std::size_t>(pick)]);
            }
            if (!text.empty()) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
            QuestionRecord q;
            q.id = i;
            q.text = std::move(text);
            const auto& [survey, year] = survey_years[static_cast<std::size_t>(
                uniform_int(0, static_cast<int>(survey_years.size()) - 1))];
            q.survey = survey;
            q.year = year;
            q.wave = wave_of(survey, year);
            q.target = t->name;
            out.push_back(std::move(q));
        }
        return out;
    }
};

}  // namespace

std::vector<ScriptedFact> default_facts() {
    return {CountryGapsFact{}, SurveyCoverageFact{}, QualityContrastFact{}, WaveQualityFact{}};
}

std::vector<std::string> target_catalogue() {
    std::vector<std::string> names;
    for (const auto& t : catalogue()) names.emplace_back(t.name);
    return names;
}

FixtureFiles generate(const FixtureSpec& spec) {
    Generator gen(spec);
    gen.validate_and_bind();

    Metadata meta;
    meta.variables = VariableRegistry(gen.variables());
    meta.missing_sentinels = {-9, -8};
    meta.quality_no_issue_code = 0;
    for (const auto& s : gen.surveys) meta.survey_descriptions[s.name] = s.description;
    if (gen.waves) meta.survey_descriptions[gen.waves->survey] = "Two-wave pilot survey with audited quality flags.";

    for (const auto& v : meta.variables.all()) {
        if (v.kind != VariableKind::Source) {
            gen.column_of[v.name] = gen.columns.size();
            gen.columns.push_back(v.name);
        }
    }
    gen.generate_rows();
    meta.questions = gen.questions();

    FixtureFiles files;
    std::string csv = "respondent_id,survey,wave,year,country";
    for (const auto& c : gen.columns) csv += "," + c;
    csv += "\n";
    for (const auto& r : gen.rows) {
        csv += r.key.respondent_id + "," + r.key.survey + "," + r.key.wave + "," + std::to_string(r.key.year) +
               "," + r.key.country;
        for (const auto& cell : r.cells) {
            csv.push_back(',');
            if (cell) csv += std::to_string(*cell);
            else if (gen.uniform() < 0.5) csv += "-9";
        }
        csv.push_back('\n');
    }
    files.data_csv = std::move(csv);
    files.metadata_json = serialize_metadata(meta);

    if (spec.embedding_dim > 0) {
        std::map<std::string, VectorX<double>> centroid;
        for (const auto* t : gen.targets) {
            VectorX<double> c(spec.embedding_dim);
            for (int d = 0; d < spec.embedding_dim; ++d) c(d) = gen.normal();
            centroid[t->name] = c;
        }
        MatrixX<double> rows(static_cast<Eigen::Index>(meta.questions.size()), spec.embedding_dim);
        for (std::size_t i = 0; i < meta.questions.size(); ++i) {
            const auto& c = centroid[meta.questions[i].target];
            for (int d = 0; d < spec.embedding_dim; ++d) {
                rows(static_cast<Eigen::Index>(i), d) = c(d) + 0.3 * gen.normal();
            }
        }
        files.embeddings = encode_embedding_table(make_embedding_table(rows));
    }
    return files;
}

void write_files(const FixtureFiles& files, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "data.csv", files.data_csv);
    write_text_file(dir / "metadata.json", files.metadata_json);
    if (files.embeddings) write_text_file(dir / "embeddings.sdre", *files.embeddings);
}

}  // namespace sdrq::fixtures
