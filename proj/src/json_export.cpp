#include "sdrq/json_export.hpp"

#include <cmath>
#include <unordered_map>

namespace sdrq {
namespace {

Json number_or_null(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

Json year_counts_json(const YearCounts& counts) {
    Json out = Json::object();
    for (const auto& [year, n] : counts) out[std::to_string(year)] = n;
    return out;
}

}  // namespace

Json variables_json(const HarmonizedDataset& dataset) {
    Json out = Json::array();
    for (const auto& v : dataset.variables().all()) {
        Json labels = Json::object();
        for (const auto& [code, label] : v.value_labels) labels[std::to_string(code)] = label;
        Json available = nullptr;
        if (auto col = dataset.value_column_index(v.name)) {
            long n = 0;
            for (const auto& cell : dataset.column(*col)) n += cell.has_value();
            available = n;
        }
        out.push_back({{"name", v.name},
                       {"kind", to_string(v.kind)},
                       {"label", v.label},
                       {"topic", v.topic},
                       {"value_labels", labels},
                       {"controls", v.controls},
                       {"quality_flags", v.quality_flags},
                       {"available", available}});
    }
    return out;
}

Json questions_json(const std::vector<QuestionRecord>& questions) {
    Json out = Json::array();
    for (const auto& q : questions) {
        out.push_back({{"id", q.id},
                       {"text", q.text},
                       {"survey", q.survey},
                       {"wave", q.wave},
                       {"year", q.year},
                       {"target", q.target}});
    }
    return out;
}

Json neighbors_json(const std::vector<Neighbor>& neighbors) {
    Json out = Json::array();
    for (const auto& n : neighbors) {
        out.push_back({{"question_id", n.question_id}, {"target", n.target}, {"similarity", n.similarity}});
    }
    return out;
}

Json recommendation_json(const Recommendation& rec) {
    return {{"hard", {{"target", rec.hard.target}, {"probability", rec.hard.probability}}},
            {"soft", neighbors_json(rec.soft)}};
}

Json profile_json(const AvailabilityProfile& profile, const std::optional<std::vector<std::string>>& order) {
    Json separate = Json::object();
    for (const auto& t : profile.targets) separate[t] = year_counts_json(profile.separate.at(t));
    Json cases = Json::object();
    for (const auto& [year, c] : profile.cases) cases[std::to_string(year)] = to_string(c);

    std::unordered_map<std::string, const SurveySummary*> by_name;
    for (const auto& s : profile.surveys) by_name.emplace(s.name, &s);
    std::vector<std::string> names;
    if (order) {
        names = *order;
    } else {
        for (const auto& s : profile.surveys) names.push_back(s.name);
    }

    Json surveys = Json::array();
    for (const auto& name : names) {
        const auto& s = *by_name.at(name);
        Json per_year = Json::object();
        for (const auto& [year, cell] : s.per_year) {
            per_year[std::to_string(year)] = {
                {"micro", cell.micro}, {"macro", cell.macro}, {"countries", cell.countries}};
        }
        surveys.push_back({{"name", s.name},
                           {"quality", number_or_null(s.quality)},
                           {"distinct_years", s.distinct_years},
                           {"description", s.description},
                           {"per_year", per_year}});
    }
    return {{"targets", profile.targets},
            {"level", to_string(profile.level)},
            {"years", profile.years},
            {"separate", separate},
            {"joint", year_counts_json(profile.joint.per_year)},
            {"cases", cases},
            {"surveys", surveys}};
}

Json pair_stats_json(const PairStats& stats) {
    return {{"r", number_or_null(stats.r)},
            {"n", stats.n},
            {"t", number_or_null(stats.t)},
            {"p", number_or_null(stats.p)},
            {"se", number_or_null(stats.se)},
            {"level", to_string(stats.level)}};
}

Json matrix_json(const CorrelationMatrix& matrix) {
    Json cells = Json::array();
    for (const auto& c : matrix.cells) {
        Json cell = pair_stats_json(c.stats);
        cell["a"] = c.a;
        cell["b"] = c.b;
        cells.push_back(std::move(cell));
    }
    return {{"variables", matrix.variables}, {"cells", cells}};
}

Json network_json(const RelationNetwork& network) {
    Json nodes = Json::array();
    for (const auto& n : network.nodes) nodes.push_back({{"name", n.name}, {"kind", to_string(n.kind)}});
    Json edges = Json::array();
    for (const auto& e : network.edges) {
        Json edge = pair_stats_json(e.stats);
        edge["a"] = e.a;
        edge["b"] = e.b;
        edge["undefined"] = e.undefined;
        edges.push_back(std::move(edge));
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

Json projection_json(const ProjectionState& state, const HarmonizedDataset& dataset) {
    std::unordered_map<std::string, const QuestionRecord*> by_id;
    for (const auto& q : dataset.questions()) by_id.emplace(std::to_string(q.id), &q);
    Json out = Json::array();
    for (std::size_t i = 0; i < state.ids.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        Json target = nullptr, topic = nullptr;
        if (auto it = by_id.find(state.ids[i]); it != by_id.end()) {
            target = it->second->target;
            if (const auto* var = dataset.variables().find(it->second->target)) topic = var->topic;
        }
        out.push_back({{"id", state.ids[i]},
                       {"x", state.coords(row, 0)},
                       {"y", state.coords(row, 1)},
                       {"target", target},
                       {"topic", topic}});
    }
    return out;
}

Json information_rows_json(const std::vector<InformationRow>& rows) {
    Json out = Json::array();
    for (const auto& r : rows) {
        out.push_back({{"question_id", r.question_id},
                       {"year", r.year},
                       {"survey", r.survey},
                       {"wave", r.wave},
                       {"question", r.question},
                       {"target", r.target},
                       {"target_label", r.target_label}});
    }
    return out;
}

Json summary_json(const FiveNumberSummary& s) {
    return {{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}};
}

Json provider_scores_json(const std::vector<ProviderScores>& scores) {
    Json out = Json::array();
    for (const auto& s : scores) {
        out.push_back({{"name", s.name}, {"ami", s.ami}, {"summary", summary_json(s.summary)}});
    }
    return out;
}

Json error_json(const Error& error) {
    Json out = {{"code", code_name(error.code())}, {"message", error.what()}};
    if (const auto* pe = dynamic_cast<const ParseError*>(&error)) out["offset"] = pe->offset();
    return out;
}

}  // namespace sdrq
