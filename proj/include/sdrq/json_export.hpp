#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdrq/availability.hpp"
#include "sdrq/dataset.hpp"
#include "sdrq/error.hpp"
#include "sdrq/evaluate.hpp"
#include "sdrq/recommend.hpp"
#include "sdrq/relations.hpp"
#include "sdrq/tsne.hpp"

namespace sdrq {

using Json = nlohmann::ordered_json;

// Variables with their non-missing row count ("available"; null for Source).
Json variables_json(const HarmonizedDataset& dataset);
Json questions_json(const std::vector<QuestionRecord>& questions);

Json recommendation_json(const Recommendation& rec);
Json neighbors_json(const std::vector<Neighbor>& neighbors);

// Years and counts keyed by decimal strings; quality null for surveys without
// samples. `order`, when given, lists survey names in display order.
Json profile_json(const AvailabilityProfile& profile,
                  const std::optional<std::vector<std::string>>& order = std::nullopt);

// Undefined statistics serialize as null, never NaN.
Json pair_stats_json(const PairStats& stats);
Json matrix_json(const CorrelationMatrix& matrix);
Json network_json(const RelationNetwork& network);

// [{id, x, y, target, topic}]; user inputs carry null target and topic.
Json projection_json(const ProjectionState& state, const HarmonizedDataset& dataset);
Json information_rows_json(const std::vector<InformationRow>& rows);

Json summary_json(const FiveNumberSummary& s);
Json provider_scores_json(const std::vector<ProviderScores>& scores);

// {code, message} plus offset for parse errors.
Json error_json(const Error& error);

}  // namespace sdrq
