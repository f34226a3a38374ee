#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rankforge/influence.hpp"
#include "rankforge/model.hpp"
#include "rankforge/predictor.hpp"
#include "rankforge/rival.hpp"
#include "rankforge/scenario.hpp"

// JSON documents exchanged with files, the HTTP service and the CLI.
namespace rankforge {

using Json = nlohmann::json;

/// Throws Error(parse) with a "byte N" location on malformed text.
Json parse_json(std::string_view text);

Json spec_to_json(const RankingSystemSpec& spec);
/// Shape check only; call validate() for the semantic constraints.
RankingSystemSpec spec_from_json(const Json& doc);

Json record_to_json(const RankeeRecord& record);
RankeeRecord record_from_json(const Json& doc);

Json model_to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const Json& doc, const RankingSystemSpec& spec);

Json range_to_json(const AttributeRange& range);
/// Accepts {attribute, values:[...]} or {attribute, min, max, step}.
AttributeRange range_from_json(const Json& doc);

Json predicate_to_json(const FilterPredicate& predicate);
/// Accepts the object form or the text form ("ind:SFRI mean>0").
FilterPredicate predicate_from_json(const Json& doc);
Json filter_to_json(const ScenarioFilter& filter);
ScenarioFilter filter_from_json(const Json& doc);

Json ensemble_to_json(const EnsemblePrediction& ensemble, bool with_members = true);

/// Row of the scenario list: values, deltas against the baseline and bands.
Json scenario_summary_to_json(const Scenario& scenario, const RankeeRecord& baseline,
                              const RankingSystemSpec& spec);
/// Everything, including ensemble members.
Json scenario_to_json(const Scenario& scenario, const RankeeRecord& baseline,
                      const RankingSystemSpec& spec);
Json scenarios_to_json(std::span<const Scenario> scenarios, const RankeeRecord& baseline,
                       const RankingSystemSpec& spec);

/// scenario_id, attr_<id>..., ind_<id>_mean/_min/_max..., final_mean/_min/_max, modal_rank
std::string scenarios_to_csv(std::span<const Scenario> scenarios, const RankingSystemSpec& spec);

Json summary_to_json(const HistogramSummary& summary);
Json influence_to_json(const InfluenceMatrix& matrix);
Json heatmap_to_json(std::span<const WinProbabilityCell> cells);
Json radar_to_json(const RadarPayload& payload);

}  // namespace rankforge
