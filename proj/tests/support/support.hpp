#pragma once

#include <random>
#include <string>
#include <vector>

#include "rankforge/model.hpp"
#include "rankforge/predictor.hpp"
#include "rankforge/scenario.hpp"

namespace rftest {

using namespace rankforge;

// x in [0, 100] feeding a single indicator I.
inline RankingSystemSpec one_attr_spec() {
  RankingSystemSpec s;
  s.attributes = {{"x", "x", "", 0.0, 100.0}};
  s.indicators = {{"I", "I", 1.0, {"x"}}};
  return s;
}

// a, b, c in [0, 100]; P = f(a), Q = f(a, b), R = f(c).
inline RankingSystemSpec toy_spec() {
  RankingSystemSpec s;
  s.attributes = {{"a", "a", "", 0.0, 100.0}, {"b", "b", "", 0.0, 100.0}, {"c", "c", "", 0.0, 100.0}};
  s.indicators = {{"P", "P", 0.5, {"a"}}, {"Q", "Q", 0.3, {"a", "b"}}, {"R", "R", 0.2, {"c"}}};
  return s;
}

inline EnsembleModel linear_model(const RankingSystemSpec& spec,
                                  const std::vector<std::vector<LinearMember>>& per_indicator) {
  std::vector<IndicatorEnsemble> inds;
  for (std::size_t i = 0; i < spec.indicators.size(); ++i) {
    inds.push_back({spec.indicators[i].id, spec.indicators[i].attribute_group, per_indicator[i]});
  }
  return EnsembleModel(spec, std::move(inds), {});
}

inline RankeeRecord make_record(const RankingSystemSpec& spec, std::string id, int year,
                                ValueMap attrs, ValueMap scores) {
  RankeeRecord r;
  r.rankee_id = std::move(id);
  r.year = year;
  r.attribute_values = std::move(attrs);
  r.indicator_scores = std::move(scores);
  r.final_score = aggregate_final_score(r.indicator_scores, spec);
  return r;
}

inline std::vector<double> uniform_members(std::mt19937_64& rng, std::size_t m, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(m);
  for (auto& v : out) v = u(rng);
  return out;
}

// Scenario with the given indicator members (spec order) and derived final.
inline Scenario make_scenario(int id, const RankingSystemSpec& spec,
                              const std::vector<std::vector<double>>& members, ValueMap attrs = {}) {
  Scenario s;
  s.scenario_id = id;
  s.attribute_values = std::move(attrs);
  for (std::size_t i = 0; i < spec.indicators.size(); ++i) {
    s.indicator_predictions.emplace(spec.indicators[i].id,
                                    EnsemblePrediction(spec.indicators[i].id, members[i]));
  }
  s.final_prediction = predict_final(s.indicator_predictions, spec);
  return s;
}

// Exhaustive pairwise win probability, ties one half.
inline double win_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  double wins = 0.0;
  for (double x : a) {
    for (double y : b) wins += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  return wins / static_cast<double>(a.size() * b.size());
}

}  // namespace rftest
