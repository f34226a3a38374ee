#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "rankforge/error.hpp"
#include "rankforge/rival.hpp"
#include "support.hpp"

using namespace rankforge;
using rftest::win_oracle;

namespace {

RankingSystemSpec single_indicator() { return rftest::one_attr_spec(); }

RankeeRecord rec(int year, double x, double score) {
  return rftest::make_record(single_indicator(), "RV", year, {{"x", x}}, {{"I", score}});
}

EnsembleModel slope_model(std::size_t members) {
  std::vector<LinearMember> m;
  for (std::size_t i = 0; i < members; ++i) m.push_back({10.0 + static_cast<double>(i), {0.5}});
  return rftest::linear_model(single_indicator(), {m});
}

}  // namespace

TEST(WinProbability, IdenticalEnsemblesGiveOneHalf) {
  const EnsemblePrediction a("final", {3, 1, 4, 1, 5});
  EXPECT_EQ(win_probability(a, a), 0.5);
}

TEST(WinProbability, Dominance) {
  EXPECT_EQ(win_probability(EnsemblePrediction::constant("f", 90, 4), EnsemblePrediction::constant("f", 80, 7)), 1.0);
}

TEST(WinProbability, HandEnumeratedPairs) {
  EXPECT_EQ(win_probability(EnsemblePrediction("f", {1, 2, 3}), EnsemblePrediction("f", {2, 2})), 0.5);
}

TEST(WinProbability, MatchesExhaustiveCountWithTies) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 10), val(1, 8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    for (auto& v : a) v = val(rng);
    for (auto& v : b) v = val(rng);
    const double p = win_probability(EnsemblePrediction("f", a), EnsemblePrediction("f", b));
    EXPECT_EQ(p, win_oracle(a, b));
    EXPECT_EQ(p + win_probability(EnsemblePrediction("f", b), EnsemblePrediction("f", a)), 1.0);
  }
}

TEST(RivalMethods, CarryForwardWithSingleYearIsConstant) {
  const std::vector<RankeeRecord> h{rec(2020, 10, 70)};
  const auto preds = predict_rival({RivalMethodId::carry_forward, 8, 3, 1}, h, slope_model(8));
  EXPECT_EQ(preds.at("I").min(), 70);
  EXPECT_EQ(preds.at("I").max(), 70);
  EXPECT_EQ(preds.at("final").mean(), 70);
}

TEST(RivalMethods, CarryForwardResamplesObservedChanges) {
  const std::vector<RankeeRecord> h{rec(2018, 10, 60), rec(2019, 10, 62), rec(2020, 10, 67)};
  const auto preds = predict_rival({RivalMethodId::carry_forward, 50, 3, 9}, h, slope_model(50));
  for (double v : preds.at("I").members()) EXPECT_TRUE(v == 69.0 || v == 72.0) << v;
}

TEST(RivalMethods, TrendExtrapolatesExactLine) {
  const std::vector<RankeeRecord> h{rec(2001, 10, 50), rec(2002, 10, 60)};
  const auto preds = predict_rival({RivalMethodId::trend_extrapolation, 10, 3, 2}, h, slope_model(10));
  // exact fit leaves zero residuals
  EXPECT_NEAR(preds.at("I").min(), 70.0, 1e-9);
  EXPECT_NEAR(preds.at("I").max(), 70.0, 1e-9);
}

TEST(RivalMethods, TrendNeedsTwoYears) {
  const std::vector<RankeeRecord> h{rec(2001, 10, 50)};
  try {
    predict_rival({RivalMethodId::trend_extrapolation, 10, 3, 2}, h, slope_model(10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
  }
}

TEST(RivalMethods, ModelBasedOnOurAttributesEqualsOurPrediction) {
  const auto model = slope_model(6);
  const std::vector<RankeeRecord> h{rec(2019, 5, 40), rec(2020, 42, 41)};
  const auto preds = predict_rival({RivalMethodId::model_based, 6, 3, 0}, h, model);
  EXPECT_EQ(preds.at("I"), predict_indicator(model, "I", {{"x", 42}}));
}

TEST(RivalMethods, SeedsAreDeterministic) {
  const std::vector<RankeeRecord> h{rec(2017, 1, 50), rec(2018, 1, 57), rec(2019, 1, 53), rec(2020, 1, 61)};
  const RivalMethod m{RivalMethodId::trend_extrapolation, 30, 3, 77};
  EXPECT_EQ(predict_rival(m, h, slope_model(30)), predict_rival(m, h, slope_model(30)));
}

TEST(Heatmap, CellsMatchPairwiseOracle) {
  const auto spec = rftest::toy_spec();
  std::mt19937_64 rng(8);
  std::vector<std::vector<double>> ours;
  for (int i = 0; i < 3; ++i) ours.push_back(rftest::uniform_members(rng, 6, 20, 80));
  const auto scenario = rftest::make_scenario(0, spec, ours);

  std::map<std::string, std::vector<RankeeRecord>, std::less<>> histories;
  std::uniform_real_distribution<double> u(20, 80);
  for (const char* id : {"X", "Y"}) {
    for (int year = 2017; year <= 2020; ++year) {
      auto r = rftest::make_record(spec, id, year, {{"a", u(rng)}, {"b", u(rng)}, {"c", u(rng)}},
                                   {{"P", u(rng)}, {"Q", u(rng)}, {"R", u(rng)}});
      histories[id].push_back(r);
    }
  }
  std::vector<LinearMember> p, q, r;
  for (int m = 0; m < 6; ++m) {
    p.push_back({10.0 + m, {0.5}});
    q.push_back({5.0, {0.3, 0.2}});
    r.push_back({30.0 - m, {0.2}});
  }
  const auto model = rftest::linear_model(spec, {p, q, r});
  const auto methods = default_rival_methods(6, 4);
  const auto book = RivalBook::build(histories, methods, model);
  const auto cells = heatmap(scenario, book, spec);
  ASSERT_EQ(cells.size(), 2u * 3u * 4u);
  for (const auto& c : cells) {
    ASSERT_TRUE(c.probability.has_value());
    const auto& rival = book.entry(c.rival_id, c.method).predictions->at(
        c.subject.kind == SubjectKind::final_score ? std::string("final") : c.subject.id);
    const auto& mine = scenario.prediction(c.subject);
    const std::vector<double> a(mine.members().begin(), mine.members().end());
    const std::vector<double> b(rival.members().begin(), rival.members().end());
    EXPECT_EQ(*c.probability, win_oracle(a, b));
  }
}

TEST(Heatmap, IdenticalAndDominatedRivals) {
  const auto spec = rftest::one_attr_spec();
  const auto model = slope_model(4);
  const std::vector<RankeeRecord> h{rec(2020, 40, 30)};
  std::map<std::string, std::vector<RankeeRecord>, std::less<>> histories{{"RV", h}};
  const std::vector<RivalMethod> methods{{RivalMethodId::model_based, 4, 3, 0}};
  const auto book = RivalBook::build(histories, methods, model);

  Scenario same;
  same.indicator_predictions.emplace("I", predict_indicator(model, "I", {{"x", 40}}));
  same.final_prediction = predict_final(same.indicator_predictions, spec);
  for (const auto& c : heatmap(same, book, spec)) EXPECT_EQ(*c.probability, 0.5);

  const auto better = rftest::make_scenario(1, spec, {{99, 99, 99, 99}});
  for (const auto& c : heatmap(better, book, spec)) EXPECT_EQ(*c.probability, 1.0);
}

TEST(ScoreDistribution, ConstantEnsembleHasUnitMassInOneBin) {
  const auto spec = rftest::one_attr_spec();
  const auto d = score_distribution(EnsemblePrediction::constant("I", 70, 10), Subject::indicator("I"), spec);
  ASSERT_EQ(d.density.size(), kDensityBins);
  const double width = (spec.score_max - spec.score_min) / kDensityBins;
  const auto bin = static_cast<std::size_t>((70 - spec.score_min) / width);
  EXPECT_DOUBLE_EQ(d.density[bin], 1.0);
  EXPECT_DOUBLE_EQ(std::accumulate(d.density.begin(), d.density.end(), 0.0), 1.0);
  EXPECT_DOUBLE_EQ(d.expected_value, 70.0);
}

TEST(ScoreDistribution, UniformMembersSpreadEvenly) {
  const auto spec = rftest::one_attr_spec();
  std::mt19937_64 rng(12);
  const auto m = rftest::uniform_members(rng, 100000, 1, 100);
  const auto d = score_distribution(EnsemblePrediction("I", m), Subject::indicator("I"), spec);
  double total = 0;
  for (double mass : d.density) {
    EXPECT_NEAR(mass, 1.0 / kDensityBins, 0.005);
    total += mass;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Radar, UnknownHighlightIsRejected) {
  const auto spec = rftest::one_attr_spec();
  const auto model = slope_model(4);
  std::map<std::string, std::vector<RankeeRecord>, std::less<>> histories{{"RV", {rec(2020, 40, 30)}}};
  const auto methods = default_rival_methods(4, 0);
  const auto book = RivalBook::build(histories, methods, model);
  const auto s = rftest::make_scenario(0, spec, {{50, 51, 52, 53}});
  const auto payload = radar_data(s, book, RivalMethodId::carry_forward, std::string("RV"), spec);
  ASSERT_EQ(payload.subjects.size(), 2u);
  EXPECT_TRUE(payload.subjects[0].highlighted.has_value());
  EXPECT_THROW(radar_data(s, book, RivalMethodId::carry_forward, std::string("ZZ"), spec), Error);
}

TEST(RivalBook, MethodFailureIsRecordedPerEntry) {
  const auto model = slope_model(4);
  std::map<std::string, std::vector<RankeeRecord>, std::less<>> histories{{"RV", {rec(2020, 40, 30)}}};
  const auto methods = default_rival_methods(4, 0);
  const auto book = RivalBook::build(histories, methods, model);
  const auto& trend = book.entry("RV", RivalMethodId::trend_extrapolation);
  EXPECT_FALSE(trend.predictions.has_value());
  EXPECT_FALSE(trend.error.empty());
  EXPECT_TRUE(book.entry("RV", RivalMethodId::carry_forward).predictions.has_value());
}
