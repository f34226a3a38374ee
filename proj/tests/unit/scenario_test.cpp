#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "rankforge/error.hpp"
#include "rankforge/scenario.hpp"
#include "support.hpp"

using namespace rankforge;
using rftest::toy_spec;

namespace {

EnsembleModel toy_model(std::size_t members = 4) {
  const auto spec = toy_spec();
  std::vector<LinearMember> p, q, r;
  for (std::size_t m = 0; m < members; ++m) {
    const double j = static_cast<double>(m) * 0.1;
    p.push_back({10.0 + j, {0.5 + j}});
    q.push_back({5.0, {0.3, -0.2 + j}});
    r.push_back({40.0 - j, {0.1}});
  }
  return rftest::linear_model(spec, {p, q, r});
}

RankeeRecord toy_baseline() {
  return rftest::make_record(toy_spec(), "US", 2020, {{"a", 50}, {"b", 50}, {"c", 50}},
                             {{"P", 40}, {"Q", 30}, {"R", 45}});
}

std::vector<Scenario> random_scenarios(std::mt19937_64& rng, std::size_t n, std::size_t members) {
  const auto spec = toy_spec();
  std::uniform_real_distribution<double> centre(20, 80), spread(0, 10), attr(0, 100);
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::vector<double>> m;
    for (int k = 0; k < 3; ++k) {
      const double c = centre(rng), w = spread(rng);
      m.push_back(rftest::uniform_members(rng, members, c - w, c + w));
    }
    out.push_back(rftest::make_scenario(static_cast<int>(i), spec, m,
                                        {{"a", attr(rng)}, {"b", attr(rng)}, {"c", attr(rng)}}));
  }
  return out;
}

}  // namespace

TEST(Generate, CountIsProductOfRangeSizes) {
  const auto model = toy_model();
  const std::vector<AttributeRange> ranges{AttributeRange::stepped("a", 10, 30, 10),
                                           AttributeRange::stepped("b", 0, 30, 10),
                                           {"c", {20, 60}}};
  const auto s = generate_scenarios(ranges, toy_baseline(), model);
  ASSERT_EQ(s.size(), 24u);
  // last attribute varies fastest
  EXPECT_DOUBLE_EQ(s[0].attribute_values.at("c"), 20);
  EXPECT_DOUBLE_EQ(s[1].attribute_values.at("c"), 60);
  EXPECT_DOUBLE_EQ(s[2].attribute_values.at("b"), 10);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i].scenario_id, static_cast<int>(i));
}

TEST(Generate, BaselineSingletonsGiveOneZeroDeltaScenario) {
  const auto s = generate_scenarios(std::vector<AttributeRange>{AttributeRange::single("a", 50),
                                                                AttributeRange::single("b", 50),
                                                                AttributeRange::single("c", 50)},
                                    toy_baseline(), toy_model());
  ASSERT_EQ(s.size(), 1u);
  for (const auto& [id, d] : s[0].attribute_deltas) EXPECT_EQ(d.value, 0.0) << id;
}

TEST(Generate, CapacityErrorReportsProduct) {
  const std::vector<AttributeRange> ranges{AttributeRange::stepped("a", 0, 10, 1),
                                           AttributeRange::stepped("b", 0, 10, 1),
                                           AttributeRange::stepped("c", 0, 12, 1)};
  try {
    generate_scenarios(ranges, toy_baseline(), toy_model(), 1000);
    FAIL();
  } catch (const CapacityError& e) {
    EXPECT_EQ(e.requested(), 1573u);
    EXPECT_EQ(e.cap(), 1000u);
    EXPECT_NE(std::string(e.what()).find("1573"), std::string::npos);
  }
}

TEST(Generate, OutOfDomainValueIsRejected) {
  const std::vector<AttributeRange> ranges{{"a", {50, 150}}};
  EXPECT_THROW(generate_scenarios(ranges, toy_baseline(), toy_model()), Error);
}

TEST(Generate, PredictionsMatchDirectEvaluation) {
  const auto model = toy_model();
  const std::vector<AttributeRange> ranges{{"a", {20, 80}}, {"c", {10}}};
  const auto s = generate_scenarios(ranges, toy_baseline(), model);
  for (const auto& sc : s) {
    const auto direct = predict_all_indicators(model, sc.attribute_values);
    EXPECT_EQ(sc.indicator_predictions, direct);
    EXPECT_EQ(sc.final_prediction, predict_final(direct, model.spec()));
  }
}

TEST(Filter, EmptyFilterIsIdentity) {
  std::mt19937_64 rng(1);
  const auto s = random_scenarios(rng, 20, 5);
  EXPECT_EQ(filter_indices(s, {}, toy_baseline(), toy_spec()).size(), s.size());
}

TEST(Filter, InfiniteBoundIsVacuous) {
  std::mt19937_64 rng(2);
  const auto s = random_scenarios(rng, 20, 5);
  const auto f = ScenarioFilter::parse("ind:P mean>inf");
  EXPECT_TRUE(filter_indices(s, f, toy_baseline(), toy_spec()).empty());
}

TEST(Filter, MeanDeltaMatchesLinearScan) {
  std::mt19937_64 rng(3);
  const auto s = random_scenarios(rng, 100, 7);
  const auto base = toy_baseline();
  const auto got = filter_indices(s, ScenarioFilter::parse("ind:Q mean>0"), base, toy_spec());
  std::vector<std::size_t> oracle;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& m = s[i].indicator_predictions.at("Q").members();
    const double mean = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
    if (mean - 30.0 > 0) oracle.push_back(i);
  }
  EXPECT_EQ(got, oracle);
}

TEST(Filter, MemberMeasureRequiresEveryMember) {
  std::mt19937_64 rng(4);
  const auto s = random_scenarios(rng, 100, 7);
  const auto got = filter_indices(s, ScenarioFilter::parse("final member>=-5"), toy_baseline(), toy_spec());
  const double base_final = toy_baseline().final_score;
  std::vector<std::size_t> oracle;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto m = s[i].final_prediction.members();
    if (std::all_of(m.begin(), m.end(), [&](double v) { return v - base_final >= -5; })) oracle.push_back(i);
  }
  EXPECT_EQ(got, oracle);
}

TEST(Filter, TextFormRoundTrips) {
  for (const char* text : {"ind:SFRI mean>0", "final member>=-2", "attr:staff mean in[0,5]",
                           "ind:P mean<1.5;attr:a member<=3"}) {
    const auto f = ScenarioFilter::parse(text);
    EXPECT_EQ(ScenarioFilter::parse(f.to_string()), f) << text;
  }
  EXPECT_THROW(ScenarioFilter::parse("ind:P median>0"), Error);
  EXPECT_THROW(ScenarioFilter::parse("ind:P mean~0"), Error);
}

TEST(Filter, UnknownSubjectIsValidationError) {
  try {
    ScenarioFilter::parse("ind:NOPE mean>0").validate(toy_spec());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
    EXPECT_EQ(e.location(), "filter[0]");
  }
}

TEST(Sort, AlreadySortedIsUnchangedAndReverseIsExact) {
  std::mt19937_64 rng(5);
  auto s = random_scenarios(rng, 30, 5);
  const auto key = Subject::final_score();
  s = sort_scenarios(s, key, SortDirection::ascending, toy_spec());
  const auto again = sort_indices(s, key, SortDirection::ascending, toy_spec());
  for (std::size_t i = 0; i < again.size(); ++i) EXPECT_EQ(again[i], i);
  const auto rev = sort_indices(s, key, SortDirection::descending, toy_spec());
  for (std::size_t i = 0; i < rev.size(); ++i) EXPECT_EQ(rev[i], s.size() - 1 - i);
}

TEST(Sort, MatchesComparisonOracle) {
  std::mt19937_64 rng(6);
  const auto s = random_scenarios(rng, 200, 5);
  for (const auto& key : {Subject::indicator("R"), Subject::attribute("b"), Subject::final_score()}) {
    const auto got = sort_indices(s, key, SortDirection::descending, toy_spec());
    for (std::size_t i = 1; i < got.size(); ++i) {
      EXPECT_GE(sort_key(s[got[i - 1]], key), sort_key(s[got[i]], key));
    }
    auto sorted = got;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
  }
}

TEST(Band, ConstantAndSpreadEnsembles) {
  const auto spec = toy_spec();
  auto base = toy_baseline();
  base.indicator_scores["P"] = 50;
  const auto flat = rftest::make_scenario(0, spec, {{50, 50}, {30, 30}, {45, 45}});
  EXPECT_EQ(uncertainty_band(flat, Subject::indicator("P"), base), (UncertaintyBand{0, 0}));
  const auto wide = rftest::make_scenario(1, spec, {{48, 49, 50, 51, 52}, {30, 30, 30, 30, 30}, {1, 1, 1, 1, 1}});
  EXPECT_EQ(uncertainty_band(wide, Subject::indicator("P"), base), (UncertaintyBand{-2, 2}));
  EXPECT_THROW(uncertainty_band(wide, Subject::attribute("a"), base), Error);
}

TEST(Band, MatchesMemberScan) {
  std::mt19937_64 rng(7);
  const auto s = random_scenarios(rng, 50, 9);
  const auto base = toy_baseline();
  for (const auto& sc : s) {
    const auto m = sc.indicator_predictions.at("R").members();
    const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    const auto band = uncertainty_band(sc, Subject::indicator("R"), base);
    EXPECT_EQ(band.min_delta, *lo - 45.0);
    EXPECT_EQ(band.max_delta, *hi - 45.0);
  }
}

TEST(Histogram, IdenticalScenariosCollapseToOneBin) {
  const auto spec = toy_spec();
  std::vector<Scenario> s;
  for (int i = 0; i < 10; ++i) s.push_back(rftest::make_scenario(i, spec, {{41}, {31}, {46}}));
  const auto h = summarize(s, Subject::indicator("P"), toy_baseline(), 20);
  ASSERT_EQ(h.frequencies.size(), 1u);
  EXPECT_EQ(h.frequencies[0], 10u);
  EXPECT_EQ(h.bin_edges, (std::vector<double>{1, 1}));
}

TEST(Histogram, HandBinnedDeltas) {
  const auto spec = toy_spec();
  std::vector<Scenario> s;
  for (double d : {-1.0, 0.0, 1.0}) s.push_back(rftest::make_scenario(0, spec, {{40 + d}, {30}, {45}}));
  const auto h = summarize(s, Subject::indicator("P"), toy_baseline(), 2);
  EXPECT_EQ(h.bin_edges, (std::vector<double>{-1, 0, 1}));
  EXPECT_EQ(h.frequencies, (std::vector<std::size_t>{1, 2}));
}

TEST(Histogram, MassIsConservedAndPartitionsAdd) {
  std::mt19937_64 rng(8);
  const auto s = random_scenarios(rng, 300, 5);
  const auto base = toy_baseline();
  for (std::size_t bins : {1u, 3u, 20u, 57u}) {
    const auto h = summarize(s, Subject::final_score(), base, bins);
    EXPECT_EQ(h.total(), s.size());
    const std::vector<Scenario> left(s.begin(), s.begin() + 120), right(s.begin() + 120, s.end());
    const auto hl = summarize_with_edges(left, Subject::final_score(), base, h.bin_edges);
    const auto hr = summarize_with_edges(right, Subject::final_score(), base, h.bin_edges);
    for (std::size_t b = 0; b < bins; ++b) EXPECT_EQ(hl.frequencies[b] + hr.frequencies[b], h.frequencies[b]);
  }
}

TEST(Histogram, EmptySubsetGivesEmptySummary) {
  const auto h = summarize(std::vector<Scenario>{}, Subject::final_score(), toy_baseline(), 5);
  EXPECT_EQ(h.total(), 0u);
  EXPECT_TRUE(h.bin_edges.empty());
}
