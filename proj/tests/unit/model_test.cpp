#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "rankforge/error.hpp"
#include "rankforge/model.hpp"
#include "support.hpp"

using namespace rankforge;

namespace {

RankingSystemSpec weighted(std::vector<double> weights) {
  RankingSystemSpec s;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto id = "a" + std::to_string(i);
    s.attributes.push_back({id, id, "", 0.0, 1.0});
    s.indicators.push_back({"I" + std::to_string(i), "", weights[i], {id}});
  }
  return s;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::io;
}

}  // namespace

TEST(Aggregate, SymmetricMean) {
  const auto spec = weighted({0.5, 0.5});
  EXPECT_DOUBLE_EQ(aggregate_final_score(ValueMap{{"I0", 60}, {"I1", 40}}, spec), 50.0);
}

TEST(Aggregate, SingleIndicatorIsIdentity) {
  const auto spec = weighted({1.0});
  EXPECT_DOUBLE_EQ(aggregate_final_score(ValueMap{{"I0", 73.2}}, spec), 73.2);
}

TEST(Aggregate, ThreeIndicatorDotProduct) {
  const auto spec = weighted({0.4, 0.4, 0.2});
  const double oracle = 0.4 * 80 + 0.4 * 50 + 0.2 * 10;
  EXPECT_NEAR(aggregate_final_score(ValueMap{{"I0", 80}, {"I1", 50}, {"I2", 10}}, spec), oracle, 1e-12);
  EXPECT_NEAR(oracle, 54.0, 1e-12);
}

TEST(Aggregate, MissingIndicatorIsSchemaError) {
  const auto spec = weighted({0.5, 0.5});
  EXPECT_EQ(code_of([&] { aggregate_final_score(ValueMap{{"I0", 60}}, spec); }), ErrorCode::schema);
}

TEST(SpecValidation, WeightsMustSumToOne) {
  const auto spec = weighted({0.5, 0.4});
  try {
    spec.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
    EXPECT_NE(std::string(e.what()).find("sum to 1"), std::string::npos);
  }
}

TEST(SpecValidation, RejectsUndeclaredGroupAttributeAndReservedId) {
  auto spec = weighted({1.0});
  spec.indicators[0].attribute_group = {"nope"};
  EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::validation);
  spec = weighted({1.0});
  spec.indicators[0].id = "final";
  EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::validation);
  spec = weighted({1.0});
  spec.indicators[0].attribute_group.clear();
  EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::validation);
}

TEST(Rank, StrictOrdering) {
  const auto r = rank_entities({{"A", 90}, {"B", 80}, {"C", 70}});
  EXPECT_EQ(r.at("A"), 1);
  EXPECT_EQ(r.at("B"), 2);
  EXPECT_EQ(r.at("C"), 3);
}

TEST(Rank, TiesShareSmallestRank) {
  const auto r = rank_entities({{"A", 90}, {"B", 90}, {"C", 70}});
  EXPECT_EQ(r.at("A"), 1);
  EXPECT_EQ(r.at("B"), 1);
  EXPECT_EQ(r.at("C"), 3);
}

TEST(Rank, DistinctScoresMatchSortOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1, 100);
  std::vector<double> scores(400);
  for (auto& s : scores) s = u(rng);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  const auto ranks = competition_ranks(scores);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    EXPECT_EQ(ranks[order[pos]], static_cast<int>(pos) + 1);
  }
}

TEST(Rank, CountsStrictlyGreaterPlusOne) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(0, 20);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(30);
    for (auto& v : s) v = u(rng);
    const auto ranks = competition_ranks(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto better = std::count_if(s.begin(), s.end(), [&](double o) { return o > s[i]; });
      EXPECT_EQ(ranks[i], better + 1);
    }
  }
}

TEST(RelativeChange, Arithmetic) {
  EXPECT_DOUBLE_EQ(relative_change(55, 50, SubjectKind::final_score).value, 5.0);
  EXPECT_DOUBLE_EQ(relative_change(50, 50, SubjectKind::final_score).value, 0.0);
  EXPECT_NEAR(relative_change(47.3, 51.1, SubjectKind::final_score).value, -3.8, 1e-12);
}

TEST(RelativeChange, MissingPreviousIsNoBaseline) {
  EXPECT_EQ(code_of([] { relative_change(50, std::nullopt, SubjectKind::attribute, "x"); }),
            ErrorCode::no_baseline);
}

TEST(Subject, KeyRoundTrip) {
  for (const auto& s : {Subject::final_score(), Subject::indicator("SFRI"), Subject::attribute("staff")}) {
    EXPECT_EQ(Subject::parse(s.key()), s);
  }
  EXPECT_EQ(code_of([] { Subject::parse("bogus"); }), ErrorCode::schema);
}
