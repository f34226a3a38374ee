#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "rankforge/error.hpp"
#include "rankforge/predictor.hpp"
#include "support.hpp"

using namespace rankforge;
using rftest::make_record;
using rftest::one_attr_spec;

namespace {

std::vector<RankeeRecord> line_history(double slope, double intercept, double sigma, std::size_t n,
                                       std::uint64_t seed) {
  const auto spec = one_attr_spec();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 30.0);
  std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
  std::vector<RankeeRecord> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sigma > 0 ? ux(rng) : static_cast<double>(i) * 40.0 / static_cast<double>(n);
    const double y = slope * x + intercept + (sigma > 0 ? noise(rng) : 0.0);
    rows.push_back(make_record(spec, "R" + std::to_string(i), 2020, {{"x", x}}, {{"I", y}}));
  }
  return rows;
}

}  // namespace

TEST(Fit, NoiselessLineIsRecoveredByEveryMember) {
  const auto rows = line_history(2.0, 10.0, 0.0, 21, 0);
  const auto model = fit(rows, one_attr_spec(), {100, 0.0, 1});
  for (const auto& m : model.indicator("I").members) {
    EXPECT_NEAR(m.coefficients[0], 2.0, 1e-6);
    EXPECT_NEAR(m.intercept, 10.0, 1e-6);
  }
}

TEST(Fit, SameSeedIsBitIdentical) {
  const auto rows = line_history(1.5, 20.0, 3.0, 80, 5);
  const auto a = fit(rows, one_attr_spec(), {100, 1e-3, 7});
  const auto b = fit(rows, one_attr_spec(), {100, 1e-3, 7});
  EXPECT_TRUE(a == b);
  const auto c = fit(rows, one_attr_spec(), {100, 1e-3, 8});
  EXPECT_FALSE(a == c);
}

TEST(Fit, MemberSlopesCentreOnGeneratingSlope) {
  const auto rows = line_history(3.0, 5.0, 1.0, 200, 99);
  const auto model = fit(rows, one_attr_spec(), {100, 1e-3, 3});
  double sum = 0.0;
  for (const auto& m : model.indicator("I").members) sum += m.coefficients[0];
  EXPECT_NEAR(sum / 100.0, 3.0, 0.1);
}

TEST(Fit, TooFewDistinctRowsIsTrainingError) {
  const auto spec = one_attr_spec();
  std::vector<RankeeRecord> rows{make_record(spec, "A", 2020, {{"x", 1}}, {{"I", 5}}),
                                 make_record(spec, "B", 2020, {{"x", 1}}, {{"I", 5}})};
  try {
    fit(rows, spec, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::training);
    EXPECT_EQ(e.location(), "I");
  }
}

TEST(Fit, RejectsBadConfig) {
  const auto rows = line_history(2.0, 10.0, 0.0, 10, 0);
  EXPECT_THROW(fit(rows, one_attr_spec(), {1, 0.0, 0}), Error);
  EXPECT_THROW(fit(rows, one_attr_spec(), {10, -1.0, 0}), Error);
}

TEST(Predict, ConstantEnsembleHasNoSpread) {
  const auto spec = one_attr_spec();
  const auto model = rftest::linear_model(spec, {std::vector<LinearMember>(5, {10.0, {2.0}})});
  const auto e = predict_indicator(model, "I", {{"x", 20.0}});
  EXPECT_DOUBLE_EQ(e.min(), 50.0);
  EXPECT_DOUBLE_EQ(e.max(), 50.0);
  EXPECT_DOUBLE_EQ(e.mean(), 50.0);
}

TEST(Predict, MembersAreClampedToScoreBounds) {
  const auto spec = one_attr_spec();
  const auto model = rftest::linear_model(spec, {{{137.5, {0.0}}, {-20.0, {0.0}}}});
  const auto e = predict_indicator(model, "I", {{"x", 1.0}});
  EXPECT_DOUBLE_EQ(e[0], 100.0);
  EXPECT_DOUBLE_EQ(e[1], 1.0);
  EXPECT_DOUBLE_EQ(predict_indicator_mean_unclamped(model, "I", {{"x", 1.0}}), (137.5 - 20.0) / 2);
}

TEST(Predict, MissingGroupAttributeIsSchemaError) {
  const auto spec = one_attr_spec();
  const auto model = rftest::linear_model(spec, {std::vector<LinearMember>(2, {10.0, {2.0}})});
  try {
    predict_indicator(model, "I", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema);
  }
}

TEST(Final, SymmetricMembers) {
  RankingSystemSpec spec = rftest::toy_spec();
  spec.indicators = {{"P", "", 0.5, {"a"}}, {"Q", "", 0.5, {"b", "c"}}};
  EnsembleMap preds{{"P", EnsemblePrediction("P", {60, 10})}, {"Q", EnsemblePrediction("Q", {40, 30})}};
  const auto f = predict_final(preds, spec);
  EXPECT_DOUBLE_EQ(f[0], 50.0);
  EXPECT_DOUBLE_EQ(f[1], 20.0);
  EXPECT_EQ(f.subject_id(), "final");
}

TEST(Final, RandomEnsemblesMatchMemberwiseDotProduct) {
  const auto spec = rftest::toy_spec();
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> m;
    for (std::size_t i = 0; i < 3; ++i) m.push_back(rftest::uniform_members(rng, 5, 1, 100));
    const auto s = rftest::make_scenario(0, spec, m);
    for (std::size_t k = 0; k < 5; ++k) {
      const double oracle = 0.5 * m[0][k] + 0.3 * m[1][k] + 0.2 * m[2][k];
      EXPECT_NEAR(s.final_prediction[k], oracle, 1e-12);
    }
  }
}

TEST(Final, MismatchedMemberCountsIsContractError) {
  const auto spec = rftest::toy_spec();
  EnsembleMap preds{{"P", EnsemblePrediction("P", {1, 2})},
                    {"Q", EnsemblePrediction("Q", {1, 2, 3})},
                    {"R", EnsemblePrediction("R", {1, 2})}};
  try {
    predict_final(preds, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::contract);
  }
}

TEST(RankPrediction, DominanceAndTies) {
  const EnsemblePrediction ours("final", {90, 91, 92});
  EnsembleMap weaker{{"B", EnsemblePrediction("final", {10, 20, 30})}};
  EXPECT_EQ(predict_rank(ours, weaker), (RankDistribution{{1, 3}}));
  EnsembleMap twin{{"B", ours}};
  EXPECT_EQ(predict_rank(ours, twin), (RankDistribution{{1, 3}}));
}

TEST(RankPrediction, HandEnumeratedDraws) {
  const EnsemblePrediction ours("final", {50, 60, 70, 40});
  EnsembleMap rivals{{"A", EnsemblePrediction("final", {55, 50, 80, 40})},
                     {"B", EnsemblePrediction("final", {45, 65, 75, 30})},
                     {"C", EnsemblePrediction("final", {60, 70, 60, 50})}};
  // draw 0: 55, 60 beat 50 -> 3; draw 1: 65, 70 -> 3; draw 2: 80, 75 -> 3; draw 3: 50 -> 2 (40 ties)
  EXPECT_EQ(predict_rank(ours, rivals), (RankDistribution{{2, 1}, {3, 3}}));
  EXPECT_EQ(modal_rank(predict_rank(ours, rivals)), 3);
}

TEST(RankPrediction, RankFieldMatchesDirectComputation) {
  std::mt19937_64 rng(23);
  EnsembleMap rivals;
  for (int r = 0; r < 12; ++r) {
    auto m = rftest::uniform_members(rng, 20, 1, 100);
    for (auto& v : m) v = std::round(v / 5) * 5;  // force ties
    rivals.emplace("R" + std::to_string(r), EnsemblePrediction("final", m));
  }
  const RankField field(rivals, 20);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = rftest::uniform_members(rng, 20, 1, 100);
    for (auto& v : m) v = std::round(v / 5) * 5;
    const EnsemblePrediction ours("final", m);
    EXPECT_EQ(field.rank_distribution(ours), predict_rank(ours, rivals));
  }
}

TEST(RankPrediction, ModalRankPrefersSmallerOnTie) {
  EXPECT_EQ(modal_rank({{2, 5}, {4, 5}, {7, 1}}), 2);
}

TEST(Ensemble, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(EnsemblePrediction("x", {}), Error);
  EXPECT_THROW(EnsemblePrediction("x", {1.0, std::nan("")}), Error);
}
