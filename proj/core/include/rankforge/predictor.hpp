#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankforge/ensemble.hpp"
#include "rankforge/model.hpp"

namespace rankforge {

/// Contract every indicator model has to satisfy: for an attribute assignment,
/// return M unclamped member predictions of one indicator score, in member
/// order. Plug a different learner in by implementing this.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual const RankingSystemSpec& spec() const noexcept = 0;
  virtual std::size_t member_count() const noexcept = 0;

  /// Throws Error(schema) when a group attribute is missing from `attributes`.
  virtual std::vector<double> predict_members(std::string_view indicator_id,
                                              const ValueMap& attributes) const = 0;
};

struct LinearMember {
  double intercept = 0.0;
  std::vector<double> coefficients;  // aligned with the indicator's attribute group

  friend bool operator==(const LinearMember&, const LinearMember&) = default;
};

struct IndicatorEnsemble {
  std::string indicator_id;
  std::vector<std::string> attribute_group;
  std::vector<LinearMember> members;

  friend bool operator==(const IndicatorEnsemble&, const IndicatorEnsemble&) = default;
};

struct FitConfig {
  std::size_t members = 100;
  double ridge_lambda = 1e-3;
  std::uint64_t seed = 0;
};

struct TrainingMetadata {
  std::vector<int> years;
  std::size_t rows = 0;
  double ridge_lambda = 1e-3;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

/// Bootstrap ensemble of ridge-regularized linear regressions, one ensemble
/// per indicator. Immutable after construction.
class EnsembleModel final : public Predictor {
 public:
  /// Validates shape: one ensemble per spec indicator in spec order, equal
  /// member counts, finite coefficients matching group sizes.
  EnsembleModel(RankingSystemSpec spec, std::vector<IndicatorEnsemble> indicators,
                TrainingMetadata metadata);

  const RankingSystemSpec& spec() const noexcept override { return spec_; }
  std::size_t member_count() const noexcept override { return member_count_; }
  std::vector<double> predict_members(std::string_view indicator_id,
                                      const ValueMap& attributes) const override;

  const std::vector<IndicatorEnsemble>& indicators() const noexcept { return indicators_; }
  const IndicatorEnsemble& indicator(std::string_view id) const;
  const TrainingMetadata& metadata() const noexcept { return metadata_; }

  friend bool operator==(const EnsembleModel& a, const EnsembleModel& b) {
    return a.spec_ == b.spec_ && a.indicators_ == b.indicators_ && a.metadata_ == b.metadata_;
  }

 private:
  RankingSystemSpec spec_;
  std::vector<IndicatorEnsemble> indicators_;
  TrainingMetadata metadata_;
  std::size_t member_count_ = 0;
};

/// Fits M bootstrap members per indicator. Member m draws one resample of
/// history rows and reuses it for every indicator, so member m is the same
/// bootstrap replicate across indicators. Deterministic given the seed.
///
/// Throws Error(training) naming the indicator when fewer than two distinct
/// usable rows exist, and Error(validation) for M < 2 or lambda < 0.
EnsembleModel fit(std::span<const RankeeRecord> history, const RankingSystemSpec& spec,
                  const FitConfig& config);

/// Clamped member predictions for one indicator.
EnsemblePrediction predict_indicator(const Predictor& model, std::string_view indicator_id,
                                     const ValueMap& attributes);

/// Mean of the unclamped members; the quantity perturbed by influence analysis.
double predict_indicator_mean_unclamped(const Predictor& model, std::string_view indicator_id,
                                        const ValueMap& attributes);

/// One clamped ensemble per spec indicator.
EnsembleMap predict_all_indicators(
    const Predictor& model, const ValueMap& attributes);

/// Final member i is the aggregate of indicator member i. Throws
/// Error(contract) when member counts differ and Error(schema) for missing or
/// unknown indicators.
EnsemblePrediction predict_final(
    const EnsembleMap& indicator_predictions,
    const RankingSystemSpec& spec);

/// rank -> number of member draws with that rank.
using RankDistribution = std::map<int, int>;

/// For each member index, the competition rank of our member value among all
/// rankees' member values at that index.
RankDistribution predict_rank(
    const EnsemblePrediction& ours,
    const EnsembleMap& rival_finals);

/// Most frequent rank; the smaller rank wins a frequency tie.
int modal_rank(const RankDistribution& distribution);

/// Pre-sorted member columns of a fixed field of rivals, for evaluating many
/// candidate ensembles against the same field. Equivalent to predict_rank.
class RankField {
 public:
  RankField() = default;
  RankField(const EnsembleMap& rival_finals,
            std::size_t member_count);

  std::size_t member_count() const noexcept { return member_count_; }
  std::size_t rival_count() const noexcept { return rival_count_; }
  RankDistribution rank_distribution(const EnsemblePrediction& ours) const;

 private:
  std::size_t member_count_ = 0;
  std::size_t rival_count_ = 0;
  std::vector<std::vector<double>> sorted_columns_;  // per member index, ascending
};

}  // namespace rankforge
