#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankforge/ensemble.hpp"
#include "rankforge/model.hpp"
#include "rankforge/predictor.hpp"

namespace rankforge {

inline constexpr std::size_t kDefaultScenarioCap = 100'000;
inline constexpr std::size_t kDefaultHistogramBins = 20;

/// Candidate values for one attribute, strictly ascending.
struct AttributeRange {
  std::string attribute_id;
  std::vector<double> values;

  /// min, min+step, ... up to and including max (within 1e-9 of a step).
  static AttributeRange stepped(std::string attribute_id, double min, double max, double step);
  static AttributeRange single(std::string attribute_id, double value);

  /// Throws Error(validation) unless non-empty, strictly ascending and inside
  /// the attribute domain; Error(schema) for an unknown attribute.
  void validate(const RankingSystemSpec& spec) const;

  friend bool operator==(const AttributeRange&, const AttributeRange&) = default;
};

/// One candidate submission and everything predicted for it.
struct Scenario {
  int scenario_id = 0;
  ValueMap attribute_values;
  std::map<std::string, RelativeChange, std::less<>> attribute_deltas;
  EnsembleMap indicator_predictions;
  EnsemblePrediction final_prediction;
  RankDistribution rank_distribution;

  /// Ensemble for an indicator or the final score.
  const EnsemblePrediction& prediction(const Subject& subject) const;
};

/// Number of scenarios the ranges expand to, saturating at ULLONG_MAX.
unsigned long long scenario_product(std::span<const AttributeRange> ranges);

/// Cartesian product of the ranges (spec attribute order, last attribute
/// varying fastest), each point evaluated through the predictor. Attributes
/// without a range stay at the baseline value. `rank_field`, when given, is the
/// set of other rankees the predicted rank is computed against.
///
/// Throws CapacityError when the product exceeds `cap` and Error(validation)
/// for out-of-domain values or duplicate/unknown ranges. Output order is the
/// generation order regardless of how evaluation is scheduled.
std::vector<Scenario> generate_scenarios(std::span<const AttributeRange> ranges,
                                         const RankeeRecord& baseline, const Predictor& model,
                                         std::size_t cap = kDefaultScenarioCap,
                                         const RankField* rank_field = nullptr);

/// Delta of a subject against the baseline: attribute value, or ensemble mean
/// for scores. Throws Error(no_baseline) when the baseline lacks the subject.
double mean_delta(const Scenario& scenario, const Subject& subject, const RankeeRecord& baseline);

double baseline_value(const Subject& subject, const RankeeRecord& baseline);

enum class Measure { mean_delta, member_delta };
enum class CompareOp { gt, ge, lt, le, between };

/// One conjunct of a filter. `mean` compares the ensemble-mean delta;
/// `member` requires every ensemble member's delta to satisfy the comparison.
/// For attributes both measures compare the value delta.
struct FilterPredicate {
  Subject subject;
  Measure measure = Measure::mean_delta;
  CompareOp op = CompareOp::gt;
  double bound = 0.0;
  double upper = 0.0;  // only for `between` (inclusive)

  /// Text form: "<subject> <measure><op><bound>", e.g. "ind:SFRI mean>0",
  /// "final member>=-2", "attr:staff mean in[0,5]".
  static FilterPredicate parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const FilterPredicate&, const FilterPredicate&) = default;
};

/// Conjunction of predicates; an empty filter accepts everything.
struct ScenarioFilter {
  std::vector<FilterPredicate> predicates;

  /// Predicates separated by ';'.
  static ScenarioFilter parse(std::string_view text);
  std::string to_string() const;

  /// Throws Error(validation) naming the offending predicate.
  void validate(const RankingSystemSpec& spec) const;

  friend bool operator==(const ScenarioFilter&, const ScenarioFilter&) = default;
};

bool matches(const Scenario& scenario, const ScenarioFilter& filter, const RankeeRecord& baseline);

/// Positions in `scenarios` that pass, in input order.
std::vector<std::size_t> filter_indices(std::span<const Scenario> scenarios,
                                        const ScenarioFilter& filter, const RankeeRecord& baseline,
                                        const RankingSystemSpec& spec);

std::vector<Scenario> filter_scenarios(std::span<const Scenario> scenarios,
                                       const ScenarioFilter& filter, const RankeeRecord& baseline,
                                       const RankingSystemSpec& spec);

enum class SortDirection { ascending, descending };
SortDirection parse_sort_direction(std::string_view text);

/// Sort key: attribute value for attributes, ensemble mean for scores.
double sort_key(const Scenario& scenario, const Subject& key);

/// Stable permutation of positions; ties keep their input order.
std::vector<std::size_t> sort_indices(std::span<const Scenario> scenarios, const Subject& key,
                                      SortDirection direction, const RankingSystemSpec& spec);

std::vector<Scenario> sort_scenarios(std::span<const Scenario> scenarios, const Subject& key,
                                     SortDirection direction, const RankingSystemSpec& spec);

struct UncertaintyBand {
  double min_delta = 0.0;
  double max_delta = 0.0;

  friend bool operator==(const UncertaintyBand&, const UncertaintyBand&) = default;
};

/// (ensemble min - baseline, ensemble max - baseline). Indicators and final
/// only; attributes raise Error(validation).
UncertaintyBand uncertainty_band(const Scenario& scenario, const Subject& subject,
                                 const RankeeRecord& baseline);

struct ScenarioBand {
  int scenario_id = 0;
  UncertaintyBand band;
};

struct HistogramSummary {
  Subject subject;
  std::vector<double> bin_edges;   // bins + 1 entries; {d, d} for the degenerate bin
  std::vector<std::size_t> frequencies;
  std::vector<ScenarioBand> bands;  // one per summarized scenario
  UncertaintyBand aggregate_band;   // envelope of all bands

  std::size_t total() const noexcept;
};

/// Equal-width histogram of per-scenario deltas over [min delta, max delta].
/// Bins are right-open except the last. All-equal deltas collapse to one bin of
/// width zero. No scenarios give an empty summary with no edges.
HistogramSummary summarize(std::span<const Scenario> scenarios, const Subject& subject,
                           const RankeeRecord& baseline, std::size_t bins = kDefaultHistogramBins);

/// Same with caller-fixed edges: strictly ascending, or the degenerate {d, d}
/// pair summarize() emits. Deltas outside the edges count toward the nearest
/// end bin.
HistogramSummary summarize_with_edges(std::span<const Scenario> scenarios, const Subject& subject,
                                      const RankeeRecord& baseline, std::vector<double> edges);

}  // namespace rankforge
