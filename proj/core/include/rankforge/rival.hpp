#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankforge/ensemble.hpp"
#include "rankforge/model.hpp"
#include "rankforge/predictor.hpp"
#include "rankforge/scenario.hpp"

namespace rankforge {

/// Ways to predict a rival's next-year scores without its private attributes.
enum class RivalMethodId {
  carry_forward,        // last score plus bootstrapped year-over-year changes
  trend_extrapolation,  // least-squares line over a window, one year ahead, plus residuals
  model_based,          // our own ensemble applied to the rival's latest attributes
};

std::string_view to_string(RivalMethodId id) noexcept;
RivalMethodId parse_rival_method(std::string_view text);

struct RivalMethod {
  RivalMethodId id = RivalMethodId::carry_forward;
  std::size_t members = 100;  // keep equal to the user's model M
  std::size_t trend_window = 3;
  std::uint64_t seed = 0;

  friend bool operator==(const RivalMethod&, const RivalMethod&) = default;
};

/// The three reference methods with shared parameters.
std::vector<RivalMethod> default_rival_methods(std::size_t members, std::uint64_t seed);

/// Ensembles keyed by subject id: every indicator id plus "final". The
/// history may be in any order; it must belong to one rankee. Throws
/// Error(validation) when the method needs more history than is available.
EnsembleMap predict_rival(const RivalMethod& method, std::span<const RankeeRecord> rival_history,
                          const Predictor& model);

/// P(ours > rival) over all member pairs, ties counting one half.
double win_probability(const EnsemblePrediction& ours, const EnsemblePrediction& rival);

/// Cached rival predictions for one session: one entry per (rival, method),
/// holding either the ensembles or the method's error message.
class RivalBook {
 public:
  struct Entry {
    std::string rival_id;
    RivalMethodId method = RivalMethodId::carry_forward;
    std::optional<EnsembleMap> predictions;
    std::string error;
  };

  RivalBook() = default;

  /// `histories` maps rival id to that rival's records.
  static RivalBook build(const std::map<std::string, std::vector<RankeeRecord>, std::less<>>& histories,
                         std::span<const RivalMethod> methods, const Predictor& model);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const std::vector<std::string>& rival_ids() const noexcept { return rival_ids_; }
  const std::vector<RivalMethodId>& methods() const noexcept { return methods_; }
  const Entry& entry(std::string_view rival_id, RivalMethodId method) const;
  bool has_rival(std::string_view rival_id) const noexcept;

 private:
  std::vector<Entry> entries_;
  std::vector<std::string> rival_ids_;
  std::vector<RivalMethodId> methods_;
};

struct WinProbabilityCell {
  std::string rival_id;
  RivalMethodId method = RivalMethodId::carry_forward;
  Subject subject;
  std::optional<double> probability;  // empty when the method failed for this rival
  std::string error;
};

/// One cell per (rival, method, subject), subjects being the indicators in
/// spec order followed by the final score.
std::vector<WinProbabilityCell> heatmap(const Scenario& scenario, const RivalBook& rivals,
                                        const RankingSystemSpec& spec);

inline constexpr std::size_t kDensityBins = 50;

/// Histogram of ensemble members over [score_min, score_max] with
/// equal-width bins; masses sum to 1.
struct ScoreDistribution {
  Subject subject;
  std::vector<double> members;
  std::vector<double> bin_edges;
  std::vector<double> density;
  double expected_value = 0.0;
};

ScoreDistribution score_distribution(const EnsemblePrediction& ensemble, const Subject& subject,
                                     const RankingSystemSpec& spec, std::size_t bins = kDensityBins);

struct RivalExpectation {
  std::string rival_id;
  std::optional<double> expected_value;
  std::string error;
};

struct RadarSubject {
  Subject subject;
  ScoreDistribution ours;
  std::vector<RivalExpectation> rivals;
  std::optional<ScoreDistribution> highlighted;
};

struct RadarPayload {
  RivalMethodId method = RivalMethodId::carry_forward;
  std::optional<std::string> highlight;
  std::vector<RadarSubject> subjects;
};

/// Throws Error(validation) for a highlight that is not a listed rival.
RadarPayload radar_data(const Scenario& scenario, const RivalBook& rivals, RivalMethodId method,
                        const std::optional<std::string>& highlight, const RankingSystemSpec& spec);

}  // namespace rankforge
