#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rankforge/history.hpp"
#include "rankforge/model.hpp"

namespace rankforge {

/// Ground-truth linear form for one indicator:
/// score = intercept + sum(coefficients[j] * group attribute j) + N(0, noise_sigma), clamped.
struct GeneratingForm {
  std::string indicator_id;
  double intercept = 0.0;
  std::vector<double> coefficients;  // aligned with the indicator's attribute group
  double noise_sigma = 0.0;

  friend bool operator==(const GeneratingForm&, const GeneratingForm&) = default;
};

struct SyntheticConfig {
  std::size_t n_rankees = 50;
  std::size_t n_years = 5;
  int first_year = 2016;
  RankingSystemSpec spec;
  std::vector<GeneratingForm> forms;  // one per spec indicator, spec order
  std::uint64_t seed = 42;
  double drift_fraction = 0.02;  // yearly attribute drift sd, as a fraction of domain width

  /// Forms drawn from the seed so that mid-domain attributes land near the
  /// middle of the score range.
  static SyntheticConfig with_random_forms(RankingSystemSpec spec, std::size_t n_rankees,
                                           std::size_t n_years, std::uint64_t seed,
                                           double noise_sigma = 2.0);

  void validate() const;
};

/// Deterministic in the config. Attributes start inside the middle of each
/// domain and drift year over year; indicator scores follow the generating
/// forms; final scores and per-year competition ranks come from the spec.
HistoryTable generate_synthetic(const SyntheticConfig& config);

/// Noise-free evaluation of a form at the given attributes, before clamping.
double evaluate_form(const GeneratingForm& form, const IndicatorSpec& indicator,
                     const ValueMap& attributes);

/// A six-indicator spec shaped like a university ranking.
RankingSystemSpec default_spec();

}  // namespace rankforge
