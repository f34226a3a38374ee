#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankforge/model.hpp"
#include "rankforge/predictor.hpp"
#include "rankforge/scenario.hpp"

namespace rankforge {

/// Perturbation step per attribute, in attribute units.
struct DeltaPolicy {
  std::map<std::string, double, std::less<>> steps;

  /// `fraction` of each attribute's observed range in `history`, falling back
  /// to the declared domain width when the attribute never varies.
  static DeltaPolicy from_history(std::span<const RankeeRecord> history,
                                  const RankingSystemSpec& spec, double fraction = 0.01);
  /// `fraction` of the declared domain width.
  static DeltaPolicy from_domain(const RankingSystemSpec& spec, double fraction = 0.01);
  /// The same step for every attribute.
  static DeltaPolicy fixed(const RankingSystemSpec& spec, double step);

  double step(std::string_view attribute_id) const;
};

enum class InfluenceStatus {
  central,          // both a-d and a+d inside the domain
  forward,          // a-d left the domain; one-sided m(a+d) - m(a)
  backward,         // a+d left the domain; one-sided m(a) - m(a-d)
  structural_zero,  // attribute not in the indicator's group
  out_of_domain,    // neither side usable; raw forced to 0 inside a matrix
};

std::string_view to_string(InfluenceStatus status) noexcept;

struct RawInfluence {
  double value = 0.0;
  InfluenceStatus status = InfluenceStatus::central;
};

/// Central difference of the unclamped ensemble-mean prediction,
/// [m(a+d) - m(a-d)] / 2, i.e. score points per +d step. Falls back to a
/// one-sided difference (flagged) when one side leaves the attribute domain,
/// and throws Error(domain) when both do. Attributes outside the indicator's
/// group yield exactly 0.
RawInfluence attribute_influence(const Predictor& model, const Scenario& scenario,
                                 std::string_view indicator_id, std::string_view attribute_id,
                                 double delta);

struct InfluenceEntry {
  int scenario_id = 0;
  std::string indicator_id;
  std::string attribute_id;
  double raw = 0.0;
  double normalized = 0.0;
  InfluenceStatus status = InfluenceStatus::central;
};

/// Influence of every attribute on every indicator for a selection of
/// scenarios. Normalized values are raw / (max |raw| over the selection), so
/// shades are only comparable within one selection.
struct InfluenceMatrix {
  std::string selection_id;
  std::vector<InfluenceEntry> entries;  // scenario, then indicator, then attribute (spec order)
  double normalization_factor = 0.0;

  const InfluenceEntry* find(int scenario_id, std::string_view indicator_id,
                             std::string_view attribute_id) const noexcept;
};

/// Never aborts on a single entry: domain failures become out_of_domain
/// entries with raw 0. Throws Error(validation) on an empty selection.
InfluenceMatrix build_matrix(const Predictor& model, std::span<const Scenario> selection,
                             const DeltaPolicy& policy);

struct MainInfluencer {
  std::string attribute_id;
  bool no_influence = false;  // every |normalized| was 0
};

/// Attribute with the largest |normalized| for the pair; the earlier-declared
/// attribute wins ties. Throws Error(not_found) when the pair has no entries.
MainInfluencer main_influencer(const InfluenceMatrix& matrix, int scenario_id,
                               std::string_view indicator_id);

}  // namespace rankforge
