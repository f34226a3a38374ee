#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rankforge {

/// Values keyed by attribute or indicator id. Ordered so that iteration and
/// serialization are deterministic.
using ValueMap = std::map<std::string, double, std::less<>>;

struct AttributeSpec {
  std::string id;
  std::string name;
  std::string unit;
  double domain_min = 0.0;
  double domain_max = 1.0;

  bool contains(double value) const noexcept {
    return value >= domain_min && value <= domain_max;
  }

  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

struct IndicatorSpec {
  std::string id;
  std::string name;
  double weight = 0.0;
  std::vector<std::string> attribute_group;

  friend bool operator==(const IndicatorSpec&, const IndicatorSpec&) = default;
};

/// Definition of a ranking pipeline: raw attributes are grouped into weighted
/// indicators whose scores aggregate into a final score.
struct RankingSystemSpec {
  std::vector<AttributeSpec> attributes;
  std::vector<IndicatorSpec> indicators;
  double score_min = 1.0;
  double score_max = 100.0;

  /// Throws Error(validation) naming the first violated constraint.
  void validate() const;

  std::optional<std::size_t> attribute_index(std::string_view id) const noexcept;
  std::optional<std::size_t> indicator_index(std::string_view id) const noexcept;

  /// Throws Error(schema) for unknown ids.
  const AttributeSpec& attribute(std::string_view id) const;
  const IndicatorSpec& indicator(std::string_view id) const;

  double clamp_score(double value) const noexcept;
  bool score_in_bounds(double value) const noexcept {
    return value >= score_min && value <= score_max;
  }

  friend bool operator==(const RankingSystemSpec&, const RankingSystemSpec&) = default;
};

/// One rankee-year of history.
struct RankeeRecord {
  std::string rankee_id;
  int year = 0;
  ValueMap attribute_values;
  ValueMap indicator_scores;
  double final_score = 0.0;
  int rank = 1;

  friend bool operator==(const RankeeRecord&, const RankeeRecord&) = default;
};

enum class SubjectKind { attribute, indicator_score, final_score };

std::string_view to_string(SubjectKind kind) noexcept;
/// Accepts "attribute"/"attr", "indicator"/"indicator_score"/"ind", "final"/"final_score".
SubjectKind parse_subject_kind(std::string_view text);

/// Something a delta, histogram or probability can be computed for.
struct Subject {
  SubjectKind kind = SubjectKind::final_score;
  std::string id;  // empty for the final score

  static Subject final_score() { return {SubjectKind::final_score, {}}; }
  static Subject indicator(std::string id) { return {SubjectKind::indicator_score, std::move(id)}; }
  static Subject attribute(std::string id) { return {SubjectKind::attribute, std::move(id)}; }

  /// "attr:<id>", "ind:<id>" or "final".
  std::string key() const;
  static Subject parse(std::string_view key);

  friend bool operator==(const Subject&, const Subject&) = default;
  friend auto operator<=>(const Subject&, const Subject&) = default;
};

/// Throws Error(schema) if the subject references an id missing from the spec.
void check_subject(const Subject& subject, const RankingSystemSpec& spec);

struct RelativeChange {
  SubjectKind subject_kind = SubjectKind::attribute;
  std::string subject_id;
  double value = 0.0;
  double baseline = 0.0;

  double current() const noexcept { return baseline + value; }

  friend bool operator==(const RelativeChange&, const RelativeChange&) = default;
};

/// Weighted sum of indicator scores, clamped to the spec's score bounds.
/// Throws Error(schema) when an indicator is missing or unknown.
double aggregate_final_score(const ValueMap& indicator_scores, const RankingSystemSpec& spec);

/// Same arithmetic over scores laid out in spec indicator order.
double aggregate_final_score(std::span<const double> scores_in_spec_order,
                             const RankingSystemSpec& spec);

/// Competition ranking ("1224"): higher score gets the smaller rank, ties share
/// the smallest rank of their block.
std::map<std::string, int, std::less<>> rank_entities(const ValueMap& final_scores);

/// Positional variant; result[i] is the rank of scores[i].
std::vector<int> competition_ranks(std::span<const double> scores);

/// current - previous. A missing or non-finite previous value raises
/// Error(no_baseline) rather than defaulting to zero.
RelativeChange relative_change(double current, std::optional<double> previous, SubjectKind kind,
                               std::string subject_id = {});

}  // namespace rankforge
