#include "rankforge/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rankforge/error.hpp"

namespace rankforge {

namespace {

Error invalid(const std::string& message, std::string location = {}) {
  return Error(ErrorCode::validation, message, std::move(location));
}

}  // namespace

void RankingSystemSpec::validate() const {
  if (!(score_min < score_max)) {
    throw invalid("score_min must be < score_max", "score_bounds");
  }
  if (attributes.empty()) throw invalid("at least one attribute is required", "attributes");
  if (indicators.empty()) throw invalid("at least one indicator is required", "indicators");

  std::set<std::string, std::less<>> attribute_ids;
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    const auto& a = attributes[i];
    const auto where = "attributes[" + std::to_string(i) + "]";
    if (a.id.empty()) throw invalid("attribute id must be non-empty", where);
    if (!attribute_ids.insert(a.id).second) throw invalid("duplicate attribute id '" + a.id + "'", where);
    if (!std::isfinite(a.domain_min) || !std::isfinite(a.domain_max) || !(a.domain_min < a.domain_max)) {
      throw invalid("attribute '" + a.id + "' requires domain_min < domain_max", where);
    }
  }

  std::set<std::string, std::less<>> indicator_ids;
  std::set<std::string, std::less<>> grouped;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < indicators.size(); ++i) {
    const auto& ind = indicators[i];
    const auto where = "indicators[" + std::to_string(i) + "]";
    if (ind.id.empty()) throw invalid("indicator id must be non-empty", where);
    if (ind.id == "final") throw invalid("indicator id 'final' is reserved for the final score", where);
    if (!indicator_ids.insert(ind.id).second) throw invalid("duplicate indicator id '" + ind.id + "'", where);
    if (!(ind.weight >= 0.0 && ind.weight <= 1.0)) {
      throw invalid("indicator '" + ind.id + "' weight must be in [0,1]", where);
    }
    if (ind.attribute_group.empty()) {
      throw invalid("indicator '" + ind.id + "' attribute group must be non-empty", where);
    }
    std::set<std::string, std::less<>> seen;
    for (const auto& attr : ind.attribute_group) {
      if (!attribute_ids.contains(attr)) {
        throw invalid("indicator '" + ind.id + "' references undeclared attribute '" + attr + "'", where);
      }
      if (!seen.insert(attr).second) {
        throw invalid("indicator '" + ind.id + "' lists attribute '" + attr + "' twice", where);
      }
      grouped.insert(attr);
    }
    weight_sum += ind.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw invalid("indicator weights must sum to 1 (got " + std::to_string(weight_sum) + ")", "indicators.weight");
  }
  for (const auto& a : attributes) {
    if (!grouped.contains(a.id)) {
      throw invalid("attribute '" + a.id + "' does not belong to any indicator group", "attributes");
    }
  }
}

std::optional<std::size_t> RankingSystemSpec::attribute_index(std::string_view id) const noexcept {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> RankingSystemSpec::indicator_index(std::string_view id) const noexcept {
  for (std::size_t i = 0; i < indicators.size(); ++i) {
    if (indicators[i].id == id) return i;
  }
  return std::nullopt;
}

const AttributeSpec& RankingSystemSpec::attribute(std::string_view id) const {
  if (auto idx = attribute_index(id)) return attributes[*idx];
  throw Error(ErrorCode::schema, "unknown attribute id '" + std::string(id) + "'");
}

const IndicatorSpec& RankingSystemSpec::indicator(std::string_view id) const {
  if (auto idx = indicator_index(id)) return indicators[*idx];
  throw Error(ErrorCode::schema, "unknown indicator id '" + std::string(id) + "'");
}

double RankingSystemSpec::clamp_score(double value) const noexcept {
  return std::clamp(value, score_min, score_max);
}

std::string_view to_string(SubjectKind kind) noexcept {
  switch (kind) {
    case SubjectKind::attribute: return "attribute";
    case SubjectKind::indicator_score: return "indicator_score";
    case SubjectKind::final_score: return "final_score";
  }
  return "final_score";
}

SubjectKind parse_subject_kind(std::string_view text) {
  if (text == "attribute" || text == "attr") return SubjectKind::attribute;
  if (text == "indicator" || text == "indicator_score" || text == "ind") return SubjectKind::indicator_score;
  if (text == "final" || text == "final_score") return SubjectKind::final_score;
  throw Error(ErrorCode::schema, "unknown subject kind '" + std::string(text) + "'");
}

std::string Subject::key() const {
  switch (kind) {
    case SubjectKind::attribute: return "attr:" + id;
    case SubjectKind::indicator_score: return "ind:" + id;
    case SubjectKind::final_score: return "final";
  }
  return "final";
}

Subject Subject::parse(std::string_view key) {
  if (key == "final" || key == "final_score") return final_score();
  const auto colon = key.find(':');
  if (colon == std::string_view::npos || colon + 1 == key.size()) {
    throw Error(ErrorCode::schema, "malformed subject '" + std::string(key) + "' (expected attr:<id>, ind:<id> or final)");
  }
  const auto kind = parse_subject_kind(key.substr(0, colon));
  if (kind == SubjectKind::final_score) return final_score();
  return {kind, std::string(key.substr(colon + 1))};
}

void check_subject(const Subject& subject, const RankingSystemSpec& spec) {
  switch (subject.kind) {
    case SubjectKind::attribute: (void)spec.attribute(subject.id); break;
    case SubjectKind::indicator_score: (void)spec.indicator(subject.id); break;
    case SubjectKind::final_score: break;
  }
}

double aggregate_final_score(const ValueMap& indicator_scores, const RankingSystemSpec& spec) {
  for (const auto& [id, _] : indicator_scores) {
    if (!spec.indicator_index(id)) {
      throw Error(ErrorCode::schema, "unknown indicator id '" + id + "'");
    }
  }
  double total = 0.0;
  for (const auto& ind : spec.indicators) {
    const auto it = indicator_scores.find(ind.id);
    if (it == indicator_scores.end()) {
      throw Error(ErrorCode::schema, "missing score for indicator '" + ind.id + "'");
    }
    total += ind.weight * it->second;
  }
  return spec.clamp_score(total);
}

double aggregate_final_score(std::span<const double> scores_in_spec_order,
                             const RankingSystemSpec& spec) {
  if (scores_in_spec_order.size() != spec.indicators.size()) {
    throw Error(ErrorCode::schema, "expected " + std::to_string(spec.indicators.size()) +
                                       " indicator scores, got " +
                                       std::to_string(scores_in_spec_order.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < scores_in_spec_order.size(); ++i) {
    total += spec.indicators[i].weight * scores_in_spec_order[i];
  }
  return spec.clamp_score(total);
}

std::vector<int> competition_ranks(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<int> ranks(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (pos > 0 && scores[order[pos]] == scores[order[pos - 1]]) {
      ranks[order[pos]] = ranks[order[pos - 1]];
    } else {
      ranks[order[pos]] = static_cast<int>(pos) + 1;
    }
  }
  return ranks;
}

std::map<std::string, int, std::less<>> rank_entities(const ValueMap& final_scores) {
  std::vector<double> scores;
  scores.reserve(final_scores.size());
  for (const auto& [_, s] : final_scores) scores.push_back(s);
  const auto ranks = competition_ranks(scores);
  std::map<std::string, int, std::less<>> out;
  std::size_t i = 0;
  for (const auto& [id, _] : final_scores) out.emplace(id, ranks[i++]);
  return out;
}

RelativeChange relative_change(double current, std::optional<double> previous, SubjectKind kind,
                               std::string subject_id) {
  if (!previous || !std::isfinite(*previous)) {
    throw Error(ErrorCode::no_baseline,
                "no previous-year value for " + std::string(to_string(kind)) +
                    (subject_id.empty() ? std::string{} : " '" + subject_id + "'"));
  }
  return RelativeChange{kind, std::move(subject_id), current - *previous, *previous};
}

}  // namespace rankforge
