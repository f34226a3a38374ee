#include "rankforge/influence.hpp"

#include <algorithm>
#include <cmath>

#include "rankforge/error.hpp"

namespace rankforge {

DeltaPolicy DeltaPolicy::from_history(std::span<const RankeeRecord> history,
                                      const RankingSystemSpec& spec, double fraction) {
  if (!(fraction > 0.0)) throw Error(ErrorCode::validation, "delta fraction must be > 0");
  DeltaPolicy policy;
  for (const auto& attr : spec.attributes) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& rec : history) {
      const auto it = rec.attribute_values.find(attr.id);
      if (it == rec.attribute_values.end()) continue;
      lo = std::min(lo, it->second);
      hi = std::max(hi, it->second);
    }
    const double width = hi > lo ? hi - lo : attr.domain_max - attr.domain_min;
    policy.steps.emplace(attr.id, fraction * width);
  }
  return policy;
}

DeltaPolicy DeltaPolicy::from_domain(const RankingSystemSpec& spec, double fraction) {
  return from_history({}, spec, fraction);
}

DeltaPolicy DeltaPolicy::fixed(const RankingSystemSpec& spec, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::validation, "delta must be > 0");
  DeltaPolicy policy;
  for (const auto& attr : spec.attributes) policy.steps.emplace(attr.id, step);
  return policy;
}

double DeltaPolicy::step(std::string_view attribute_id) const {
  const auto it = steps.find(attribute_id);
  if (it == steps.end()) {
    throw Error(ErrorCode::schema, "no perturbation step for attribute '" + std::string(attribute_id) + "'");
  }
  return it->second;
}

std::string_view to_string(InfluenceStatus status) noexcept {
  switch (status) {
    case InfluenceStatus::central: return "central";
    case InfluenceStatus::forward: return "forward";
    case InfluenceStatus::backward: return "backward";
    case InfluenceStatus::structural_zero: return "structural_zero";
    case InfluenceStatus::out_of_domain: return "out_of_domain";
  }
  return "central";
}

RawInfluence attribute_influence(const Predictor& model, const Scenario& scenario,
                                 std::string_view indicator_id, std::string_view attribute_id,
                                 double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::validation, "perturbation step must be > 0");
  const auto& spec = model.spec();
  const auto& indicator = spec.indicator(indicator_id);
  const auto& attribute = spec.attribute(attribute_id);
  const auto& group = indicator.attribute_group;
  if (std::find(group.begin(), group.end(), attribute_id) == group.end()) {
    return {0.0, InfluenceStatus::structural_zero};
  }
  const auto base_it = scenario.attribute_values.find(attribute_id);
  if (base_it == scenario.attribute_values.end()) {
    throw Error(ErrorCode::schema, "scenario has no value for attribute '" + attribute.id + "'");
  }
  const double a = base_it->second;
  const bool up_ok = attribute.contains(a + delta);
  const bool down_ok = attribute.contains(a - delta);
  if (!up_ok && !down_ok) {
    throw Error(ErrorCode::domain, "perturbation by " + std::to_string(delta) +
                                       " leaves the domain on both sides", attribute.id);
  }

  auto values = scenario.attribute_values;
  auto mean_at = [&](double x) {
    values[attribute.id] = x;
    return predict_indicator_mean_unclamped(model, indicator_id, values);
  };
  if (up_ok && down_ok) {
    return {(mean_at(a + delta) - mean_at(a - delta)) / 2.0, InfluenceStatus::central};
  }
  if (up_ok) return {mean_at(a + delta) - mean_at(a), InfluenceStatus::forward};
  return {mean_at(a) - mean_at(a - delta), InfluenceStatus::backward};
}

const InfluenceEntry* InfluenceMatrix::find(int scenario_id, std::string_view indicator_id,
                                            std::string_view attribute_id) const noexcept {
  for (const auto& e : entries) {
    if (e.scenario_id == scenario_id && e.indicator_id == indicator_id &&
        e.attribute_id == attribute_id) {
      return &e;
    }
  }
  return nullptr;
}

InfluenceMatrix build_matrix(const Predictor& model, std::span<const Scenario> selection,
                             const DeltaPolicy& policy) {
  if (selection.empty()) throw Error(ErrorCode::validation, "influence selection is empty");
  const auto& spec = model.spec();
  InfluenceMatrix matrix;
  for (const auto& s : selection) {
    if (!matrix.selection_id.empty()) matrix.selection_id += ',';
    matrix.selection_id += std::to_string(s.scenario_id);
  }
  matrix.entries.reserve(selection.size() * spec.indicators.size() * spec.attributes.size());

  double factor = 0.0;
  for (const auto& s : selection) {
    for (const auto& ind : spec.indicators) {
      for (const auto& attr : spec.attributes) {
        InfluenceEntry e{s.scenario_id, ind.id, attr.id, 0.0, 0.0, InfluenceStatus::central};
        try {
          const auto raw = attribute_influence(model, s, ind.id, attr.id, policy.step(attr.id));
          e.raw = raw.value;
          e.status = raw.status;
        } catch (const Error& err) {
          if (err.code() != ErrorCode::domain) throw;
          e.status = InfluenceStatus::out_of_domain;
        }
        factor = std::max(factor, std::abs(e.raw));
        matrix.entries.push_back(std::move(e));
      }
    }
  }
  matrix.normalization_factor = factor;
  if (factor > 0.0) {
    for (auto& e : matrix.entries) e.normalized = std::clamp(e.raw / factor, -1.0, 1.0);
  }
  return matrix;
}

MainInfluencer main_influencer(const InfluenceMatrix& matrix, int scenario_id,
                               std::string_view indicator_id) {
  const InfluenceEntry* best = nullptr;
  for (const auto& e : matrix.entries) {
    if (e.scenario_id != scenario_id || e.indicator_id != indicator_id) continue;
    if (best == nullptr || std::abs(e.normalized) > std::abs(best->normalized)) best = &e;
  }
  if (best == nullptr) {
    throw Error(ErrorCode::not_found, "no influence entries for scenario " +
                                          std::to_string(scenario_id) + ", indicator '" +
                                          std::string(indicator_id) + "'");
  }
  return {best->attribute_id, best->normalized == 0.0};
}

}  // namespace rankforge
