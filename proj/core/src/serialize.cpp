#include "rankforge/serialize.hpp"

#include <cmath>

#include "rankforge/error.hpp"
#include "rankforge/text.hpp"

namespace rankforge {

namespace {

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::schema, "expected an object", where);
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::schema, std::string("missing field '") + key + "'", where);
  return *it;
}

double number(const Json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_double(v.get<std::string>());
  throw Error(ErrorCode::schema, "expected a number", where);
}

std::string text(const Json& v, const std::string& where) {
  if (!v.is_string()) throw Error(ErrorCode::schema, "expected a string", where);
  return v.get<std::string>();
}

Json bound_to_json(double v) {
  if (std::isinf(v)) return format_double(v);
  return v;
}

template <typename F>
auto schema_guard(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::schema, std::string(what) + ": " + e.what());
  }
}

Json rank_to_json(const RankDistribution& dist) {
  Json d = Json::object();
  for (const auto& [rank, count] : dist) d[std::to_string(rank)] = count;
  return {{"modal", modal_rank(dist)}, {"distribution", d}};
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::parse, e.what(), "byte " + std::to_string(e.byte));
  }
}

Json spec_to_json(const RankingSystemSpec& spec) {
  Json attrs = Json::array();
  for (const auto& a : spec.attributes) {
    attrs.push_back({{"id", a.id}, {"name", a.name}, {"unit", a.unit},
                     {"domain", {a.domain_min, a.domain_max}}});
  }
  Json inds = Json::array();
  for (const auto& i : spec.indicators) {
    inds.push_back({{"id", i.id}, {"name", i.name}, {"weight", i.weight}, {"group", i.attribute_group}});
  }
  return {{"attributes", attrs}, {"indicators", inds}, {"score_bounds", {spec.score_min, spec.score_max}}};
}

RankingSystemSpec spec_from_json(const Json& doc) {
  return schema_guard("spec", [&] {
    RankingSystemSpec spec;
    const auto& attrs = require(doc, "attributes", "spec");
    if (!attrs.is_array()) throw Error(ErrorCode::schema, "expected an array", "attributes");
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      const auto where = "attributes[" + std::to_string(i) + "]";
      const auto& a = attrs[i];
      AttributeSpec spec_attr;
      spec_attr.id = text(require(a, "id", where), where + ".id");
      spec_attr.name = a.contains("name") ? text(a["name"], where + ".name") : spec_attr.id;
      spec_attr.unit = a.contains("unit") ? text(a["unit"], where + ".unit") : std::string{};
      const auto& domain = require(a, "domain", where);
      if (!domain.is_array() || domain.size() != 2) {
        throw Error(ErrorCode::schema, "domain must be [min, max]", where + ".domain");
      }
      spec_attr.domain_min = number(domain[0], where + ".domain");
      spec_attr.domain_max = number(domain[1], where + ".domain");
      spec.attributes.push_back(std::move(spec_attr));
    }
    const auto& inds = require(doc, "indicators", "spec");
    if (!inds.is_array()) throw Error(ErrorCode::schema, "expected an array", "indicators");
    for (std::size_t i = 0; i < inds.size(); ++i) {
      const auto where = "indicators[" + std::to_string(i) + "]";
      const auto& j = inds[i];
      IndicatorSpec ind;
      ind.id = text(require(j, "id", where), where + ".id");
      ind.name = j.contains("name") ? text(j["name"], where + ".name") : ind.id;
      ind.weight = number(require(j, "weight", where), where + ".weight");
      const auto& group = require(j, "group", where);
      if (!group.is_array()) throw Error(ErrorCode::schema, "group must be an array", where + ".group");
      for (const auto& g : group) ind.attribute_group.push_back(text(g, where + ".group"));
      spec.indicators.push_back(std::move(ind));
    }
    if (doc.contains("score_bounds")) {
      const auto& b = doc["score_bounds"];
      if (!b.is_array() || b.size() != 2) {
        throw Error(ErrorCode::schema, "score_bounds must be [min, max]", "score_bounds");
      }
      spec.score_min = number(b[0], "score_bounds");
      spec.score_max = number(b[1], "score_bounds");
    }
    return spec;
  });
}

Json record_to_json(const RankeeRecord& r) {
  Json attrs = Json::object();
  for (const auto& [k, v] : r.attribute_values) attrs[k] = v;
  Json inds = Json::object();
  for (const auto& [k, v] : r.indicator_scores) inds[k] = v;
  return {{"rankee_id", r.rankee_id}, {"year", r.year}, {"attributes", attrs},
          {"indicators", inds}, {"final_score", r.final_score}, {"rank", r.rank}};
}

RankeeRecord record_from_json(const Json& doc) {
  return schema_guard("record", [&] {
    RankeeRecord r;
    r.rankee_id = text(require(doc, "rankee_id", "record"), "record.rankee_id");
    r.year = require(doc, "year", "record").get<int>();
    for (const auto& [k, v] : require(doc, "attributes", "record").items()) {
      r.attribute_values.emplace(k, number(v, "record.attributes." + k));
    }
    for (const auto& [k, v] : require(doc, "indicators", "record").items()) {
      r.indicator_scores.emplace(k, number(v, "record.indicators." + k));
    }
    r.final_score = number(require(doc, "final_score", "record"), "record.final_score");
    r.rank = require(doc, "rank", "record").get<int>();
    return r;
  });
}

Json model_to_json(const EnsembleModel& model) {
  Json inds = Json::array();
  for (const auto& ens : model.indicators()) {
    Json members = Json::array();
    for (const auto& m : ens.members) {
      members.push_back({{"intercept", m.intercept}, {"coefficients", m.coefficients}});
    }
    inds.push_back({{"id", ens.indicator_id}, {"group", ens.attribute_group}, {"members", members}});
  }
  const auto& meta = model.metadata();
  return {{"kind", "bootstrap_ridge"},
          {"members", model.member_count()},
          {"ridge_lambda", meta.ridge_lambda},
          {"seed", meta.seed},
          {"years", meta.years},
          {"rows", meta.rows},
          {"indicators", inds}};
}

EnsembleModel model_from_json(const Json& doc, const RankingSystemSpec& spec) {
  return schema_guard("model", [&] {
    TrainingMetadata meta;
    meta.ridge_lambda = number(require(doc, "ridge_lambda", "model"), "model.ridge_lambda");
    meta.seed = require(doc, "seed", "model").get<std::uint64_t>();
    if (doc.contains("years")) meta.years = doc["years"].get<std::vector<int>>();
    if (doc.contains("rows")) meta.rows = doc["rows"].get<std::size_t>();
    std::vector<IndicatorEnsemble> ensembles;
    const auto& inds = require(doc, "indicators", "model");
    for (std::size_t i = 0; i < inds.size(); ++i) {
      const auto where = "model.indicators[" + std::to_string(i) + "]";
      IndicatorEnsemble ens;
      ens.indicator_id = text(require(inds[i], "id", where), where);
      ens.attribute_group = require(inds[i], "group", where).get<std::vector<std::string>>();
      for (const auto& m : require(inds[i], "members", where)) {
        ens.members.push_back({number(require(m, "intercept", where), where),
                               require(m, "coefficients", where).get<std::vector<double>>()});
      }
      ensembles.push_back(std::move(ens));
    }
    EnsembleModel model(spec, std::move(ensembles), std::move(meta));
    if (doc.contains("members") && doc["members"].get<std::size_t>() != model.member_count()) {
      throw Error(ErrorCode::schema, "declared member count disagrees with the ensembles", "model.members");
    }
    return model;
  });
}

Json range_to_json(const AttributeRange& range) {
  return {{"attribute", range.attribute_id}, {"values", range.values}};
}

AttributeRange range_from_json(const Json& doc) {
  return schema_guard("range", [&] {
    const auto id = text(require(doc, "attribute", "range"), "range.attribute");
    if (doc.contains("values")) {
      AttributeRange r{id, {}};
      for (const auto& v : doc["values"]) r.values.push_back(number(v, "range." + id));
      return r;
    }
    return AttributeRange::stepped(id, number(require(doc, "min", id), id),
                                   number(require(doc, "max", id), id),
                                   number(require(doc, "step", id), id));
  });
}

namespace {

std::string_view op_text(CompareOp op) {
  switch (op) {
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::between: return "between";
  }
  return ">";
}

CompareOp op_from_text(std::string_view s) {
  if (s == ">" || s == "gt") return CompareOp::gt;
  if (s == ">=" || s == "ge" || s == "≥") return CompareOp::ge;
  if (s == "<" || s == "lt") return CompareOp::lt;
  if (s == "<=" || s == "le" || s == "≤") return CompareOp::le;
  if (s == "between" || s == "in") return CompareOp::between;
  throw Error(ErrorCode::schema, "unknown comparison '" + std::string(s) + "'", "filter.op");
}

std::string_view subject_kind_text(SubjectKind kind) {
  switch (kind) {
    case SubjectKind::attribute: return "attribute";
    case SubjectKind::indicator_score: return "indicator";
    case SubjectKind::final_score: return "final";
  }
  return "final";
}

}  // namespace

Json predicate_to_json(const FilterPredicate& p) {
  Json bounds = Json::array({bound_to_json(p.bound)});
  if (p.op == CompareOp::between) bounds.push_back(bound_to_json(p.upper));
  return {{"subject", subject_kind_text(p.subject.kind)},
          {"id", p.subject.id},
          {"measure", p.measure == Measure::member_delta ? "member" : "mean"},
          {"op", op_text(p.op)},
          {"bounds", bounds}};
}

FilterPredicate predicate_from_json(const Json& doc) {
  if (doc.is_string()) return FilterPredicate::parse(doc.get<std::string>());
  return schema_guard("filter", [&] {
    FilterPredicate p;
    const auto kind = parse_subject_kind(text(require(doc, "subject", "filter"), "filter.subject"));
    p.subject = kind == SubjectKind::final_score
                    ? Subject::final_score()
                    : Subject{kind, text(require(doc, "id", "filter"), "filter.id")};
    if (doc.contains("measure")) {
      const auto m = text(doc["measure"], "filter.measure");
      if (m == "member" || m == "member_delta") {
        p.measure = Measure::member_delta;
      } else if (m != "mean" && m != "mean_delta") {
        throw Error(ErrorCode::schema, "unknown measure '" + m + "'", "filter.measure");
      }
    }
    p.op = op_from_text(text(require(doc, "op", "filter"), "filter.op"));
    const Json& b = doc.contains("bounds") ? doc["bounds"] : require(doc, "bound", "filter");
    if (b.is_array()) {
      if (b.empty()) throw Error(ErrorCode::schema, "bounds must not be empty", "filter.bounds");
      p.bound = number(b[0], "filter.bounds");
      if (p.op == CompareOp::between) {
        if (b.size() != 2) throw Error(ErrorCode::schema, "between needs two bounds", "filter.bounds");
        p.upper = number(b[1], "filter.bounds");
      }
    } else {
      if (p.op == CompareOp::between) throw Error(ErrorCode::schema, "between needs two bounds", "filter.bounds");
      p.bound = number(b, "filter.bound");
    }
    return p;
  });
}

Json filter_to_json(const ScenarioFilter& filter) {
  Json preds = Json::array();
  for (const auto& p : filter.predicates) preds.push_back(predicate_to_json(p));
  return preds;
}

ScenarioFilter filter_from_json(const Json& doc) {
  if (doc.is_string()) return ScenarioFilter::parse(doc.get<std::string>());
  if (doc.is_object()) return ScenarioFilter{{predicate_from_json(doc)}};
  if (!doc.is_array()) throw Error(ErrorCode::schema, "filter must be an array, object or string", "filter");
  ScenarioFilter f;
  for (const auto& p : doc) f.predicates.push_back(predicate_from_json(p));
  return f;
}

Json ensemble_to_json(const EnsemblePrediction& e, bool with_members) {
  Json out = {{"subject", e.subject_id()}, {"mean", e.mean()}, {"min", e.min()},
              {"max", e.max()}, {"uncertainty", e.uncertainty()}};
  if (with_members) out["members"] = std::vector<double>(e.members().begin(), e.members().end());
  return out;
}

namespace {

Json score_row(const Scenario& s, const Subject& subject, const RankeeRecord& baseline) {
  const auto& pred = s.prediction(subject);
  const auto band = uncertainty_band(s, subject, baseline);
  return {{"mean", pred.mean()},
          {"min", pred.min()},
          {"max", pred.max()},
          {"baseline", baseline_value(subject, baseline)},
          {"mean_delta", mean_delta(s, subject, baseline)},
          {"band", {band.min_delta, band.max_delta}}};
}

}  // namespace

Json scenario_summary_to_json(const Scenario& s, const RankeeRecord& baseline,
                              const RankingSystemSpec& spec) {
  Json attrs = Json::object();
  for (const auto& a : spec.attributes) {
    const auto& d = s.attribute_deltas.at(a.id);
    attrs[a.id] = {{"value", s.attribute_values.at(a.id)}, {"baseline", d.baseline}, {"delta", d.value}};
  }
  Json inds = Json::object();
  for (const auto& i : spec.indicators) inds[i.id] = score_row(s, Subject::indicator(i.id), baseline);
  return {{"scenario_id", s.scenario_id},
          {"attributes", attrs},
          {"indicators", inds},
          {"final", score_row(s, Subject::final_score(), baseline)},
          {"rank", rank_to_json(s.rank_distribution)}};
}

Json scenario_to_json(const Scenario& s, const RankeeRecord& baseline, const RankingSystemSpec& spec) {
  Json out = scenario_summary_to_json(s, baseline, spec);
  for (const auto& i : spec.indicators) {
    const auto& pred = s.indicator_predictions.at(i.id);
    out["indicators"][i.id]["members"] = std::vector<double>(pred.members().begin(), pred.members().end());
  }
  out["final"]["members"] = std::vector<double>(s.final_prediction.members().begin(),
                                                s.final_prediction.members().end());
  return out;
}

Json scenarios_to_json(std::span<const Scenario> scenarios, const RankeeRecord& baseline,
                       const RankingSystemSpec& spec) {
  Json arr = Json::array();
  for (const auto& s : scenarios) arr.push_back(scenario_to_json(s, baseline, spec));
  return arr;
}

std::string scenarios_to_csv(std::span<const Scenario> scenarios, const RankingSystemSpec& spec) {
  std::string out = "scenario_id";
  for (const auto& a : spec.attributes) out += ",attr_" + a.id;
  for (const auto& i : spec.indicators) {
    out += ",ind_" + i.id + "_mean,ind_" + i.id + "_min,ind_" + i.id + "_max";
  }
  out += ",final_mean,final_min,final_max,modal_rank\n";
  for (const auto& s : scenarios) {
    out += std::to_string(s.scenario_id);
    for (const auto& a : spec.attributes) out += ',' + format_double(s.attribute_values.at(a.id));
    for (const auto& i : spec.indicators) {
      const auto& p = s.indicator_predictions.at(i.id);
      out += ',' + format_double(p.mean()) + ',' + format_double(p.min()) + ',' + format_double(p.max());
    }
    const auto& f = s.final_prediction;
    out += ',' + format_double(f.mean()) + ',' + format_double(f.min()) + ',' + format_double(f.max());
    out += ',' + std::to_string(modal_rank(s.rank_distribution)) + '\n';
  }
  return out;
}

Json summary_to_json(const HistogramSummary& h) {
  Json bands = Json::array();
  for (const auto& b : h.bands) {
    bands.push_back({{"scenario_id", b.scenario_id}, {"min_delta", b.band.min_delta},
                     {"max_delta", b.band.max_delta}});
  }
  return {{"subject", h.subject.key()},
          {"kind", to_string(h.subject.kind)},
          {"bin_edges", h.bin_edges},
          {"frequencies", h.frequencies},
          {"total", h.total()},
          {"bands", bands},
          {"aggregate_band", {h.aggregate_band.min_delta, h.aggregate_band.max_delta}}};
}

Json influence_to_json(const InfluenceMatrix& m) {
  Json scen = Json::object();
  for (const auto& e : m.entries) {
    Json flags = Json::array();
    if (e.status != InfluenceStatus::central) flags.push_back(to_string(e.status));
    scen[std::to_string(e.scenario_id)][e.indicator_id][e.attribute_id] = {
        {"raw", e.raw}, {"normalized", e.normalized}, {"flags", flags}};
  }
  return {{"selection_id", m.selection_id},
          {"normalization_factor", m.normalization_factor},
          {"entries", scen}};
}

Json heatmap_to_json(std::span<const WinProbabilityCell> cells) {
  Json arr = Json::array();
  for (const auto& c : cells) {
    Json cell = {{"rival_id", c.rival_id},
                 {"method", to_string(c.method)},
                 {"subject", c.subject.key()}};
    if (c.probability) {
      cell["probability"] = *c.probability;
    } else {
      cell["probability"] = nullptr;
      cell["error"] = c.error;
    }
    arr.push_back(std::move(cell));
  }
  return {{"cells", arr}};
}

namespace {

Json distribution_to_json(const ScoreDistribution& d) {
  return {{"subject", d.subject.key()},
          {"members", d.members},
          {"bin_edges", d.bin_edges},
          {"density", d.density},
          {"expected_value", d.expected_value}};
}

}  // namespace

Json radar_to_json(const RadarPayload& p) {
  Json subjects = Json::array();
  for (const auto& s : p.subjects) {
    Json rivals = Json::array();
    for (const auto& r : s.rivals) {
      Json entry = {{"rival_id", r.rival_id}};
      if (r.expected_value) {
        entry["expected_value"] = *r.expected_value;
      } else {
        entry["expected_value"] = nullptr;
        entry["error"] = r.error;
      }
      rivals.push_back(std::move(entry));
    }
    Json item = {{"subject", s.subject.key()}, {"ours", distribution_to_json(s.ours)}, {"rivals", rivals}};
    item["highlighted"] = s.highlighted ? distribution_to_json(*s.highlighted) : Json(nullptr);
    subjects.push_back(std::move(item));
  }
  return {{"method", to_string(p.method)},
          {"highlight", p.highlight ? Json(*p.highlight) : Json(nullptr)},
          {"subjects", subjects}};
}

}  // namespace rankforge
