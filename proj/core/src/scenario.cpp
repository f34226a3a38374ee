#include "rankforge/scenario.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <thread>

#include "rankforge/error.hpp"
#include "rankforge/text.hpp"

namespace rankforge {

AttributeRange AttributeRange::stepped(std::string attribute_id, double min, double max,
                                       double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorCode::validation, "range step must be > 0", attribute_id);
  }
  if (!(min <= max)) throw Error(ErrorCode::validation, "range min must be <= max", attribute_id);
  AttributeRange range{std::move(attribute_id), {}};
  const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  range.values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    range.values.push_back(std::min(min + static_cast<double>(i) * step, max));
  }
  return range;
}

AttributeRange AttributeRange::single(std::string attribute_id, double value) {
  return AttributeRange{std::move(attribute_id), {value}};
}

void AttributeRange::validate(const RankingSystemSpec& spec) const {
  const auto& attr = spec.attribute(attribute_id);
  if (values.empty()) throw Error(ErrorCode::validation, "range has no values", attribute_id);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto where = attribute_id + "[" + std::to_string(i) + "]";
    if (!std::isfinite(values[i])) throw Error(ErrorCode::validation, "range value is not finite", where);
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw Error(ErrorCode::validation, "range values must be strictly ascending", where);
    }
    if (!attr.contains(values[i])) {
      throw Error(ErrorCode::validation,
                  "value " + format_double(values[i]) + " outside domain [" +
                      format_double(attr.domain_min) + ", " + format_double(attr.domain_max) + "]",
                  where);
    }
  }
}

const EnsemblePrediction& Scenario::prediction(const Subject& subject) const {
  switch (subject.kind) {
    case SubjectKind::final_score: return final_prediction;
    case SubjectKind::indicator_score: {
      const auto it = indicator_predictions.find(subject.id);
      if (it == indicator_predictions.end()) {
        throw Error(ErrorCode::schema, "scenario has no prediction for '" + subject.id + "'");
      }
      return it->second;
    }
    case SubjectKind::attribute: break;
  }
  throw Error(ErrorCode::validation, "attributes have no ensemble prediction", subject.key());
}

unsigned long long scenario_product(std::span<const AttributeRange> ranges) {
  unsigned long long product = 1;
  for (const auto& r : ranges) {
    const auto n = static_cast<unsigned long long>(r.values.size());
    if (n != 0 && product > ULLONG_MAX / n) return ULLONG_MAX;
    product *= n;
  }
  return product;
}

namespace {

struct Grid {
  std::vector<std::string> ids;          // spec attribute order
  std::vector<std::vector<double>> axes;  // values per attribute
};

Grid build_grid(std::span<const AttributeRange> ranges, const RankeeRecord& baseline,
                const RankingSystemSpec& spec) {
  std::set<std::string, std::less<>> seen;
  for (const auto& r : ranges) {
    r.validate(spec);
    if (!seen.insert(r.attribute_id).second) {
      throw Error(ErrorCode::validation, "duplicate range for attribute", r.attribute_id);
    }
  }
  Grid grid;
  for (const auto& attr : spec.attributes) {
    grid.ids.push_back(attr.id);
    const auto it = std::find_if(ranges.begin(), ranges.end(),
                                 [&](const AttributeRange& r) { return r.attribute_id == attr.id; });
    if (it != ranges.end()) {
      grid.axes.push_back(it->values);
      continue;
    }
    const auto base = baseline.attribute_values.find(attr.id);
    if (base == baseline.attribute_values.end()) {
      throw Error(ErrorCode::no_baseline, "baseline has no value and no range was given",
                  "attr_" + attr.id);
    }
    grid.axes.push_back({base->second});
  }
  return grid;
}

Scenario evaluate_point(const Grid& grid, std::size_t index, const RankeeRecord& baseline,
                        const Predictor& model, const RankField* field) {
  Scenario s;
  s.scenario_id = static_cast<int>(index);
  // Decode the mixed-radix index; the last attribute varies fastest.
  std::size_t rest = index;
  std::vector<double> point(grid.axes.size());
  for (std::size_t k = grid.axes.size(); k-- > 0;) {
    const auto radix = grid.axes[k].size();
    point[k] = grid.axes[k][rest % radix];
    rest /= radix;
  }
  for (std::size_t k = 0; k < grid.ids.size(); ++k) {
    s.attribute_values.emplace(grid.ids[k], point[k]);
    const auto base = baseline.attribute_values.find(grid.ids[k]);
    const std::optional<double> prev =
        base == baseline.attribute_values.end() ? std::nullopt : std::optional<double>(base->second);
    s.attribute_deltas.emplace(grid.ids[k],
                               relative_change(point[k], prev, SubjectKind::attribute, grid.ids[k]));
  }
  s.indicator_predictions = predict_all_indicators(model, s.attribute_values);
  s.final_prediction = predict_final(s.indicator_predictions, model.spec());
  s.rank_distribution = field != nullptr ? field->rank_distribution(s.final_prediction)
                                         : predict_rank(s.final_prediction, {});
  return s;
}

}  // namespace

std::vector<Scenario> generate_scenarios(std::span<const AttributeRange> ranges,
                                         const RankeeRecord& baseline, const Predictor& model,
                                         std::size_t cap, const RankField* rank_field) {
  const auto& spec = model.spec();
  if (cap < 1) throw Error(ErrorCode::validation, "scenario cap must be >= 1");
  const auto grid = build_grid(ranges, baseline, spec);

  unsigned long long product = 1;
  for (const auto& axis : grid.axes) {
    const auto n = static_cast<unsigned long long>(axis.size());
    product = product > ULLONG_MAX / n ? ULLONG_MAX : product * n;
  }
  if (product > cap) throw CapacityError(product, cap);
  if (rank_field != nullptr && rank_field->member_count() != model.member_count()) {
    throw Error(ErrorCode::contract, "rank field member count differs from the model");
  }

  const auto count = static_cast<std::size_t>(product);
  std::vector<Scenario> out(count);
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, count / 256));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = evaluate_point(grid, i, baseline, model, rank_field);
    return out;
  }

  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers) {
            out[i] = evaluate_point(grid, i, baseline, model, rank_field);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

double baseline_value(const Subject& subject, const RankeeRecord& baseline) {
  switch (subject.kind) {
    case SubjectKind::final_score: return baseline.final_score;
    case SubjectKind::indicator_score: {
      const auto it = baseline.indicator_scores.find(subject.id);
      if (it == baseline.indicator_scores.end()) {
        throw Error(ErrorCode::no_baseline, "baseline has no score for indicator '" + subject.id + "'");
      }
      return it->second;
    }
    case SubjectKind::attribute: {
      const auto it = baseline.attribute_values.find(subject.id);
      if (it == baseline.attribute_values.end()) {
        throw Error(ErrorCode::no_baseline, "baseline has no value for attribute '" + subject.id + "'");
      }
      return it->second;
    }
  }
  return 0.0;
}

double mean_delta(const Scenario& scenario, const Subject& subject, const RankeeRecord& baseline) {
  if (subject.kind == SubjectKind::attribute) {
    const auto it = scenario.attribute_values.find(subject.id);
    if (it == scenario.attribute_values.end()) {
      throw Error(ErrorCode::schema, "scenario has no attribute '" + subject.id + "'");
    }
    return it->second - baseline_value(subject, baseline);
  }
  return scenario.prediction(subject).mean() - baseline_value(subject, baseline);
}

// ---------------------------------------------------------------------------
// Filtering

namespace {

bool compare(double value, CompareOp op, double bound, double upper) {
  switch (op) {
    case CompareOp::gt: return value > bound;
    case CompareOp::ge: return value >= bound;
    case CompareOp::lt: return value < bound;
    case CompareOp::le: return value <= bound;
    case CompareOp::between: return value >= bound && value <= upper;
  }
  return false;
}

bool matches(const Scenario& s, const FilterPredicate& p, const RankeeRecord& baseline) {
  if (p.subject.kind == SubjectKind::attribute || p.measure == Measure::mean_delta) {
    return compare(mean_delta(s, p.subject, baseline), p.op, p.bound, p.upper);
  }
  const auto& pred = s.prediction(p.subject);
  const double base = baseline_value(p.subject, baseline);
  return std::all_of(pred.members().begin(), pred.members().end(),
                     [&](double m) { return compare(m - base, p.op, p.bound, p.upper); });
}

}  // namespace

FilterPredicate FilterPredicate::parse(std::string_view text) {
  const auto t = trim(text);
  const auto space = t.find_first_of(" \t");
  if (space == std::string_view::npos) {
    throw Error(ErrorCode::parse, "filter predicate needs '<subject> <measure><op><bound>'", std::string(text));
  }
  FilterPredicate p;
  p.subject = Subject::parse(t.substr(0, space));

  std::string rest;
  for (char c : t.substr(space + 1)) {
    if (c != ' ' && c != '\t') rest.push_back(c);
  }
  std::string_view r = rest;
  if (r.starts_with("member")) {
    p.measure = Measure::member_delta;
    r.remove_prefix(6);
  } else if (r.starts_with("mean")) {
    r.remove_prefix(4);
  } else if (r.starts_with("value")) {
    r.remove_prefix(5);
  } else {
    throw Error(ErrorCode::parse, "unknown filter measure (expected mean or member)", std::string(text));
  }

  if (r.starts_with("in[") && r.ends_with("]")) {
    const auto inner = r.substr(3, r.size() - 4);
    const auto comma = inner.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::parse, "between needs in[lo,hi]", std::string(text));
    }
    p.op = CompareOp::between;
    p.bound = parse_double(inner.substr(0, comma), "filter bound");
    p.upper = parse_double(inner.substr(comma + 1), "filter bound");
    if (p.upper < p.bound) throw Error(ErrorCode::validation, "between bounds reversed", std::string(text));
    return p;
  }
  if (r.starts_with(">=")) {
    p.op = CompareOp::ge;
    r.remove_prefix(2);
  } else if (r.starts_with("<=")) {
    p.op = CompareOp::le;
    r.remove_prefix(2);
  } else if (r.starts_with(">")) {
    p.op = CompareOp::gt;
    r.remove_prefix(1);
  } else if (r.starts_with("<")) {
    p.op = CompareOp::lt;
    r.remove_prefix(1);
  } else {
    throw Error(ErrorCode::parse, "unknown filter operator", std::string(text));
  }
  p.bound = parse_double(r, "filter bound");
  return p;
}

std::string FilterPredicate::to_string() const {
  std::string out = subject.key();
  out += measure == Measure::member_delta ? " member" : " mean";
  switch (op) {
    case CompareOp::gt: out += ">" + format_double(bound); break;
    case CompareOp::ge: out += ">=" + format_double(bound); break;
    case CompareOp::lt: out += "<" + format_double(bound); break;
    case CompareOp::le: out += "<=" + format_double(bound); break;
    case CompareOp::between:
      out += " in[" + format_double(bound) + "," + format_double(upper) + "]";
      break;
  }
  return out;
}

ScenarioFilter ScenarioFilter::parse(std::string_view text) {
  ScenarioFilter f;
  for (auto part : split(text, ';')) {
    if (trim(part).empty()) continue;
    f.predicates.push_back(FilterPredicate::parse(part));
  }
  return f;
}

std::string ScenarioFilter::to_string() const {
  std::string out;
  for (const auto& p : predicates) {
    if (!out.empty()) out += "; ";
    out += p.to_string();
  }
  return out;
}

void ScenarioFilter::validate(const RankingSystemSpec& spec) const {
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    try {
      check_subject(predicates[i].subject, spec);
    } catch (const Error& e) {
      throw Error(ErrorCode::validation, e.what(), "filter[" + std::to_string(i) + "]");
    }
  }
}

bool matches(const Scenario& scenario, const ScenarioFilter& filter, const RankeeRecord& baseline) {
  return std::all_of(filter.predicates.begin(), filter.predicates.end(),
                     [&](const FilterPredicate& p) { return matches(scenario, p, baseline); });
}

std::vector<std::size_t> filter_indices(std::span<const Scenario> scenarios,
                                        const ScenarioFilter& filter, const RankeeRecord& baseline,
                                        const RankingSystemSpec& spec) {
  filter.validate(spec);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (matches(scenarios[i], filter, baseline)) kept.push_back(i);
  }
  return kept;
}

std::vector<Scenario> filter_scenarios(std::span<const Scenario> scenarios,
                                       const ScenarioFilter& filter, const RankeeRecord& baseline,
                                       const RankingSystemSpec& spec) {
  std::vector<Scenario> out;
  for (auto i : filter_indices(scenarios, filter, baseline, spec)) out.push_back(scenarios[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Sorting

SortDirection parse_sort_direction(std::string_view text) {
  if (text == "asc" || text == "ascending") return SortDirection::ascending;
  if (text == "desc" || text == "descending") return SortDirection::descending;
  throw Error(ErrorCode::validation, "sort direction must be asc or desc", std::string(text));
}

double sort_key(const Scenario& scenario, const Subject& key) {
  if (key.kind == SubjectKind::attribute) {
    const auto it = scenario.attribute_values.find(key.id);
    if (it == scenario.attribute_values.end()) {
      throw Error(ErrorCode::validation, "unknown sort key", key.key());
    }
    return it->second;
  }
  return scenario.prediction(key).mean();
}

std::vector<std::size_t> sort_indices(std::span<const Scenario> scenarios, const Subject& key,
                                      SortDirection direction, const RankingSystemSpec& spec) {
  try {
    check_subject(key, spec);
  } catch (const Error& e) {
    throw Error(ErrorCode::validation, e.what(), "sort");
  }
  std::vector<double> keys(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) keys[i] = sort_key(scenarios[i], key);
  std::vector<std::size_t> order(scenarios.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (direction == SortDirection::ascending) {
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
  } else {
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] > keys[b]; });
  }
  return order;
}

std::vector<Scenario> sort_scenarios(std::span<const Scenario> scenarios, const Subject& key,
                                     SortDirection direction, const RankingSystemSpec& spec) {
  std::vector<Scenario> out;
  out.reserve(scenarios.size());
  for (auto i : sort_indices(scenarios, key, direction, spec)) out.push_back(scenarios[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

UncertaintyBand uncertainty_band(const Scenario& scenario, const Subject& subject,
                                 const RankeeRecord& baseline) {
  if (subject.kind == SubjectKind::attribute) {
    throw Error(ErrorCode::validation, "uncertainty bands exist only for indicators and final",
                subject.key());
  }
  const auto& pred = scenario.prediction(subject);
  const double base = baseline_value(subject, baseline);
  return {pred.min() - base, pred.max() - base};
}

std::size_t HistogramSummary::total() const noexcept {
  return std::accumulate(frequencies.begin(), frequencies.end(), std::size_t{0});
}

namespace {

HistogramSummary bin_deltas(std::span<const Scenario> scenarios, const Subject& subject,
                            const RankeeRecord& baseline, const std::vector<double>& deltas,
                            std::vector<double> edges) {
  HistogramSummary h;
  h.subject = subject;
  const std::size_t bins = edges.size() - 1;
  h.frequencies.assign(bins, 0);
  for (double d : deltas) {
    const auto upper = std::upper_bound(edges.begin(), edges.end(), d);
    auto idx = static_cast<std::ptrdiff_t>(upper - edges.begin()) - 1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++h.frequencies[static_cast<std::size_t>(idx)];
  }
  h.bin_edges = std::move(edges);

  h.bands.reserve(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto band = subject.kind == SubjectKind::attribute
                          ? UncertaintyBand{deltas[i], deltas[i]}
                          : uncertainty_band(scenarios[i], subject, baseline);
    h.bands.push_back({scenarios[i].scenario_id, band});
    if (i == 0) {
      h.aggregate_band = band;
    } else {
      h.aggregate_band.min_delta = std::min(h.aggregate_band.min_delta, band.min_delta);
      h.aggregate_band.max_delta = std::max(h.aggregate_band.max_delta, band.max_delta);
    }
  }
  return h;
}

std::vector<double> collect_deltas(std::span<const Scenario> scenarios, const Subject& subject,
                                   const RankeeRecord& baseline) {
  std::vector<double> deltas;
  deltas.reserve(scenarios.size());
  for (const auto& s : scenarios) deltas.push_back(mean_delta(s, subject, baseline));
  return deltas;
}

}  // namespace

HistogramSummary summarize(std::span<const Scenario> scenarios, const Subject& subject,
                           const RankeeRecord& baseline, std::size_t bins) {
  if (bins < 1) throw Error(ErrorCode::validation, "summary needs at least one bin");
  if (scenarios.empty()) return {subject, {}, {}, {}, {}};
  const auto deltas = collect_deltas(scenarios, subject, baseline);
  const auto [lo_it, hi_it] = std::minmax_element(deltas.begin(), deltas.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  std::vector<double> edges;
  if (lo == hi) {
    edges = {lo, hi};
  } else {
    edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + static_cast<double>(i) * width;
    edges.back() = hi;
  }
  return bin_deltas(scenarios, subject, baseline, deltas, std::move(edges));
}

HistogramSummary summarize_with_edges(std::span<const Scenario> scenarios, const Subject& subject,
                                      const RankeeRecord& baseline, std::vector<double> edges) {
  if (edges.size() < 2) throw Error(ErrorCode::validation, "fixed edges need at least two entries");
  const bool degenerate = edges.size() == 2 && edges[0] == edges[1];
  for (std::size_t i = 1; i < edges.size() && !degenerate; ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error(ErrorCode::validation, "fixed edges must be strictly ascending");
    }
  }
  const auto deltas = collect_deltas(scenarios, subject, baseline);
  return bin_deltas(scenarios, subject, baseline, deltas, std::move(edges));
}

}  // namespace rankforge
