#include "rankforge/rival.hpp"

#include <algorithm>
#include <cmath>

#include "rankforge/error.hpp"
#include "rankforge/random.hpp"

namespace rankforge {

std::string_view to_string(RivalMethodId id) noexcept {
  switch (id) {
    case RivalMethodId::carry_forward: return "carry_forward";
    case RivalMethodId::trend_extrapolation: return "trend_extrapolation";
    case RivalMethodId::model_based: return "model_based";
  }
  return "carry_forward";
}

RivalMethodId parse_rival_method(std::string_view text) {
  if (text == "carry_forward") return RivalMethodId::carry_forward;
  if (text == "trend_extrapolation") return RivalMethodId::trend_extrapolation;
  if (text == "model_based") return RivalMethodId::model_based;
  throw Error(ErrorCode::validation, "unknown rival method '" + std::string(text) + "'");
}

std::vector<RivalMethod> default_rival_methods(std::size_t members, std::uint64_t seed) {
  return {
      {RivalMethodId::carry_forward, members, 3, seed},
      {RivalMethodId::trend_extrapolation, members, 3, seed},
      {RivalMethodId::model_based, members, 3, seed},
  };
}

namespace {

std::vector<const RankeeRecord*> by_year(std::span<const RankeeRecord> history) {
  std::vector<const RankeeRecord*> sorted;
  sorted.reserve(history.size());
  for (const auto& r : history) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->year < b->year; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->rankee_id != sorted[0]->rankee_id) {
      throw Error(ErrorCode::validation, "rival history mixes rankees '" + sorted[0]->rankee_id +
                                             "' and '" + sorted[i]->rankee_id + "'");
    }
    if (sorted[i]->year == sorted[i - 1]->year) {
      throw Error(ErrorCode::validation, "rival history repeats year " + std::to_string(sorted[i]->year),
                  sorted[i]->rankee_id);
    }
  }
  return sorted;
}

double score_of(const RankeeRecord& rec, const std::string& subject_id) {
  if (subject_id == "final") return rec.final_score;
  const auto it = rec.indicator_scores.find(subject_id);
  if (it == rec.indicator_scores.end()) {
    throw Error(ErrorCode::schema, "record has no score for '" + subject_id + "'",
                rec.rankee_id + "/" + std::to_string(rec.year));
  }
  return it->second;
}

std::vector<std::string> subject_ids(const RankingSystemSpec& spec) {
  std::vector<std::string> ids;
  for (const auto& ind : spec.indicators) ids.push_back(ind.id);
  ids.emplace_back("final");
  return ids;
}

// center + bootstrap of `residuals`, clamped; constant when there are none.
EnsemblePrediction bootstrap_around(const std::string& subject, double center,
                                    const std::vector<double>& residuals, std::size_t members,
                                    std::uint64_t seed, const RankingSystemSpec& spec) {
  std::vector<double> values(members, spec.clamp_score(center));
  if (!residuals.empty()) {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, residuals.size() - 1);
    for (auto& v : values) v = spec.clamp_score(center + residuals[pick(rng)]);
  }
  return EnsemblePrediction(subject, std::move(values));
}

std::uint64_t subject_seed(const RivalMethod& method, const std::string& rankee,
                           const std::string& subject) {
  return derive_seed(derive_seed(method.seed, static_cast<std::uint64_t>(method.id) + 1),
                     stable_hash(rankee) ^ mix_seed(stable_hash(subject)));
}

EnsembleMap carry_forward(const RivalMethod& method, const std::vector<const RankeeRecord*>& recs,
                          const RankingSystemSpec& spec) {
  EnsembleMap out;
  const auto& last = *recs.back();
  for (const auto& subject : subject_ids(spec)) {
    std::vector<double> changes;
    for (std::size_t i = 1; i < recs.size(); ++i) {
      if (recs[i]->year != recs[i - 1]->year + 1) continue;
      changes.push_back(score_of(*recs[i], subject) - score_of(*recs[i - 1], subject));
    }
    out.emplace(subject, bootstrap_around(subject, score_of(last, subject), changes, method.members,
                                          subject_seed(method, last.rankee_id, subject), spec));
  }
  return out;
}

EnsembleMap trend(const RivalMethod& method, const std::vector<const RankeeRecord*>& recs,
                  const RankingSystemSpec& spec) {
  const std::size_t window = std::min(std::max<std::size_t>(method.trend_window, 2), recs.size());
  const std::span<const RankeeRecord* const> used(recs.data() + (recs.size() - window), window);
  const double target_year = static_cast<double>(used.back()->year + 1);

  double year_mean = 0.0;
  for (const auto* r : used) year_mean += r->year;
  year_mean /= static_cast<double>(window);
  double sxx = 0.0;
  for (const auto* r : used) sxx += (r->year - year_mean) * (r->year - year_mean);

  EnsembleMap out;
  for (const auto& subject : subject_ids(spec)) {
    double y_mean = 0.0;
    for (const auto* r : used) y_mean += score_of(*r, subject);
    y_mean /= static_cast<double>(window);
    double sxy = 0.0;
    for (const auto* r : used) sxy += (r->year - year_mean) * (score_of(*r, subject) - y_mean);
    const double slope = sxy / sxx;
    const double intercept = y_mean - slope * year_mean;

    std::vector<double> residuals;
    bool all_zero = true;
    for (const auto* r : used) {
      const double e = score_of(*r, subject) - (intercept + slope * r->year);
      residuals.push_back(e);
      all_zero = all_zero && std::abs(e) < 1e-12;
    }
    if (all_zero) residuals.clear();
    out.emplace(subject, bootstrap_around(subject, intercept + slope * target_year, residuals,
                                          method.members,
                                          subject_seed(method, used.back()->rankee_id, subject), spec));
  }
  return out;
}

}  // namespace

EnsembleMap predict_rival(const RivalMethod& method, std::span<const RankeeRecord> rival_history,
                          const Predictor& model) {
  const auto& spec = model.spec();
  const auto method_name = std::string(to_string(method.id));
  if (rival_history.empty()) {
    throw Error(ErrorCode::validation, "rival has no history", method_name);
  }
  if (method.members < 1) throw Error(ErrorCode::validation, "rival ensemble size must be >= 1", method_name);
  const auto recs = by_year(rival_history);

  switch (method.id) {
    case RivalMethodId::carry_forward:
      return carry_forward(method, recs, spec);
    case RivalMethodId::trend_extrapolation:
      if (recs.size() < 2) {
        throw Error(ErrorCode::validation,
                    "trend extrapolation needs at least 2 years of history for '" +
                        recs.front()->rankee_id + "'",
                    method_name);
      }
      return trend(method, recs, spec);
    case RivalMethodId::model_based: {
      auto out = predict_all_indicators(model, recs.back()->attribute_values);
      auto final_pred = predict_final(out, spec);
      out.emplace("final", std::move(final_pred));
      return out;
    }
  }
  throw Error(ErrorCode::validation, "unknown rival method", method_name);
}

double win_probability(const EnsemblePrediction& ours, const EnsemblePrediction& rival) {
  if (ours.empty() || rival.empty()) {
    throw Error(ErrorCode::contract, "win probability needs non-empty ensembles");
  }
  std::vector<double> sorted(rival.members().begin(), rival.members().end());
  std::sort(sorted.begin(), sorted.end());
  // Twice the score: 2 per strict win, 1 per tie.
  unsigned long long doubled = 0;
  for (double v : ours.members()) {
    const auto lower = std::lower_bound(sorted.begin(), sorted.end(), v);
    const auto upper = std::upper_bound(lower, sorted.end(), v);
    doubled += 2ULL * static_cast<unsigned long long>(lower - sorted.begin()) +
               static_cast<unsigned long long>(upper - lower);
  }
  const auto pairs = static_cast<unsigned long long>(ours.size()) * rival.size();
  return static_cast<double>(doubled) / static_cast<double>(2ULL * pairs);
}

RivalBook RivalBook::build(
    const std::map<std::string, std::vector<RankeeRecord>, std::less<>>& histories,
    std::span<const RivalMethod> methods, const Predictor& model) {
  RivalBook book;
  for (const auto& m : methods) book.methods_.push_back(m.id);
  for (const auto& [rival_id, history] : histories) {
    book.rival_ids_.push_back(rival_id);
    for (const auto& m : methods) {
      Entry e{rival_id, m.id, std::nullopt, {}};
      try {
        e.predictions = predict_rival(m, history, model);
      } catch (const Error& err) {
        e.error = err.describe();
      }
      book.entries_.push_back(std::move(e));
    }
  }
  return book;
}

const RivalBook::Entry& RivalBook::entry(std::string_view rival_id, RivalMethodId method) const {
  for (const auto& e : entries_) {
    if (e.rival_id == rival_id && e.method == method) return e;
  }
  throw Error(ErrorCode::not_found, "no prediction for rival '" + std::string(rival_id) +
                                        "' with method " + std::string(to_string(method)));
}

bool RivalBook::has_rival(std::string_view rival_id) const noexcept {
  return std::find(rival_ids_.begin(), rival_ids_.end(), rival_id) != rival_ids_.end();
}

namespace {

std::vector<Subject> heat_subjects(const RankingSystemSpec& spec) {
  std::vector<Subject> out;
  for (const auto& ind : spec.indicators) out.push_back(Subject::indicator(ind.id));
  out.push_back(Subject::final_score());
  return out;
}

const EnsemblePrediction& rival_subject(const EnsembleMap& preds, const Subject& subject) {
  const auto key = subject.kind == SubjectKind::final_score ? std::string("final") : subject.id;
  const auto it = preds.find(key);
  if (it == preds.end()) throw Error(ErrorCode::schema, "rival prediction lacks '" + key + "'");
  return it->second;
}

}  // namespace

std::vector<WinProbabilityCell> heatmap(const Scenario& scenario, const RivalBook& rivals,
                                        const RankingSystemSpec& spec) {
  const auto subjects = heat_subjects(spec);
  std::vector<WinProbabilityCell> cells;
  cells.reserve(rivals.entries().size() * subjects.size());
  for (const auto& e : rivals.entries()) {
    for (const auto& subject : subjects) {
      WinProbabilityCell cell{e.rival_id, e.method, subject, std::nullopt, e.error};
      if (e.predictions) {
        cell.probability =
            win_probability(scenario.prediction(subject), rival_subject(*e.predictions, subject));
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

ScoreDistribution score_distribution(const EnsemblePrediction& ensemble, const Subject& subject,
                                     const RankingSystemSpec& spec, std::size_t bins) {
  if (bins < 1) throw Error(ErrorCode::validation, "density needs at least one bin");
  ScoreDistribution d;
  d.subject = subject;
  d.members.assign(ensemble.members().begin(), ensemble.members().end());
  d.expected_value = ensemble.mean();
  const double lo = spec.score_min;
  const double width = (spec.score_max - spec.score_min) / static_cast<double>(bins);
  d.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) d.bin_edges[i] = lo + static_cast<double>(i) * width;
  d.bin_edges.back() = spec.score_max;

  std::vector<std::size_t> counts(bins, 0);
  for (double v : d.members) {
    const auto upper = std::upper_bound(d.bin_edges.begin(), d.bin_edges.end(), v);
    auto idx = static_cast<std::ptrdiff_t>(upper - d.bin_edges.begin()) - 1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++counts[static_cast<std::size_t>(idx)];
  }
  d.density.resize(bins);
  const auto total = static_cast<double>(d.members.size());
  for (std::size_t i = 0; i < bins; ++i) d.density[i] = static_cast<double>(counts[i]) / total;
  return d;
}

RadarPayload radar_data(const Scenario& scenario, const RivalBook& rivals, RivalMethodId method,
                        const std::optional<std::string>& highlight, const RankingSystemSpec& spec) {
  if (highlight && !rivals.has_rival(*highlight)) {
    throw Error(ErrorCode::validation, "unknown rival '" + *highlight + "'", "highlight");
  }
  if (std::find(rivals.methods().begin(), rivals.methods().end(), method) == rivals.methods().end()) {
    throw Error(ErrorCode::validation,
                "method " + std::string(to_string(method)) + " is not configured", "method");
  }
  RadarPayload payload;
  payload.method = method;
  payload.highlight = highlight;
  for (const auto& subject : heat_subjects(spec)) {
    RadarSubject rs;
    rs.subject = subject;
    rs.ours = score_distribution(scenario.prediction(subject), subject, spec);
    for (const auto& rival_id : rivals.rival_ids()) {
      const auto& e = rivals.entry(rival_id, method);
      RivalExpectation exp{rival_id, std::nullopt, e.error};
      if (e.predictions) {
        const auto& pred = rival_subject(*e.predictions, subject);
        exp.expected_value = pred.mean();
        if (highlight && *highlight == rival_id) {
          rs.highlighted = score_distribution(pred, subject, spec);
        }
      }
      rs.rivals.push_back(std::move(exp));
    }
    payload.subjects.push_back(std::move(rs));
  }
  return payload;
}

}  // namespace rankforge
