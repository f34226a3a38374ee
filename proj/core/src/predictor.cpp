#include "rankforge/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "rankforge/error.hpp"
#include "rankforge/random.hpp"

namespace rankforge {

namespace {

std::vector<double> gather_group(const std::vector<std::string>& group, const ValueMap& attributes,
                                 std::string_view indicator_id) {
  std::vector<double> values;
  values.reserve(group.size());
  for (const auto& attr : group) {
    const auto it = attributes.find(attr);
    if (it == attributes.end()) {
      throw Error(ErrorCode::schema, "attribute '" + attr + "' required by indicator '" +
                                         std::string(indicator_id) + "' is missing");
    }
    values.push_back(it->second);
  }
  return values;
}

struct TrainingRows {
  std::vector<std::vector<double>> x;  // per history row; empty when unusable
  std::vector<double> y;
  std::vector<bool> usable;
};

TrainingRows collect_rows(std::span<const RankeeRecord> history, const IndicatorSpec& ind) {
  TrainingRows rows;
  rows.x.resize(history.size());
  rows.y.resize(history.size(), 0.0);
  rows.usable.resize(history.size(), false);
  for (std::size_t r = 0; r < history.size(); ++r) {
    const auto& rec = history[r];
    const auto score = rec.indicator_scores.find(ind.id);
    if (score == rec.indicator_scores.end()) continue;
    std::vector<double> xs;
    bool complete = true;
    for (const auto& attr : ind.attribute_group) {
      const auto it = rec.attribute_values.find(attr);
      if (it == rec.attribute_values.end()) {
        complete = false;
        break;
      }
      xs.push_back(it->second);
    }
    if (!complete) continue;
    rows.x[r] = std::move(xs);
    rows.y[r] = score->second;
    rows.usable[r] = true;
  }
  return rows;
}

std::size_t distinct_rows(const TrainingRows& rows) {
  std::set<std::vector<double>> seen;
  for (std::size_t r = 0; r < rows.x.size(); ++r) {
    if (!rows.usable[r]) continue;
    auto key = rows.x[r];
    key.push_back(rows.y[r]);
    seen.insert(std::move(key));
  }
  return seen.size();
}

// Ridge regression with an unpenalized intercept. Solved as the augmented
// least-squares system [Xc; sqrt(lambda) I] b = [yc; 0], which has the same
// solution as the regularized normal equations; the orthogonal decomposition
// returns the minimum-norm solution when the design is rank deficient.
LinearMember solve_ridge(const TrainingRows& rows, std::span<const std::size_t> sample,
                         std::size_t k, double lambda) {
  const auto n = static_cast<Eigen::Index>(sample.size());
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd x(n, kk);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = sample[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < kk; ++j) x(i, j) = rows.x[r][static_cast<std::size_t>(j)];
    y(i) = rows.y[r];
  }
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  Eigen::MatrixXd design(n + kk, kk);
  design.topRows(n) = x.rowwise() - x_mean;
  design.bottomRows(kk) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(kk, kk);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(n + kk);
  target.head(n) = y.array() - y_mean;

  const Eigen::VectorXd beta = design.completeOrthogonalDecomposition().solve(target);

  LinearMember member;
  member.coefficients.assign(beta.data(), beta.data() + beta.size());
  member.intercept = y_mean - x_mean.dot(beta);
  return member;
}

}  // namespace

EnsembleModel::EnsembleModel(RankingSystemSpec spec, std::vector<IndicatorEnsemble> indicators,
                             TrainingMetadata metadata)
    : spec_(std::move(spec)), indicators_(std::move(indicators)), metadata_(std::move(metadata)) {
  if (indicators_.size() != spec_.indicators.size()) {
    throw Error(ErrorCode::schema, "model has " + std::to_string(indicators_.size()) +
                                       " indicator ensembles, spec declares " +
                                       std::to_string(spec_.indicators.size()));
  }
  for (std::size_t i = 0; i < indicators_.size(); ++i) {
    const auto& ens = indicators_[i];
    const auto& decl = spec_.indicators[i];
    const auto where = "indicators[" + std::to_string(i) + "]";
    if (ens.indicator_id != decl.id || ens.attribute_group != decl.attribute_group) {
      throw Error(ErrorCode::schema, "model ensemble '" + ens.indicator_id +
                                         "' does not match spec indicator '" + decl.id + "'", where);
    }
    if (i == 0) member_count_ = ens.members.size();
    if (ens.members.size() != member_count_ || member_count_ == 0) {
      throw Error(ErrorCode::contract, "member count differs across indicators", where);
    }
    for (const auto& m : ens.members) {
      if (m.coefficients.size() != ens.attribute_group.size() || !std::isfinite(m.intercept) ||
          !std::all_of(m.coefficients.begin(), m.coefficients.end(),
                       [](double c) { return std::isfinite(c); })) {
        throw Error(ErrorCode::schema, "malformed member in ensemble '" + ens.indicator_id + "'", where);
      }
    }
  }
}

const IndicatorEnsemble& EnsembleModel::indicator(std::string_view id) const {
  for (const auto& ens : indicators_) {
    if (ens.indicator_id == id) return ens;
  }
  throw Error(ErrorCode::schema, "unknown indicator id '" + std::string(id) + "'");
}

std::vector<double> EnsembleModel::predict_members(std::string_view indicator_id,
                                                   const ValueMap& attributes) const {
  const auto& ens = indicator(indicator_id);
  const auto xs = gather_group(ens.attribute_group, attributes, indicator_id);
  std::vector<double> out;
  out.reserve(ens.members.size());
  for (const auto& m : ens.members) {
    double v = m.intercept;
    for (std::size_t j = 0; j < xs.size(); ++j) v += m.coefficients[j] * xs[j];
    out.push_back(v);
  }
  return out;
}

EnsembleModel fit(std::span<const RankeeRecord> history, const RankingSystemSpec& spec,
                  const FitConfig& config) {
  if (config.members < 2) throw Error(ErrorCode::validation, "ensemble size must be >= 2");
  if (!(config.ridge_lambda >= 0.0) || !std::isfinite(config.ridge_lambda)) {
    throw Error(ErrorCode::validation, "ridge lambda must be finite and >= 0");
  }

  std::vector<TrainingRows> rows;
  rows.reserve(spec.indicators.size());
  for (const auto& ind : spec.indicators) {
    rows.push_back(collect_rows(history, ind));
    if (distinct_rows(rows.back()) < 2) {
      throw Error(ErrorCode::training,
                  "indicator '" + ind.id + "' has fewer than 2 distinct training rows", ind.id);
    }
  }

  std::vector<IndicatorEnsemble> ensembles(spec.indicators.size());
  for (std::size_t i = 0; i < spec.indicators.size(); ++i) {
    ensembles[i].indicator_id = spec.indicators[i].id;
    ensembles[i].attribute_group = spec.indicators[i].attribute_group;
    ensembles[i].members.reserve(config.members);
  }

  const std::size_t n = history.size();
  std::vector<std::size_t> resample(n);
  std::vector<std::size_t> usable_sample;
  for (std::size_t m = 0; m < config.members; ++m) {
    Rng rng(derive_seed(config.seed, m));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& idx : resample) idx = pick(rng);

    for (std::size_t i = 0; i < spec.indicators.size(); ++i) {
      const auto& r = rows[i];
      usable_sample.clear();
      for (auto idx : resample) {
        if (r.usable[idx]) usable_sample.push_back(idx);
      }
      if (usable_sample.empty()) {
        for (std::size_t idx = 0; idx < n; ++idx) {
          if (r.usable[idx]) usable_sample.push_back(idx);
        }
      }
      ensembles[i].members.push_back(solve_ridge(r, usable_sample,
                                                 spec.indicators[i].attribute_group.size(),
                                                 config.ridge_lambda));
    }
  }

  TrainingMetadata meta;
  std::set<int> years;
  for (const auto& rec : history) years.insert(rec.year);
  meta.years.assign(years.begin(), years.end());
  meta.rows = n;
  meta.ridge_lambda = config.ridge_lambda;
  meta.seed = config.seed;
  return EnsembleModel(spec, std::move(ensembles), std::move(meta));
}

EnsemblePrediction predict_indicator(const Predictor& model, std::string_view indicator_id,
                                     const ValueMap& attributes) {
  auto members = model.predict_members(indicator_id, attributes);
  const auto& spec = model.spec();
  for (auto& v : members) v = spec.clamp_score(v);
  return EnsemblePrediction(std::string(indicator_id), std::move(members));
}

double predict_indicator_mean_unclamped(const Predictor& model, std::string_view indicator_id,
                                        const ValueMap& attributes) {
  const auto members = model.predict_members(indicator_id, attributes);
  return std::accumulate(members.begin(), members.end(), 0.0) /
         static_cast<double>(members.size());
}

EnsembleMap predict_all_indicators(
    const Predictor& model, const ValueMap& attributes) {
  EnsembleMap out;
  for (const auto& ind : model.spec().indicators) {
    out.emplace(ind.id, predict_indicator(model, ind.id, attributes));
  }
  return out;
}

EnsemblePrediction predict_final(
    const EnsembleMap& indicator_predictions,
    const RankingSystemSpec& spec) {
  std::vector<const EnsemblePrediction*> ordered;
  ordered.reserve(spec.indicators.size());
  for (const auto& ind : spec.indicators) {
    const auto it = indicator_predictions.find(ind.id);
    if (it == indicator_predictions.end()) {
      throw Error(ErrorCode::schema, "missing prediction for indicator '" + ind.id + "'");
    }
    ordered.push_back(&it->second);
  }
  for (const auto& [id, _] : indicator_predictions) {
    if (!spec.indicator_index(id)) throw Error(ErrorCode::schema, "unknown indicator id '" + id + "'");
  }
  const std::size_t m = ordered.front()->size();
  for (const auto* e : ordered) {
    if (e->size() != m) {
      throw Error(ErrorCode::contract, "indicator ensembles have mismatched member counts");
    }
  }
  std::vector<double> finals(m);
  std::vector<double> column(ordered.size());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < ordered.size(); ++k) column[k] = (*ordered[k])[i];
    finals[i] = aggregate_final_score(column, spec);
  }
  return EnsemblePrediction("final", std::move(finals));
}

RankDistribution predict_rank(
    const EnsemblePrediction& ours,
    const EnsembleMap& rival_finals) {
  for (const auto& [id, rival] : rival_finals) {
    if (rival.size() != ours.size()) {
      throw Error(ErrorCode::contract, "rival '" + id + "' ensemble size differs from ours");
    }
  }
  RankDistribution dist;
  for (std::size_t i = 0; i < ours.size(); ++i) {
    int better = 0;
    for (const auto& [_, rival] : rival_finals) {
      if (rival[i] > ours[i]) ++better;
    }
    ++dist[better + 1];
  }
  return dist;
}

int modal_rank(const RankDistribution& distribution) {
  int best_rank = 1;
  int best_count = -1;
  for (const auto& [rank, count] : distribution) {
    if (count > best_count) {
      best_rank = rank;
      best_count = count;
    }
  }
  return best_rank;
}

RankField::RankField(const EnsembleMap& rival_finals,
                     std::size_t member_count)
    : member_count_(member_count), rival_count_(rival_finals.size()) {
  sorted_columns_.assign(member_count, {});
  for (auto& col : sorted_columns_) col.reserve(rival_finals.size());
  for (const auto& [id, rival] : rival_finals) {
    if (rival.size() != member_count) {
      throw Error(ErrorCode::contract, "rival '" + id + "' ensemble size differs from the field");
    }
    for (std::size_t i = 0; i < member_count; ++i) sorted_columns_[i].push_back(rival[i]);
  }
  for (auto& col : sorted_columns_) std::sort(col.begin(), col.end());
}

RankDistribution RankField::rank_distribution(const EnsemblePrediction& ours) const {
  if (ours.size() != member_count_) {
    throw Error(ErrorCode::contract, "ensemble size differs from the rank field");
  }
  RankDistribution dist;
  for (std::size_t i = 0; i < member_count_; ++i) {
    const auto& col = sorted_columns_[i];
    const auto better = col.end() - std::upper_bound(col.begin(), col.end(), ours[i]);
    ++dist[static_cast<int>(better) + 1];
  }
  return dist;
}

}  // namespace rankforge
