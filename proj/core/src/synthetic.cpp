#include "rankforge/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "rankforge/error.hpp"
#include "rankforge/random.hpp"

namespace rankforge {

RankingSystemSpec default_spec() {
  RankingSystemSpec spec;
  spec.attributes = {
      {"academic_survey", "Academic survey responses", "responses", 0.0, 5000.0},
      {"employer_survey", "Employer survey responses", "responses", 0.0, 3000.0},
      {"students", "Students", "FTE", 1000.0, 60000.0},
      {"faculty", "Faculty staff", "FTE", 100.0, 6000.0},
      {"citations", "Citations (5 years)", "citations", 0.0, 200000.0},
      {"intl_faculty", "International faculty", "FTE", 0.0, 3000.0},
      {"intl_students", "International students", "FTE", 0.0, 20000.0},
  };
  spec.indicators = {
      {"AR", "Academic Reputation", 0.40, {"academic_survey"}},
      {"ER", "Employer Reputation", 0.10, {"employer_survey"}},
      {"SFRI", "Student Faculty Ratio", 0.20, {"students", "faculty"}},
      {"CPF", "Citations per Faculty", 0.20, {"citations", "faculty"}},
      {"IFRI", "International Faculty Ratio", 0.05, {"intl_faculty", "faculty"}},
      {"ISRI", "International Student Ratio", 0.05, {"intl_students", "students"}},
  };
  spec.score_min = 1.0;
  spec.score_max = 100.0;
  return spec;
}

SyntheticConfig SyntheticConfig::with_random_forms(RankingSystemSpec spec, std::size_t n_rankees,
                                                   std::size_t n_years, std::uint64_t seed,
                                                   double noise_sigma) {
  spec.validate();
  SyntheticConfig config;
  config.n_rankees = n_rankees;
  config.n_years = n_years;
  config.seed = seed;

  Rng rng(derive_seed(seed, 0xF0F0));
  std::uniform_real_distribution<double> scale(0.6, 1.4);
  std::bernoulli_distribution negative(0.25);
  const double half_span = 0.4 * (spec.score_max - spec.score_min);
  const double mid_score = 0.5 * (spec.score_max + spec.score_min);
  for (const auto& ind : spec.indicators) {
    GeneratingForm form{ind.id, mid_score, {}, noise_sigma};
    const auto k = static_cast<double>(ind.attribute_group.size());
    for (const auto& attr_id : ind.attribute_group) {
      const auto& attr = spec.attribute(attr_id);
      const double width = attr.domain_max - attr.domain_min;
      double coef = 2.0 * half_span / (k * width) * scale(rng);
      if (negative(rng)) coef = -coef;
      form.coefficients.push_back(coef);
      form.intercept -= coef * 0.5 * (attr.domain_min + attr.domain_max);
    }
    config.forms.push_back(std::move(form));
  }
  config.spec = std::move(spec);
  return config;
}

void SyntheticConfig::validate() const {
  spec.validate();
  if (n_rankees < 1 || n_years < 1) {
    throw Error(ErrorCode::validation, "synthetic data needs at least one rankee and one year");
  }
  if (forms.size() != spec.indicators.size()) {
    throw Error(ErrorCode::validation, "need one generating form per indicator", "forms");
  }
  for (std::size_t i = 0; i < forms.size(); ++i) {
    const auto where = "forms[" + std::to_string(i) + "]";
    if (forms[i].indicator_id != spec.indicators[i].id) {
      throw Error(ErrorCode::validation, "form order must follow spec indicators", where);
    }
    if (forms[i].coefficients.size() != spec.indicators[i].attribute_group.size()) {
      throw Error(ErrorCode::validation, "coefficient count must match the attribute group", where);
    }
    if (!(forms[i].noise_sigma >= 0.0)) throw Error(ErrorCode::validation, "noise sigma must be >= 0", where);
  }
  if (!(drift_fraction >= 0.0)) throw Error(ErrorCode::validation, "drift fraction must be >= 0");
}

double evaluate_form(const GeneratingForm& form, const IndicatorSpec& indicator,
                     const ValueMap& attributes) {
  double v = form.intercept;
  for (std::size_t j = 0; j < indicator.attribute_group.size(); ++j) {
    const auto it = attributes.find(indicator.attribute_group[j]);
    if (it == attributes.end()) {
      throw Error(ErrorCode::schema, "missing attribute '" + indicator.attribute_group[j] + "'");
    }
    v += form.coefficients[j] * it->second;
  }
  return v;
}

HistoryTable generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const auto& spec = config.spec;
  Rng rng(derive_seed(config.seed, 1));
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  const int width = static_cast<int>(std::to_string(config.n_rankees).size());
  std::vector<std::vector<RankeeRecord>> by_year(config.n_years);
  for (std::size_t r = 0; r < config.n_rankees; ++r) {
    char id[32];
    std::snprintf(id, sizeof id, "R%0*zu", std::max(width, 3), r + 1);

    ValueMap attrs;
    for (const auto& a : spec.attributes) {
      const double w = a.domain_max - a.domain_min;
      std::uniform_real_distribution<double> start(a.domain_min + 0.2 * w, a.domain_max - 0.2 * w);
      attrs.emplace(a.id, start(rng));
    }
    for (std::size_t y = 0; y < config.n_years; ++y) {
      if (y > 0) {
        for (const auto& a : spec.attributes) {
          const double w = a.domain_max - a.domain_min;
          auto& v = attrs[a.id];
          v = std::clamp(v + config.drift_fraction * w * unit_normal(rng), a.domain_min, a.domain_max);
        }
      }
      RankeeRecord rec;
      rec.rankee_id = id;
      rec.year = config.first_year + static_cast<int>(y);
      rec.attribute_values = attrs;
      for (std::size_t i = 0; i < spec.indicators.size(); ++i) {
        const auto& form = config.forms[i];
        double score = evaluate_form(form, spec.indicators[i], attrs);
        if (form.noise_sigma > 0.0) score += form.noise_sigma * unit_normal(rng);
        rec.indicator_scores.emplace(spec.indicators[i].id, spec.clamp_score(score));
      }
      rec.final_score = aggregate_final_score(rec.indicator_scores, spec);
      by_year[y].push_back(std::move(rec));
    }
  }

  HistoryTable table;
  for (auto& year_rows : by_year) {
    std::vector<double> finals;
    finals.reserve(year_rows.size());
    for (const auto& rec : year_rows) finals.push_back(rec.final_score);
    const auto ranks = competition_ranks(finals);
    for (std::size_t i = 0; i < year_rows.size(); ++i) year_rows[i].rank = ranks[i];
  }
  // Row order: rankee-major, ascending year.
  for (std::size_t r = 0; r < config.n_rankees; ++r) {
    for (std::size_t y = 0; y < config.n_years; ++y) table.rows.push_back(std::move(by_year[y][r]));
  }
  table.provenance = {"synthetic(seed=" + std::to_string(config.seed) + ")", {}, table.rows.size()};
  return table;
}

}  // namespace rankforge
