#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankforge/history.hpp"
#include "rankforge/serialize.hpp"
#include "rankforge/service.hpp"
#include "rankforge/session.hpp"
#include "rankforge/synthetic.hpp"
#include "rankforge/text.hpp"

namespace {

using namespace rankforge;

RankingSystemSpec load_spec(const std::string& path) {
  if (path.empty()) return default_spec();
  auto spec = spec_from_json(parse_json(read_file(path)));
  spec.validate();
  return spec;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

// attr=min:max:step, attr=v1,v2,... or attr=v
AttributeRange parse_range(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::parse, "expected attr=min:max:step or attr=v1,v2,...", "--range " + text);
  }
  const auto id = text.substr(0, eq);
  const std::string_view rest = std::string_view(text).substr(eq + 1);
  const auto colon = split(rest, ':');
  if (colon.size() == 3) {
    return AttributeRange::stepped(id, parse_double(colon[0], id), parse_double(colon[1], id),
                                   parse_double(colon[2], id));
  }
  AttributeRange r{id, {}};
  for (auto v : split(rest, ',')) r.values.push_back(parse_double(trim(v), id));
  return r;
}

std::string summary_csv(const HistogramSummary& s) {
  std::string out = "bin_lo,bin_hi,frequency\n";
  for (std::size_t i = 0; i < s.frequencies.size(); ++i) {
    out += format_double(s.bin_edges[i]) + "," + format_double(s.bin_edges[i + 1]) + "," +
           std::to_string(s.frequencies[i]) + "\n";
  }
  return out;
}

std::vector<Scenario> ordered(const Session& session, const std::vector<std::string>& filters,
                              const std::string& sort, const std::string& dir) {
  ScenarioFilter extra;
  for (const auto& f : filters) {
    for (auto& p : ScenarioFilter::parse(f).predicates) extra.predicates.push_back(std::move(p));
  }
  std::optional<Subject> key;
  if (!sort.empty()) key = Subject::parse(sort);
  const auto page = session.page(extra, key, parse_sort_direction(dir), 1,
                                 std::max<std::size_t>(1, session.scenario_count()));
  std::vector<Scenario> rows;
  rows.reserve(page.rows.size());
  for (const auto* s : page.rows) rows.push_back(*s);
  return rows;
}

std::string render_scenarios(const Session& session, const std::vector<Scenario>& rows,
                             const std::string& format) {
  if (format == "csv") return scenarios_to_csv(rows, session.spec());
  if (format != "json") throw Error(ErrorCode::validation, "format must be json or csv", "--format");
  return scenarios_to_json(rows, session.baseline(), session.spec()).dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rankforge: what-if scenario analysis for ranking systems"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a history CSV and optionally rewrite it canonically");
  std::string ingest_spec, ingest_in, ingest_out;
  ingest->add_option("history", ingest_in, "History CSV")->required();
  ingest->add_option("--spec", ingest_spec, "Spec JSON (built-in default when omitted)");
  ingest->add_option("-o,--output", ingest_out, "Write the canonical CSV here");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic history table");
  std::uint64_t synth_seed = 42;
  std::size_t synth_rankees = 50, synth_years = 5;
  int synth_first_year = 2016;
  double synth_noise = 2.0;
  std::string synth_spec, synth_out, synth_spec_out;
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--rankees", synth_rankees, "Number of rankees")->check(CLI::PositiveNumber);
  synth->add_option("--years", synth_years, "Number of years")->check(CLI::PositiveNumber);
  synth->add_option("--first-year", synth_first_year, "First year");
  synth->add_option("--noise", synth_noise, "Indicator noise sigma (score points)")->check(CLI::NonNegativeNumber);
  synth->add_option("--spec", synth_spec, "Spec JSON (built-in default when omitted)");
  synth->add_option("-o,--output", synth_out, "Output CSV (stdout when omitted)");
  synth->add_option("--spec-out", synth_spec_out, "Also write the spec JSON here");

  // spec validate
  auto* spec_cmd = app.add_subcommand("spec", "Spec utilities");
  spec_cmd->require_subcommand(1);
  auto* spec_validate = spec_cmd->add_subcommand("validate", "Check a spec JSON file");
  std::string spec_file;
  spec_validate->add_option("file", spec_file, "Spec JSON")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Fit, generate scenarios, filter, sort and export");
  std::string an_spec, an_history, an_baseline, an_out, an_session_out, an_sort, an_dir = "desc",
                                                                                 an_format = "json";
  std::optional<int> an_year;
  std::vector<std::string> an_ranges, an_rivals, an_filters;
  FitConfig an_fit;
  std::size_t an_cap = kDefaultScenarioCap;
  analyze->add_option("--spec", an_spec, "Spec JSON (built-in default when omitted)");
  analyze->add_option("--history", an_history, "History CSV")->required();
  analyze->add_option("--baseline", an_baseline, "Baseline rankee id")->required();
  analyze->add_option("--year", an_year, "Baseline year (latest when omitted)");
  analyze->add_option("--range", an_ranges, "attr=min:max:step or attr=v1,v2,... (repeatable)");
  analyze->add_option("--rival", an_rivals, "Rival rankee id (repeatable)");
  analyze->add_option("--filter", an_filters, "Filter, e.g. \"ind:SFRI mean>0\" (repeatable, logged in order)");
  analyze->add_option("--sort", an_sort, "Sort key: attr:<id>, ind:<id> or final");
  analyze->add_option("--dir", an_dir, "asc or desc")->check(CLI::IsMember({"asc", "desc"}));
  analyze->add_option("--members", an_fit.members, "Ensemble size");
  analyze->add_option("--lambda", an_fit.ridge_lambda, "Ridge penalty");
  analyze->add_option("--seed", an_fit.seed, "Bootstrap seed");
  analyze->add_option("--cap", an_cap, "Maximum scenario count");
  analyze->add_option("--format", an_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  analyze->add_option("-o,--output", an_out, "Scenario export (stdout when omitted)");
  analyze->add_option("--session-out", an_session_out, "Save the session JSON here");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  service::ServeConfig serve_config;
  serve->add_option("--port", serve_config.port, "TCP port (0 picks a free one)");
  serve->add_option("--host", serve_config.host, "Bind address");
  serve->add_option("--data-dir", serve_config.data_dir, "Data directory (RANKFORGE_DATA_DIR overrides)");

  // export
  auto* exp = app.add_subcommand("export", "Export an analysis product from a saved session");
  std::string ex_session, ex_product, ex_format = "json", ex_out, ex_subject = "final", ex_scenarios,
                                       ex_method = "model_based", ex_highlight, ex_sort, ex_dir = "desc";
  std::vector<std::string> ex_filters;
  std::size_t ex_bins = kDefaultHistogramBins;
  int ex_scenario = 0;
  exp->add_option("product", ex_product, "scenarios, summary, influence, heatmap or radar")
      ->required()
      ->check(CLI::IsMember({"scenarios", "summary", "influence", "heatmap", "radar"}));
  exp->add_option("--session", ex_session, "Session JSON")->required();
  exp->add_option("--format", ex_format, "json or csv (csv for scenarios and summary)")
      ->check(CLI::IsMember({"json", "csv"}));
  exp->add_option("-o,--output", ex_out, "Output file (stdout when omitted)");
  exp->add_option("--filter", ex_filters, "Extra filter on top of the session log (scenarios)");
  exp->add_option("--sort", ex_sort, "Sort key (scenarios)");
  exp->add_option("--dir", ex_dir, "asc or desc")->check(CLI::IsMember({"asc", "desc"}));
  exp->add_option("--subject", ex_subject, "Histogram subject (summary)");
  exp->add_option("--bins", ex_bins, "Histogram bins (summary)")->check(CLI::PositiveNumber);
  exp->add_option("--scenarios", ex_scenarios, "Comma-separated scenario ids (influence)");
  exp->add_option("--scenario", ex_scenario, "Scenario id (heatmap, radar)");
  exp->add_option("--method", ex_method, "Rival method (radar)");
  exp->add_option("--highlight", ex_highlight, "Highlighted rival (radar)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto spec = load_spec(ingest_spec);
      const auto table = load_history(ingest_in, spec);
      std::set<int> years;
      for (const auto& r : table.rows) years.insert(r.year);
      std::cerr << "ingested " << table.rows.size() << " rows, " << table.rankee_ids().size()
                << " rankees, " << years.size() << " years, " << table.gaps.size() << " gaps\n";
      if (!ingest_out.empty()) save_history(ingest_out, table.rows, spec);
    } else if (*synth) {
      auto config = SyntheticConfig::with_random_forms(load_spec(synth_spec), synth_rankees, synth_years,
                                                       synth_seed, synth_noise);
      config.first_year = synth_first_year;
      const auto table = generate_synthetic(config);
      emit(synth_out, write_history(table.rows, config.spec));
      if (!synth_spec_out.empty()) write_file(synth_spec_out, spec_to_json(config.spec).dump(2) + "\n");
    } else if (*spec_cmd) {
      const auto spec = load_spec(spec_file);
      std::cout << "ok: " << spec.attributes.size() << " attributes, " << spec.indicators.size()
                << " indicators\n";
    } else if (*analyze) {
      SessionRequest req;
      req.spec = load_spec(an_spec);
      req.history = load_history(an_history, req.spec).rows;
      req.baseline_rankee = an_baseline;
      req.baseline_year = an_year;
      for (const auto& r : an_ranges) req.ranges.push_back(parse_range(r));
      req.rivals = an_rivals;
      req.fit = an_fit;
      req.cap = an_cap;
      req.session_id = "cli";
      auto session = Session::create(std::move(req));
      for (const auto& f : an_filters) session = session.with_filter(ScenarioFilter::parse(f));
      std::cerr << "generated " << session.scenario_count() << " scenarios, "
                << session.current_indices().size() << " after filters\n";
      emit(an_out, render_scenarios(session, ordered(session, {}, an_sort, an_dir), an_format));
      if (!an_session_out.empty()) session.save(an_session_out);
    } else if (*serve) {
      service::Server server(serve_config);
      std::cerr << "listening on " << serve_config.host << ":" << server.port() << "\n";
      server.run();
    } else if (*exp) {
      const auto session = Session::load(ex_session);
      const bool csv = ex_format == "csv";
      if (csv && ex_product != "scenarios" && ex_product != "summary") {
        throw Error(ErrorCode::validation, "csv is available for scenarios and summary only", "--format");
      }
      std::string text;
      if (ex_product == "scenarios") {
        text = render_scenarios(session, ordered(session, ex_filters, ex_sort, ex_dir), ex_format);
      } else if (ex_product == "summary") {
        const auto s = session.summary(Subject::parse(ex_subject), ex_bins);
        text = csv ? summary_csv(s) : summary_to_json(s).dump(2) + "\n";
      } else if (ex_product == "influence") {
        std::vector<int> ids;
        for (auto t : split(ex_scenarios, ',')) {
          if (!trim(t).empty()) ids.push_back(static_cast<int>(parse_integer(trim(t), "--scenarios")));
        }
        if (ids.empty()) throw Error(ErrorCode::validation, "no scenario ids", "--scenarios");
        text = influence_to_json(session.influence(ids)).dump(2) + "\n";
      } else if (ex_product == "heatmap") {
        text = heatmap_to_json(session.heatmap(ex_scenario)).dump(2) + "\n";
      } else {
        std::optional<std::string> highlight;
        if (!ex_highlight.empty()) highlight = ex_highlight;
        text = radar_to_json(session.radar(ex_scenario, parse_rival_method(ex_method), highlight)).dump(2) + "\n";
      }
      emit(ex_out, text);
    }
  } catch (const Error& e) {
    std::cerr << "rankforge: " << e.describe() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "rankforge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
