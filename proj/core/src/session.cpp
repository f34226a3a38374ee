#include "rankforge/session.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <random>

#include "rankforge/error.hpp"
#include "rankforge/serialize.hpp"

namespace rankforge {

namespace {

std::string new_session_id() {
  std::random_device rd;
  const auto hi = static_cast<std::uint64_t>(rd()) << 32 | rd();
  char buf[24];
  std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(hi));
  return buf;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool valid_session_id(std::string_view id) {
  return !id.empty() && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_';
         });
}

std::vector<RankeeRecord> up_to_year(const std::vector<RankeeRecord>& rows, int year) {
  std::vector<RankeeRecord> out;
  for (const auto& r : rows) {
    if (r.year <= year) out.push_back(r);
  }
  return out;
}

}  // namespace

Session Session::create(SessionRequest request) {
  request.spec.validate();
  validate_records(request.history, request.spec);
  if (request.session_id.empty()) request.session_id = new_session_id();
  if (!valid_session_id(request.session_id)) {
    throw Error(ErrorCode::validation, "session id must be 1-64 characters of [A-Za-z0-9_-]", "session_id");
  }

  HistoryTable table{request.history, {}, {}};
  const RankeeRecord* base = request.baseline_year
                                 ? table.find(request.baseline_rankee, *request.baseline_year)
                                 : table.latest(request.baseline_rankee);
  if (base == nullptr) {
    throw Error(ErrorCode::not_found,
                "no history record for baseline rankee '" + request.baseline_rankee + "'" +
                    (request.baseline_year ? " in " + std::to_string(*request.baseline_year) : std::string{}),
                "baseline");
  }
  for (const auto& rival : request.rivals) {
    if (rival == request.baseline_rankee) {
      throw Error(ErrorCode::validation, "baseline rankee cannot be its own rival", "rivals");
    }
    if (table.latest(rival, base->year) == nullptr) {
      throw Error(ErrorCode::not_found, "rival '" + rival + "' has no history up to " +
                                            std::to_string(base->year), "rivals");
    }
  }

  Session s;
  s.id_ = std::move(request.session_id);
  s.created_at_ = utc_now();
  s.spec_ = std::move(request.spec);
  s.baseline_ = *base;
  const auto training = up_to_year(request.history, base->year);
  s.model_ = std::make_shared<const EnsembleModel>(fit(training, s.spec_, request.fit));
  s.ranges_ = std::move(request.ranges);
  s.rivals_ = std::move(request.rivals);
  s.cap_ = request.cap;
  s.trend_window_ = request.trend_window;
  s.delta_fraction_ = request.delta_fraction;
  s.derive(request.history);
  return s;
}

void Session::derive(const std::vector<RankeeRecord>& history) {
  history_ = history;
  const int year = baseline_.year;

  EnsembleMap field;
  for (const auto& r : history_) {
    if (r.year != year || r.rankee_id == baseline_.rankee_id) continue;
    auto preds = predict_all_indicators(*model_, r.attribute_values);
    field.emplace(r.rankee_id, predict_final(preds, spec_));
  }
  const RankField rank_field(field, model_->member_count());
  scenarios_ = std::make_shared<const std::vector<Scenario>>(
      generate_scenarios(ranges_, baseline_, *model_, cap_, &rank_field));

  std::map<std::string, std::vector<RankeeRecord>, std::less<>> rival_histories;
  for (const auto& rival : rivals_) rival_histories[rival] = {};
  for (const auto& r : history_) {
    const auto it = rival_histories.find(r.rankee_id);
    if (it != rival_histories.end() && r.year <= year) it->second.push_back(r);
  }
  auto methods = default_rival_methods(model_->member_count(), model_->metadata().seed);
  for (auto& m : methods) m.trend_window = trend_window_;
  rival_book_ = std::make_shared<const RivalBook>(RivalBook::build(rival_histories, methods, *model_));

  delta_policy_ = DeltaPolicy::from_history(up_to_year(history_, year), spec_, delta_fraction_);
  replay();
}

void Session::replay() {
  const auto& all = *scenarios_;
  current_.resize(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) current_[i] = i;
  for (const auto& f : filter_log_) {
    f.validate(spec_);
    std::vector<std::size_t> kept;
    for (auto i : current_) {
      if (matches(all[i], f, baseline_)) kept.push_back(i);
    }
    current_ = std::move(kept);
  }
}

std::vector<Scenario> Session::current_scenarios() const {
  std::vector<Scenario> out;
  out.reserve(current_.size());
  for (auto i : current_) out.push_back((*scenarios_)[i]);
  return out;
}

Session Session::with_filter(ScenarioFilter filter) const {
  filter.validate(spec_);
  Session next = *this;
  std::vector<std::size_t> kept;
  for (auto i : current_) {
    if (matches((*scenarios_)[i], filter, baseline_)) kept.push_back(i);
  }
  next.current_ = std::move(kept);
  next.filter_log_.push_back(std::move(filter));
  return next;
}

Session Session::without_last_filter() const {
  if (filter_log_.empty()) throw Error(ErrorCode::validation, "filter log is empty", "filters");
  Session next = *this;
  next.filter_log_.pop_back();
  next.replay();
  return next;
}

const Scenario& Session::scenario(int scenario_id) const {
  if (scenario_id < 0 || static_cast<std::size_t>(scenario_id) >= scenarios_->size()) {
    throw Error(ErrorCode::not_found, "no scenario " + std::to_string(scenario_id), "scenario");
  }
  return (*scenarios_)[static_cast<std::size_t>(scenario_id)];
}

ScenarioPage Session::page(const ScenarioFilter& filter, const std::optional<Subject>& sort_key,
                           SortDirection direction, std::size_t page, std::size_t page_size) const {
  if (page < 1) throw Error(ErrorCode::validation, "page is 1-based", "page");
  if (page_size < 1) throw Error(ErrorCode::validation, "page size must be >= 1", "page_size");
  filter.validate(spec_);
  std::vector<const Scenario*> rows;
  for (auto i : current_) {
    if (matches((*scenarios_)[i], filter, baseline_)) rows.push_back(&(*scenarios_)[i]);
  }
  if (sort_key) {
    try {
      check_subject(*sort_key, spec_);
    } catch (const Error& e) {
      throw Error(ErrorCode::validation, e.what(), "sort");
    }
    std::vector<double> keys(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) keys[i] = rankforge::sort_key(*rows[i], *sort_key);
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (direction == SortDirection::ascending) {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
    } else {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] > keys[b]; });
    }
    std::vector<const Scenario*> sorted;
    sorted.reserve(rows.size());
    for (auto i : order) sorted.push_back(rows[i]);
    rows = std::move(sorted);
  }
  ScenarioPage out;
  out.total = rows.size();
  out.page = page;
  out.page_size = page_size;
  const auto begin = std::min(rows.size(), (page - 1) * page_size);
  const auto end = std::min(rows.size(), begin + page_size);
  out.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                  rows.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

HistogramSummary Session::summary(const Subject& subject, std::size_t bins) const {
  try {
    check_subject(subject, spec_);
  } catch (const Error& e) {
    throw Error(ErrorCode::validation, e.what(), "subject");
  }
  return rankforge::summarize(current_scenarios(), subject, baseline_, bins);
}

InfluenceMatrix Session::influence(const std::vector<int>& scenario_ids) const {
  std::vector<Scenario> selection;
  for (int id : scenario_ids) selection.push_back(scenario(id));
  return build_matrix(*model_, selection, delta_policy_);
}

std::vector<WinProbabilityCell> Session::heatmap(int scenario_id) const {
  return rankforge::heatmap(scenario(scenario_id), *rival_book_, spec_);
}

RadarPayload Session::radar(int scenario_id, RivalMethodId method,
                            const std::optional<std::string>& highlight) const {
  return radar_data(scenario(scenario_id), *rival_book_, method, highlight, spec_);
}

nlohmann::json Session::to_json() const {
  Json ranges = Json::array();
  for (const auto& r : ranges_) ranges.push_back(range_to_json(r));
  Json filters = Json::array();
  for (const auto& f : filter_log_) filters.push_back(filter_to_json(f));
  return {{"version", kSessionVersion},
          {"session_id", id_},
          {"created_at", created_at_},
          {"spec", spec_to_json(spec_)},
          {"history_csv", write_history(history_, spec_)},
          {"baseline", {{"rankee_id", baseline_.rankee_id}, {"year", baseline_.year}}},
          {"model", model_to_json(*model_)},
          {"ranges", ranges},
          {"filter_log", filters},
          {"rivals", rivals_},
          {"config", {{"cap", cap_}, {"trend_window", trend_window_}, {"delta_fraction", delta_fraction_}}},
          {"recorded", {{"scenario_count", scenarios_->size()}, {"filtered_count", current_.size()}}}};
}

Session Session::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("version")) {
    throw Error(ErrorCode::schema, "session document has no version", "version");
  }
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kSessionVersion) {
    throw Error(ErrorCode::version,
                "session version " + doc["version"].dump() + " cannot be migrated to version " +
                    std::to_string(kSessionVersion),
                "version");
  }
  try {
    Session s;
    s.id_ = doc.at("session_id").get<std::string>();
    s.created_at_ = doc.value("created_at", std::string{});
    s.spec_ = spec_from_json(doc.at("spec"));
    s.spec_.validate();
    const auto table = parse_history(doc.at("history_csv").get<std::string>(), s.spec_, "session:" + s.id_);
    const auto& b = doc.at("baseline");
    const auto* base = table.find(b.at("rankee_id").get<std::string>(), b.at("year").get<int>());
    if (base == nullptr) throw Error(ErrorCode::not_found, "baseline record missing from history", "baseline");
    s.baseline_ = *base;
    s.model_ = std::make_shared<const EnsembleModel>(model_from_json(doc.at("model"), s.spec_));
    for (const auto& r : doc.at("ranges")) s.ranges_.push_back(range_from_json(r));
    for (const auto& f : doc.at("filter_log")) s.filter_log_.push_back(filter_from_json(f));
    s.rivals_ = doc.at("rivals").get<std::vector<std::string>>();
    if (doc.contains("config")) {
      const auto& c = doc["config"];
      s.cap_ = c.value("cap", kDefaultScenarioCap);
      s.trend_window_ = c.value("trend_window", std::size_t{3});
      s.delta_fraction_ = c.value("delta_fraction", 0.01);
    }
    s.derive(table.rows);
    if (doc.contains("recorded")) {
      const auto& rec = doc["recorded"];
      if (rec.value("scenario_count", s.scenarios_->size()) != s.scenarios_->size() ||
          rec.value("filtered_count", s.current_.size()) != s.current_.size()) {
        throw Error(ErrorCode::validation, "replay does not reproduce the recorded scenario counts",
                    "recorded");
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("session: ") + e.what());
  }
}

Session Session::load(const std::filesystem::path& path) {
  return from_json(parse_json(read_file(path)));
}

void Session::save(const std::filesystem::path& path) const {
  write_file(path, to_json().dump(2) + "\n");
}

SessionStore::SessionStore(std::filesystem::path directory) : directory_(std::move(directory)) {
  if (!directory_.empty()) std::filesystem::create_directories(directory_);
}

std::shared_ptr<const Session> SessionStore::add(Session session) {
  auto snapshot = std::make_shared<const Session>(std::move(session));
  persist(*snapshot);
  auto slot = std::make_shared<Slot>();
  slot->snapshot = snapshot;
  std::lock_guard guard(registry_mutex_);
  if (!slots_.emplace(snapshot->id(), slot).second) {
    throw Error(ErrorCode::conflict, "session '" + snapshot->id() + "' already exists", "session_id");
  }
  return snapshot;
}

std::shared_ptr<const Session> SessionStore::get(const std::string& id) {
  auto slot = slot_for(id);
  std::lock_guard guard(slot->snapshot_mutex);
  return slot->snapshot;
}

std::shared_ptr<SessionStore::Slot> SessionStore::slot_for(const std::string& id) {
  std::lock_guard guard(registry_mutex_);
  if (const auto it = slots_.find(id); it != slots_.end()) return it->second;
  const auto missing = [&] { return Error(ErrorCode::not_found, "unknown session '" + id + "'", "session"); };
  if (directory_.empty() || !valid_session_id(id)) throw missing();
  const auto path = directory_ / (id + ".json");
  if (!std::filesystem::exists(path)) throw missing();
  auto slot = std::make_shared<Slot>();
  slot->snapshot = std::make_shared<const Session>(Session::load(path));
  slots_.emplace(id, slot);
  return slot;
}

void SessionStore::persist(const Session& session) const {
  if (directory_.empty()) return;
  session.save(directory_ / (session.id() + ".json"));
}

void SessionStore::throw_conflict(const std::string& id) {
  throw Error(ErrorCode::conflict, "session '" + id + "' is being modified by another request", "session");
}

}  // namespace rankforge
