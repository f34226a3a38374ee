#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rankforge/history.hpp"
#include "rankforge/influence.hpp"
#include "rankforge/predictor.hpp"
#include "rankforge/rival.hpp"
#include "rankforge/scenario.hpp"

namespace rankforge {

inline constexpr int kSessionVersion = 1;
inline constexpr std::size_t kDefaultPageSize = 100;

/// Everything needed to open an analysis session.
struct SessionRequest {
  RankingSystemSpec spec;
  std::vector<RankeeRecord> history;
  std::string baseline_rankee;
  std::optional<int> baseline_year;  // latest recorded year when empty
  std::vector<AttributeRange> ranges;
  std::vector<std::string> rivals;
  FitConfig fit;
  std::size_t cap = kDefaultScenarioCap;
  std::size_t trend_window = 3;
  double delta_fraction = 0.01;
  std::string session_id;  // generated when empty
};

struct ScenarioPage {
  std::size_t total = 0;  // after the session filters and the request filter
  std::size_t page = 1;
  std::size_t page_size = kDefaultPageSize;
  std::vector<const Scenario*> rows;
};

/// A persisted analysis context: spec, history, fitted model, generated
/// scenario set, filter log and rivals. The scenario set, rank field and rival
/// predictions are immutable snapshots shared between copies, so a Session is
/// cheap to copy; only the filter log and the current subset differ.
class Session {
 public:
  /// Validates the request, fits the model and generates every scenario.
  static Session create(SessionRequest request);

  /// Rebuilds a session from its JSON envelope by regenerating scenarios from
  /// the stored model and ranges and replaying the filter log. Throws
  /// Error(version) for other envelope versions and Error(validation) when the
  /// replay does not reproduce the recorded subset size.
  static Session from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  static Session load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const std::string& id() const noexcept { return id_; }
  const std::string& created_at() const noexcept { return created_at_; }
  const RankingSystemSpec& spec() const noexcept { return spec_; }
  const EnsembleModel& model() const noexcept { return *model_; }
  const RankeeRecord& baseline() const noexcept { return baseline_; }
  const std::vector<AttributeRange>& ranges() const noexcept { return ranges_; }
  const std::vector<std::string>& rivals() const noexcept { return rivals_; }
  const RivalBook& rival_book() const noexcept { return *rival_book_; }

  /// Full generated set, in generation order.
  const std::vector<Scenario>& scenarios() const noexcept { return *scenarios_; }
  std::size_t scenario_count() const noexcept { return scenarios_->size(); }
  /// Positions (into scenarios()) of the subset left by the filter log.
  const std::vector<std::size_t>& current_indices() const noexcept { return current_; }
  std::vector<Scenario> current_scenarios() const;
  const std::vector<ScenarioFilter>& filter_log() const noexcept { return filter_log_; }

  /// Returns a copy with the filter appended (validated against the spec).
  Session with_filter(ScenarioFilter filter) const;
  /// Returns a copy with the last filter removed; Error(validation) if none.
  Session without_last_filter() const;

  const Scenario& scenario(int scenario_id) const;

  /// Current subset, further narrowed by `filter`, optionally sorted, paged
  /// (1-based).
  ScenarioPage page(const ScenarioFilter& filter, const std::optional<Subject>& sort_key,
                    SortDirection direction, std::size_t page, std::size_t page_size) const;
  HistogramSummary summary(const Subject& subject, std::size_t bins) const;
  InfluenceMatrix influence(const std::vector<int>& scenario_ids) const;
  std::vector<WinProbabilityCell> heatmap(int scenario_id) const;
  RadarPayload radar(int scenario_id, RivalMethodId method,
                     const std::optional<std::string>& highlight) const;

 private:
  Session() = default;
  void derive(const std::vector<RankeeRecord>& history);
  void replay();

  std::string id_;
  std::string created_at_;
  RankingSystemSpec spec_;
  std::vector<RankeeRecord> history_;
  RankeeRecord baseline_;
  std::shared_ptr<const EnsembleModel> model_;
  std::vector<AttributeRange> ranges_;
  std::vector<std::string> rivals_;
  std::vector<ScenarioFilter> filter_log_;
  std::size_t cap_ = kDefaultScenarioCap;
  std::size_t trend_window_ = 3;
  double delta_fraction_ = 0.01;

  std::shared_ptr<const std::vector<Scenario>> scenarios_;
  std::shared_ptr<const RivalBook> rival_book_;
  DeltaPolicy delta_policy_;
  std::vector<std::size_t> current_;
};

/// Thread-safe registry of sessions backed by a directory of JSON files.
/// Readers get immutable snapshots; a mutation on a session that is already
/// being mutated is rejected with Error(conflict) rather than queued.
class SessionStore {
 public:
  /// Empty `directory` keeps sessions in memory only.
  explicit SessionStore(std::filesystem::path directory = {});

  std::shared_ptr<const Session> add(Session session);
  /// Throws Error(not_found).
  std::shared_ptr<const Session> get(const std::string& id);

  /// Applies `mutate` to the current snapshot and publishes the result.
  template <typename F>
  std::shared_ptr<const Session> update(const std::string& id, F&& mutate) {
    auto slot = slot_for(id);
    std::unique_lock writer(slot->write_mutex, std::try_to_lock);
    if (!writer.owns_lock()) throw_conflict(id);
    std::shared_ptr<const Session> current;
    {
      std::lock_guard guard(slot->snapshot_mutex);
      current = slot->snapshot;
    }
    auto next = std::make_shared<const Session>(mutate(*current));
    persist(*next);
    std::lock_guard guard(slot->snapshot_mutex);
    slot->snapshot = next;
    return next;
  }

 private:
  struct Slot {
    std::mutex write_mutex;
    std::mutex snapshot_mutex;
    std::shared_ptr<const Session> snapshot;
  };

  std::shared_ptr<Slot> slot_for(const std::string& id);
  void persist(const Session& session) const;
  [[noreturn]] static void throw_conflict(const std::string& id);

  std::filesystem::path directory_;
  std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Slot>, std::less<>> slots_;
};

}  // namespace rankforge
