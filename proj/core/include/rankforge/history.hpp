#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankforge/model.hpp"

namespace rankforge {

struct Provenance {
  std::string source;
  std::string ingested_at;  // ISO-8601 UTC; empty for generated tables
  std::size_t row_count = 0;
};

/// Validated rankee-year records. (rankee_id, year) is unique; missing years
/// inside a rankee's span are listed in `gaps` rather than rejected.
struct HistoryTable {
  std::vector<RankeeRecord> rows;
  Provenance provenance;
  std::vector<std::string> gaps;

  /// Records of one rankee, ascending by year.
  std::vector<RankeeRecord> rankee_history(std::string_view rankee_id) const;
  const RankeeRecord* find(std::string_view rankee_id, int year) const noexcept;
  /// Latest record of a rankee, optionally at or before `year`.
  const RankeeRecord* latest(std::string_view rankee_id, std::optional<int> year = {}) const noexcept;
  std::vector<std::string> rankee_ids() const;
};

/// Header for the canonical CSV layout:
/// rankee_id,year,attr_<id>...,ind_<id>...,final_score,rank
std::vector<std::string> history_columns(const RankingSystemSpec& spec);

/// Parses and validates history CSV text. All-or-nothing: the first bad row
/// throws Error with a "line N, column X" location and no table is returned.
HistoryTable parse_history(std::string_view csv_text, const RankingSystemSpec& spec,
                           std::string source = "<memory>");

HistoryTable load_history(const std::filesystem::path& path, const RankingSystemSpec& spec);

/// Validates records that did not come from CSV (bounds, ids, uniqueness).
void validate_records(std::span<const RankeeRecord> rows, const RankingSystemSpec& spec);

/// Canonical CSV: spec column order, shortest round-trip number formatting,
/// rows in input order, '\n' line endings.
std::string write_history(std::span<const RankeeRecord> rows, const RankingSystemSpec& spec);

void save_history(const std::filesystem::path& path, std::span<const RankeeRecord> rows,
                  const RankingSystemSpec& spec);

/// Reads a whole file; throws Error(io) when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace rankforge
