#include "rankforge/history.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rankforge/error.hpp"
#include "rankforge/text.hpp"

namespace rankforge {

std::vector<RankeeRecord> HistoryTable::rankee_history(std::string_view rankee_id) const {
  std::vector<RankeeRecord> out;
  for (const auto& r : rows) {
    if (r.rankee_id == rankee_id) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.year < b.year; });
  return out;
}

const RankeeRecord* HistoryTable::find(std::string_view rankee_id, int year) const noexcept {
  for (const auto& r : rows) {
    if (r.rankee_id == rankee_id && r.year == year) return &r;
  }
  return nullptr;
}

const RankeeRecord* HistoryTable::latest(std::string_view rankee_id,
                                         std::optional<int> year) const noexcept {
  const RankeeRecord* best = nullptr;
  for (const auto& r : rows) {
    if (r.rankee_id != rankee_id || (year && r.year > *year)) continue;
    if (best == nullptr || r.year > best->year) best = &r;
  }
  return best;
}

std::vector<std::string> HistoryTable::rankee_ids() const {
  std::vector<std::string> ids;
  std::set<std::string, std::less<>> seen;
  for (const auto& r : rows) {
    if (seen.insert(r.rankee_id).second) ids.push_back(r.rankee_id);
  }
  return ids;
}

std::vector<std::string> history_columns(const RankingSystemSpec& spec) {
  std::vector<std::string> cols{"rankee_id", "year"};
  for (const auto& a : spec.attributes) cols.push_back("attr_" + a.id);
  for (const auto& i : spec.indicators) cols.push_back("ind_" + i.id);
  cols.emplace_back("final_score");
  cols.emplace_back("rank");
  return cols;
}

namespace {

// RFC 4180 subset: quoted fields with doubled quotes, no embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw Error(ErrorCode::parse, "unterminated quoted field", "line " + std::to_string(line_no));
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string where(std::size_t line_no, std::string_view column) {
  return "line " + std::to_string(line_no) + ", column " + std::string(column);
}

void check_score(double value, const RankingSystemSpec& spec, const std::string& location) {
  if (!std::isfinite(value) || !spec.score_in_bounds(value)) {
    throw Error(ErrorCode::bounds,
                "score " + format_double(value) + " outside [" + format_double(spec.score_min) +
                    ", " + format_double(spec.score_max) + "]",
                location);
  }
}

std::vector<std::string> find_gaps(std::span<const RankeeRecord> rows) {
  std::map<std::string, std::set<int>, std::less<>> years;
  for (const auto& r : rows) years[r.rankee_id].insert(r.year);
  std::vector<std::string> gaps;
  for (const auto& [id, ys] : years) {
    int prev = *ys.begin();
    for (int y : ys) {
      for (int missing = prev + 1; missing < y; ++missing) {
        gaps.push_back(id + ": missing year " + std::to_string(missing));
      }
      prev = y;
    }
  }
  return gaps;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void validate_records(std::span<const RankeeRecord> rows, const RankingSystemSpec& spec) {
  std::set<std::pair<std::string, int>> keys;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto loc = "record " + std::to_string(i) + " (" + r.rankee_id + "/" + std::to_string(r.year) + ")";
    if (r.rankee_id.empty()) throw Error(ErrorCode::schema, "empty rankee_id", loc);
    if (!keys.emplace(r.rankee_id, r.year).second) {
      throw Error(ErrorCode::validation, "duplicate (rankee_id, year)", loc);
    }
    for (const auto& [id, v] : r.attribute_values) {
      if (!spec.attribute_index(id)) throw Error(ErrorCode::schema, "undeclared attribute '" + id + "'", loc);
      if (!std::isfinite(v)) throw Error(ErrorCode::validation, "attribute '" + id + "' is not finite", loc);
    }
    for (const auto& [id, v] : r.indicator_scores) {
      if (!spec.indicator_index(id)) throw Error(ErrorCode::schema, "undeclared indicator '" + id + "'", loc);
      check_score(v, spec, loc + ", ind_" + id);
    }
    check_score(r.final_score, spec, loc + ", final_score");
    if (r.rank < 1) throw Error(ErrorCode::validation, "rank must be a positive integer", loc);
  }
}

HistoryTable parse_history(std::string_view csv_text, const RankingSystemSpec& spec,
                           std::string source) {
  const auto columns = history_columns(spec);
  HistoryTable table;
  std::set<std::pair<std::string, int>> keys;

  std::size_t line_no = 0;
  bool header_seen = false;
  for (auto raw : split(csv_text, '\n')) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (raw.empty()) continue;
    auto fields = split_csv_line(raw, line_no);

    if (!header_seen) {
      if (line_no == 1 && !fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) {
        fields[0].erase(0, 3);
      }
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c >= fields.size()) {
          throw Error(ErrorCode::schema, "header is missing column '" + columns[c] + "'",
                      where(line_no, columns[c]));
        }
        if (fields[c] != columns[c]) {
          throw Error(ErrorCode::schema,
                      "expected column '" + columns[c] + "', found '" + fields[c] + "'",
                      where(line_no, std::to_string(c + 1)));
        }
      }
      if (fields.size() != columns.size()) {
        throw Error(ErrorCode::schema, "unexpected extra column '" + fields[columns.size()] + "'",
                    where(line_no, std::to_string(columns.size() + 1)));
      }
      header_seen = true;
      continue;
    }

    if (fields.size() != columns.size()) {
      throw Error(ErrorCode::schema,
                  "expected " + std::to_string(columns.size()) + " fields, found " +
                      std::to_string(fields.size()),
                  "line " + std::to_string(line_no));
    }
    RankeeRecord rec;
    std::size_t c = 0;
    auto number = [&](std::size_t col) {
      try {
        return parse_double(fields[col], columns[col]);
      } catch (const Error& e) {
        throw Error(ErrorCode::schema, e.what(), where(line_no, columns[col]));
      }
    };
    auto integer = [&](std::size_t col) {
      try {
        return parse_integer(fields[col], columns[col]);
      } catch (const Error& e) {
        throw Error(ErrorCode::schema, e.what(), where(line_no, columns[col]));
      }
    };
    rec.rankee_id = fields[c];
    if (rec.rankee_id.empty()) throw Error(ErrorCode::schema, "empty rankee_id", where(line_no, columns[c]));
    ++c;
    rec.year = static_cast<int>(integer(c++));
    for (const auto& a : spec.attributes) {
      const double v = number(c);
      if (!std::isfinite(v)) throw Error(ErrorCode::schema, "attribute is not finite", where(line_no, columns[c]));
      rec.attribute_values.emplace(a.id, v);
      ++c;
    }
    for (const auto& ind : spec.indicators) {
      const double v = number(c);
      check_score(v, spec, where(line_no, columns[c]));
      rec.indicator_scores.emplace(ind.id, v);
      ++c;
    }
    rec.final_score = number(c);
    check_score(rec.final_score, spec, where(line_no, columns[c]));
    ++c;
    const auto rank = integer(c);
    if (rank < 1) throw Error(ErrorCode::validation, "rank must be a positive integer", where(line_no, columns[c]));
    rec.rank = static_cast<int>(rank);

    if (!keys.emplace(rec.rankee_id, rec.year).second) {
      throw Error(ErrorCode::validation,
                  "duplicate (rankee_id, year) = (" + rec.rankee_id + ", " + std::to_string(rec.year) + ")",
                  "line " + std::to_string(line_no));
    }
    table.rows.push_back(std::move(rec));
  }
  if (!header_seen) throw Error(ErrorCode::schema, "history file has no header", "line 1");

  table.gaps = find_gaps(table.rows);
  table.provenance = {std::move(source), utc_now(), table.rows.size()};
  return table;
}

HistoryTable load_history(const std::filesystem::path& path, const RankingSystemSpec& spec) {
  return parse_history(read_file(path), spec, path.string());
}

std::string write_history(std::span<const RankeeRecord> rows, const RankingSystemSpec& spec) {
  std::string out;
  const auto columns = history_columns(spec);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out.push_back(',');
    out += columns[c];
  }
  out.push_back('\n');
  for (const auto& r : rows) {
    out += csv_escape(r.rankee_id);
    out += ',' + std::to_string(r.year);
    for (const auto& a : spec.attributes) {
      const auto it = r.attribute_values.find(a.id);
      if (it == r.attribute_values.end()) {
        throw Error(ErrorCode::schema, "record lacks attribute '" + a.id + "'", r.rankee_id);
      }
      out += ',' + format_double(it->second);
    }
    for (const auto& ind : spec.indicators) {
      const auto it = r.indicator_scores.find(ind.id);
      if (it == r.indicator_scores.end()) {
        throw Error(ErrorCode::schema, "record lacks indicator '" + ind.id + "'", r.rankee_id);
      }
      out += ',' + format_double(it->second);
    }
    out += ',' + format_double(r.final_score);
    out += ',' + std::to_string(r.rank);
    out.push_back('\n');
  }
  return out;
}

void save_history(const std::filesystem::path& path, std::span<const RankeeRecord> rows,
                  const RankingSystemSpec& spec) {
  write_file(path, write_history(rows, spec));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::io, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io, "cannot rename onto '" + path.string() + "': " + ec.message());
}

}  // namespace rankforge
