#pragma once

// The embedded toy world: small tables the simulated tools read from, and
// the row-filter condition language shared by FilterDB and GetValue.

#include <algorithm>
#include <charconv>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace tooldrift {

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column_index(std::string_view column) const {
    auto it = std::find(columns.begin(), columns.end(), column);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
  }
};

struct World {
  std::string version;
  std::map<std::string, Table> tables;

  const Table* find(std::string_view name) const {
    auto it = tables.find(std::string(name));
    return it == tables.end() ? nullptr : &it->second;
  }
};

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

enum class CompareOp { eq, ne, lt, le, gt, ge };

struct Condition {
  std::string column;
  CompareOp op = CompareOp::eq;
  std::string value;
};

/// Parses one "Column<op>Value" term, e.g. "Date<=2004-01-16".
inline std::optional<Condition> parse_condition(std::string_view term) {
  auto at = term.find_first_of("<>!=");
  if (at == std::string_view::npos || at == 0) return std::nullopt;
  Condition c;
  c.column = std::string(trim(term.substr(0, at)));
  std::size_t len = 1;
  char first = term[at];
  bool two = at + 1 < term.size() && term[at + 1] == '=';
  switch (first) {
    case '=': c.op = CompareOp::eq; break;
    case '!':
      if (!two) return std::nullopt;
      c.op = CompareOp::ne;
      break;
    case '<': c.op = two ? CompareOp::le : CompareOp::lt; break;
    case '>': c.op = two ? CompareOp::ge : CompareOp::gt; break;
    default: return std::nullopt;
  }
  if (two) len = 2;
  c.value = std::string(trim(term.substr(at + len)));
  if (c.column.empty() || c.value.empty()) return std::nullopt;
  return c;
}

/// Splits a comma-separated condition string ("A=1, B<=2") into terms.
inline std::vector<std::string> split_condition_terms(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto piece = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool compare_cell(std::string_view cell, CompareOp op, std::string_view value) {
  int cmp = 0;
  auto a = parse_number(cell);
  auto b = parse_number(value);
  if (a && b) {
    cmp = *a < *b ? -1 : (*a > *b ? 1 : 0);
  } else {
    int r = cell.compare(value);
    cmp = r < 0 ? -1 : (r > 0 ? 1 : 0);
  }
  switch (op) {
    case CompareOp::eq: return cmp == 0;
    case CompareOp::ne: return cmp != 0;
    case CompareOp::lt: return cmp < 0;
    case CompareOp::le: return cmp <= 0;
    case CompareOp::gt: return cmp > 0;
    case CompareOp::ge: return cmp >= 0;
  }
  return false;
}

/// Row indices matching every condition, or nullopt when a condition names
/// an unknown column.
inline std::optional<std::vector<std::size_t>> filter_rows(const Table& table,
                                                          const std::vector<Condition>& conditions) {
  std::vector<std::size_t> cols;
  for (const auto& c : conditions) {
    auto idx = table.column_index(c.column);
    if (!idx) return std::nullopt;
    cols.push_back(*idx);
  }
  std::vector<std::size_t> hits;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    bool ok = true;
    for (std::size_t i = 0; i < conditions.size() && ok; ++i) {
      ok = compare_cell(table.rows[r][cols[i]], conditions[i].op, conditions[i].value);
    }
    if (ok) hits.push_back(r);
  }
  return hits;
}

inline std::shared_ptr<const World> builtin_world() {
  static const std::shared_ptr<const World> world = [] {
    auto w = std::make_shared<World>();
    w->version = "builtin-v1";
    w->tables["coffee"] = Table{
        "coffee",
        {"Date", "Open", "High", "Low", "Close", "Volume", "Currency"},
        {
            {"2012-03-01", "196.7", "199.45", "194.7", "198.25", "14390", "USD"},
            {"2012-03-02", "198", "198.9", "193.25", "194.3", "12410", "USD"},
            {"2012-03-05", "193.5", "195.1", "190.55", "191.05", "13020", "USD"},
            {"2012-03-06", "190.8", "191.4", "185.7", "186.2", "15880", "USD"},
            {"2012-03-07", "186.4", "190.65", "186", "189.8", "11240", "USD"},
            {"2012-03-08", "189.7", "191.35", "187.9", "189.35", "10935", "USD"},
            {"2012-03-09", "189.4", "192.6", "188.15", "191.95", "9870", "USD"},
            {"2012-03-12", "192", "193", "186.85", "187.35", "12660", "USD"},
            {"2012-03-13", "187.5", "189.5", "184.9", "188.75", "13510", "USD"},
            {"2012-03-14", "188.65", "189.2", "182.05", "183.1", "16210", "USD"},
        }};
    w->tables["flights"] = Table{
        "flights",
        {"FlightDate", "Airline", "Origin", "Dest", "CRSDepTime", "DepTime", "DepDelay", "Distance"},
        {
            {"2022-01-03", "Delta", "ATL", "LAX", "1245", "1240", "-5", "1946"},
            {"2022-01-03", "Delta", "ATL", "JFK", "0830", "0852", "22", "760"},
            {"2022-01-03", "United", "ORD", "SFO", "0715", "0715", "0", "1846"},
            {"2022-01-03", "United", "ATL", "ORD", "1410", "1455", "45", "606"},
            {"2022-01-04", "Delta", "ATL", "LAX", "1245", "1301", "16", "1946"},
            {"2022-01-04", "American", "DFW", "MIA", "0955", "0950", "-5", "1121"},
            {"2022-01-04", "American", "JFK", "LAX", "1800", "1837", "37", "2475"},
            {"2022-01-05", "United", "SFO", "ORD", "0600", "0612", "12", "1846"},
            {"2022-01-05", "Delta", "JFK", "ATL", "1120", "1118", "-2", "760"},
        }};
    w->tables["agenda"] = Table{
        "agenda",
        {"Event", "Person", "Date", "StartTime", "EndTime", "Location"},
        {
            {"Yoga Class", "Dennis", "2022-05-03", "09:00", "10:00", "Community Center"},
            {"Dentist Appointment", "Dennis", "2022-05-03", "14:00", "15:00", "Smile Dental"},
            {"Team Meeting", "Amy", "2022-05-03", "10:30", "11:30", "Office 12B"},
            {"Book Club", "Amy", "2022-05-03", "19:00", "20:30", "City Library"},
            {"Piano Lesson", "Amy", "2022-05-04", "16:00", "17:00", "Music Hall"},
            {"Yoga Class", "Dennis", "2022-05-05", "09:00", "10:00", "Community Center"},
            {"Farmers Market", "Chao Zhang", "2022-05-05", "08:00", "11:00", "Central Square"},
            {"Lunch with Mentor", "Chao Zhang", "2022-05-06", "12:00", "13:00", "Blue Cafe"},
            {"Soccer Practice", "Dennis", "2022-05-07", "17:30", "19:00", "Riverside Park"},
            {"Birthday Party", "Amy", "2022-05-07", "18:00", "22:00", "Community Center"},
            {"Project Review", "Chao Zhang", "2022-05-09", "15:00", "16:00", "Office 12B"},
        }};
    return std::shared_ptr<const World>(std::move(w));
  }();
  return world;
}

}  // namespace tooldrift
