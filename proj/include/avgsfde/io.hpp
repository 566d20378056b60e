#pragma once

// Plain-text formats written by the command-line tool.
//
// Every document starts with the stamp "# avg-sfde v1 <command>".  Tables are
// comma separated with one header row; reports are sectioned key = value text.

#include <algorithm>
#include <charconv>
#include <deque>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "avgsfde/error.hpp"

namespace avgsfde::io {

inline constexpr std::string_view stamp_prefix = "# avg-sfde v1 ";

inline std::string header_line(std::string_view command) { return std::string(stamp_prefix) + std::string(command); }

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(ErrorKind::invalid_argument, "not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// Reads the stamp line and returns the command it names.
inline std::string read_stamp(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::invalid_argument, "empty document");
  const std::string_view l = trim(line);
  if (l.substr(0, stamp_prefix.size()) != stamp_prefix)
    fail(ErrorKind::invalid_argument, "missing header line '" + std::string(stamp_prefix) + "<command>'");
  return std::string(trim(l.substr(stamp_prefix.size())));
}

// ---------------------------------------------------------------------------

struct Table {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    fail(ErrorKind::invalid_argument, "no column '" + std::string(name) + "'");
  }
  double number(std::size_t row, std::string_view name) const { return parse_double(rows.at(row).at(column(name))); }
  std::vector<double> numbers(std::string_view name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(parse_double(r.at(c)));
    return out;
  }
};

class TableWriter {
 public:
  TableWriter(std::ostream& out, std::string_view command, std::vector<std::string> columns)
      : out_(out), width_(columns.size()) {
    out_ << header_line(command) << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  // Cells are either numbers or bare tokens without commas.
  class Row {
   public:
    explicit Row(TableWriter& w) : w_(w) {}
    Row& operator<<(double v) { return cell(format_double(v)); }
    Row& operator<<(int v) { return cell(std::to_string(v)); }
    Row& operator<<(std::size_t v) { return cell(std::to_string(v)); }
    Row& operator<<(std::string_view v) { return cell(std::string(v)); }
    Row& operator<<(const char* v) { return cell(v); }
    ~Row() {
      if (n_ != w_.width_) w_.out_ << "# malformed row";
      w_.out_ << '\n';
    }

   private:
    Row& cell(const std::string& s) {
      w_.out_ << (n_++ ? "," : "") << s;
      return *this;
    }
    TableWriter& w_;
    std::size_t n_ = 0;
  };

  Row row() { return Row(*this); }

 private:
  std::ostream& out_;
  std::size_t width_;
};

inline Table read_table(std::istream& in) {
  Table t;
  t.command = read_stamp(in);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::invalid_argument, "table without column header");
  for (auto c : split(trim(line), ',')) t.columns.emplace_back(trim(c));
  while (std::getline(in, line)) {
    const auto l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    auto cells = split(l, ',');
    if (cells.size() != t.columns.size()) fail(ErrorKind::invalid_argument, "row width does not match header");
    auto& row = t.rows.emplace_back();
    for (auto c : cells) row.emplace_back(trim(c));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Sectioned key = value documents.  Section names may be dotted to express
// nesting ("criterion.4"); keys are unique within a section.

struct Section {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  Section& set(std::string key, std::string value) {
    for (auto& [k, v] : entries)
      if (k == key) {
        v = std::move(value);
        return *this;
      }
    entries.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  Section& set(std::string key, double value) { return set(std::move(key), format_double(value)); }
  Section& set(std::string key, bool value) { return set(std::move(key), std::string(value ? "true" : "false")); }
  Section& set(std::string key, const char* value) { return set(std::move(key), std::string(value)); }
  Section& set(std::string key, std::string_view value) { return set(std::move(key), std::string(value)); }
  Section& set(std::string key, int value) { return set(std::move(key), std::to_string(value)); }
  Section& set(std::string key, std::size_t value) { return set(std::move(key), std::to_string(value)); }

  bool has(std::string_view key) const {
    for (const auto& e : entries)
      if (e.first == key) return true;
    return false;
  }
  const std::string& get(std::string_view key) const {
    for (const auto& e : entries)
      if (e.first == key) return e.second;
    fail(ErrorKind::invalid_argument, "section [" + name + "] has no key '" + std::string(key) + "'");
  }
  double number(std::string_view key) const { return parse_double(get(key)); }
  bool flag(std::string_view key) const {
    const auto& v = get(key);
    if (v == "true") return true;
    if (v == "false") return false;
    fail(ErrorKind::invalid_argument, "not a boolean: '" + v + "'");
  }
};

struct Document {
  std::string command;
  std::deque<Section> sections;  // stable references

  Section& section(std::string_view name) {
    for (auto& s : sections)
      if (s.name == name) return s;
    return sections.emplace_back(Section{std::string(name), {}});
  }
  const Section& at(std::string_view name) const {
    for (const auto& s : sections)
      if (s.name == name) return s;
    fail(ErrorKind::invalid_argument, "no section [" + std::string(name) + "]");
  }
  bool has(std::string_view name) const {
    for (const auto& s : sections)
      if (s.name == name) return true;
    return false;
  }
};

inline void write_document(std::ostream& out, const Document& doc) {
  out << header_line(doc.command) << '\n';
  for (const auto& s : doc.sections) {
    out << '\n' << '[' << s.name << "]\n";
    for (const auto& [k, v] : s.entries) out << k << " = " << v << '\n';
  }
}

inline Document read_document(std::istream& in) {
  Document doc;
  doc.command = read_stamp(in);
  Section* cur = nullptr;
  std::string line;
  while (std::getline(in, line)) {
    const auto l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    if (l.front() == '[') {
      if (l.back() != ']') fail(ErrorKind::invalid_argument, "bad section line '" + std::string(l) + "'");
      cur = &doc.section(trim(l.substr(1, l.size() - 2)));
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string_view::npos || !cur) fail(ErrorKind::invalid_argument, "bad line '" + std::string(l) + "'");
    cur->set(std::string(trim(l.substr(0, eq))), std::string(trim(l.substr(eq + 1))));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Grids: "x" (single value), "lo:hi:step", "lo:hi:logN" or "lo:hi:linN".

inline std::vector<double> parse_grid(std::string_view spec) {
  const auto parts = split(trim(spec), ':');
  if (parts.size() == 1) return {parse_double(parts[0])};
  if (parts.size() != 3) fail(ErrorKind::invalid_argument, "grid must be 'lo:hi:step', 'lo:hi:logN' or 'lo:hi:linN'");
  const double lo = parse_double(parts[0]), hi = parse_double(parts[1]);
  if (!(hi >= lo)) fail(ErrorKind::invalid_argument, "grid needs lo <= hi");
  const std::string_view last = trim(parts[2]);
  std::vector<double> out;
  auto count = [&](std::string_view s) {
    const double n = parse_double(s);
    if (!(n >= 2.0) || n != std::floor(n) || n > 1e7) fail(ErrorKind::invalid_argument, "grid point count must be an integer >= 2");
    return static_cast<std::size_t>(n);
  };
  if (last.substr(0, 3) == "log") {
    if (!(lo > 0.0)) fail(ErrorKind::invalid_argument, "log grid needs lo > 0");
    const std::size_t n = count(last.substr(3));
    for (std::size_t i = 0; i < n; ++i) out.push_back(i + 1 == n ? hi : lo * std::pow(hi / lo, double(i) / double(n - 1)));
    return out;
  }
  if (last.substr(0, 3) == "lin") {
    const std::size_t n = count(last.substr(3));
    for (std::size_t i = 0; i < n; ++i) out.push_back(i + 1 == n ? hi : lo + (hi - lo) * double(i) / double(n - 1));
    return out;
  }
  const double step = parse_double(last);
  if (!(step > 0.0)) fail(ErrorKind::invalid_argument, "grid step must be positive");
  const double span = (hi - lo) / step;
  const auto n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  if (n > 10000000) fail(ErrorKind::invalid_argument, "grid too large");
  // Plain decimal specs get points rounded to the decimals written, so that
  // -2:2:0.1 yields 0.3 rather than 0.30000000000000027.
  auto decimals = [](std::string_view v) {
    v = trim(v);
    if (v.find_first_of("eEnN") != std::string_view::npos) return -1;
    const auto dot = v.find('.');
    return dot == std::string_view::npos ? 0 : static_cast<int>(v.size() - dot - 1);
  };
  const int d = std::max({decimals(parts[0]), decimals(parts[1]), decimals(last)});
  const bool snap = decimals(parts[0]) >= 0 && decimals(parts[1]) >= 0 && decimals(last) >= 0 && d <= 12;
  const double unit = std::pow(10.0, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = lo + step * double(i);
    out.push_back(snap ? std::round(v * unit) / unit + 0.0 : v);
  }
  return out;
}

}  // namespace avgsfde::io
