#pragma once

#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ecall/error.hpp"
#include "ecall/text.hpp"

namespace ecall::csv {

/// RFC 4180 field splitting for a single physical line (no embedded newlines).
inline std::vector<std::string> parse_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw Error(Errc::MalformedInput, "unterminated quote in CSV line");
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += escape(fields[i]);
  }
  return out;
}

/// A header-addressed table. Column lookup by name keeps readers robust to
/// column reordering.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(Errc::MalformedInput, "missing CSV column '" + std::string(name) + "'");
  }
};

inline Table read(std::istream& in, const std::vector<std::string>& required = {}) {
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = parse_line(line);
    if (!have_header) {
      for (auto& f : fields) f = std::string(trim(f));
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error(Errc::MalformedInput, "CSV row has " + std::to_string(fields.size()) +
                                            " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(Errc::MalformedInput, "empty CSV input");
  for (const auto& name : required) (void)t.column(name);
  return t;
}

inline Table read_file(const std::string& path, const std::vector<std::string>& required = {}) {
  std::istringstream in(ecall::read_file(path));
  return read(in, required);
}

inline double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::MalformedInput, "not a number: '" + s + "'");
  }
}

inline std::optional<double> to_optional_double(const std::string& s) {
  if (trim(s).empty()) return std::nullopt;
  return to_double(std::string(trim(s)));
}

}  // namespace ecall::csv
