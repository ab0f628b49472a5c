#ifndef SARW_CSV_HPP_
#define SARW_CSV_HPP_

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sarw/common.hpp"

namespace sarw::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  std::vector<std::size_t> line_numbers;  //!< 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }
};

//! Splits one comma-delimited record. Double quotes group fields and "" escapes a quote.
inline Row split_line(std::string_view line) {
  Row out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline Table read(const std::string& path, const char* module = "dataset") {
  std::ifstream in(path);
  if (!in) throw Error(module, "cannot open file '" + path + "'");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
    if (trim(line).empty()) continue;
    Row r = split_line(line);
    for (auto& f : r) f = std::string(trim(f));
    if (!have_header) {
      t.header = std::move(r);
      have_header = true;
      continue;
    }
    t.rows.push_back(std::move(r));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw Error(module, "file '" + path + "' has no header row");
  return t;
}

//! Strict numeric parse of a whole field; empty or partial parses yield nullopt.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

//! Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

class Writer {
 public:
  explicit Writer(const std::string& path, const char* module = "io") : out_(path), path_(path) {
    if (!out_) throw Error(module, "cannot write '" + path + "'");
    out_.precision(17);
  }

  Writer& header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(names[i]);
    }
    out_ << '\n';
    return *this;
  }

  Writer& field(const char* s) { return field(std::string(s)); }
  Writer& field(const std::string& s) {
    sep();
    out_ << quote(s);
    return *this;
  }
  Writer& field(double v) {
    sep();
    out_ << format_double(v);
    return *this;
  }
  Writer& field(long long v) {
    sep();
    out_ << v;
    return *this;
  }
  Writer& field(int v) { return field(static_cast<long long>(v)); }
  Writer& field(long v) { return field(static_cast<long long>(v)); }
  Writer& field(std::size_t v) { return field(static_cast<long long>(v)); }

  Writer& end_row() {
    out_ << '\n';
    first_ = true;
    return *this;
  }

  ~Writer() { out_.flush(); }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }

  std::ofstream out_;
  std::string path_;
  bool first_ = true;
};

}  // namespace sarw::csv

#endif  // SARW_CSV_HPP_
