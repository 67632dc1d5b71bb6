#pragma once

// Small text helpers shared by every on-disk format: exact number
// formatting, strict number parsing, a CSV reader and a key=value record
// reader. All formats written by this library are plain text so that
// artifacts diff cleanly and stay portable across platforms.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rcgan/error.hpp"

namespace rcgan::text {

// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Whole-field parse; "12abc", "" and " " are rejected.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// FNV-1a, used for config/schema digests embedded in artifacts.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::io, "short write to '" + path + "'");
}

// ---------------------------------------------------------------------------
// CSV

using CsvRow = std::vector<std::string>;

// Splits one CSV line. Double-quoted fields may contain commas and doubled
// quotes; fields are not trimmed.
inline CsvRow split_csv_line(std::string_view line) {
  CsvRow fields;
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
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct RawCsv {
  CsvRow header;
  std::vector<CsvRow> rows;
};

// Blank lines are skipped; a trailing '\r' is dropped.
inline RawCsv parse_csv(std::string_view contents, bool has_header = true) {
  RawCsv raw;
  bool first = true;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (first && has_header) {
      raw.header = split_csv_line(line);
    } else {
      raw.rows.push_back(split_csv_line(line));
    }
    first = false;
  }
  return raw;
}

// ---------------------------------------------------------------------------
// key=value records
//
// One entry per line, the key runs up to the first '=', the value is the rest
// of the line verbatim. Lines starting with '#' and blank lines are ignored.
// Keys may repeat; order is preserved.

class KvWriter {
 public:
  KvWriter& put(std::string_view key, std::string_view value) {
    out_ += key;
    out_ += '=';
    out_ += value;
    out_ += '\n';
    return *this;
  }
  KvWriter& put(std::string_view key, double value) { return put(key, format_double(value)); }
  KvWriter& put(std::string_view key, std::uint64_t value) { return put(key, std::to_string(value)); }
  KvWriter& put(std::string_view key, int value) { return put(key, std::to_string(value)); }
  KvWriter& put(std::string_view key, const char* value) { return put(key, std::string_view(value)); }

  KvWriter& put_doubles(std::string_view key, const double* data, std::size_t n) {
    out_ += key;
    out_ += '=';
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out_ += ' ';
      out_ += format_double(data[i]);
    }
    out_ += '\n';
    return *this;
  }

  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

class KvReader {
 public:
  // `what` names the artifact in error messages.
  KvReader(std::string_view contents, std::string what) : what_(std::move(what)) {
    std::size_t pos = 0;
    std::size_t lineno = 0;
    while (pos < contents.size()) {
      std::size_t end = contents.find('\n', pos);
      const bool terminated = end != std::string_view::npos;
      if (!terminated) end = contents.size();
      std::string_view line = contents.substr(pos, end - pos);
      pos = end + 1;
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      if (!terminated) {
        throw Error(Errc::corrupt_file, what_ + ": line " + std::to_string(lineno) + " is truncated");
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(Errc::corrupt_file, what_ + ": line " + std::to_string(lineno) + " has no '='");
      }
      entries_.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
  }

  bool done() const { return cursor_ >= entries_.size(); }

  const std::string& peek_key() const {
    if (done()) throw Error(Errc::corrupt_file, what_ + ": unexpected end of file");
    return entries_[cursor_].first;
  }

  // Consumes the next entry, which must carry `key`.
  const std::string& next(std::string_view key) {
    if (done()) {
      throw Error(Errc::corrupt_file, what_ + ": unexpected end of file, expected '" + std::string(key) + "'");
    }
    const auto& [k, v] = entries_[cursor_];
    if (k != key) {
      throw Error(Errc::corrupt_file, what_ + ": expected '" + std::string(key) + "', found '" + k + "'");
    }
    ++cursor_;
    return v;
  }

  double next_double(std::string_view key) {
    const auto& v = next(key);
    auto d = parse_double(v);
    if (!d) throw Error(Errc::corrupt_file, what_ + ": '" + std::string(key) + "' is not a number");
    return *d;
  }

  std::uint64_t next_uint(std::string_view key) {
    const auto& v = next(key);
    auto d = parse_uint(v);
    if (!d) throw Error(Errc::corrupt_file, what_ + ": '" + std::string(key) + "' is not a count");
    return *d;
  }

  std::vector<double> next_doubles(std::string_view key, std::size_t expected) {
    const auto& v = next(key);
    std::vector<double> out;
    out.reserve(expected);
    std::string_view rest = v;
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      const auto tok = rest.substr(0, sp);
      auto d = parse_double(tok);
      if (!d) throw Error(Errc::corrupt_file, what_ + ": bad number in '" + std::string(key) + "'");
      out.push_back(*d);
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
    if (out.size() != expected) {
      throw Error(Errc::corrupt_file, what_ + ": '" + std::string(key) + "' holds " + std::to_string(out.size()) +
                                          " values, expected " + std::to_string(expected));
    }
    return out;
  }

  const std::string& what() const { return what_; }

 private:
  std::string what_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::size_t cursor_ = 0;
};

}  // namespace rcgan::text
