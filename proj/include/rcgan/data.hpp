#pragma once

// Tabular data: column metadata, schema inference, CSV ingestion and the
// record <-> vector encoding consumed by the networks.
//
// Encoded layout follows schema order: a one-hot block per categorical
// column, one scalar in [0,1] per numeric column (min-max normalized).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rcgan/error.hpp"
#include "rcgan/rng.hpp"
#include "rcgan/text.hpp"

namespace rcgan {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// n_rows x encoded width, values nominally in [0,1].
using EncodedMatrix = Matrix;

enum class ColumnKind { categorical, numeric };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> categories;  // categorical only
  double domain_min = 0.0;              // numeric only
  double domain_max = 0.0;

  bool is_numeric() const { return kind == ColumnKind::numeric; }
  bool is_categorical() const { return kind == ColumnKind::categorical; }

  double span() const { return domain_max - domain_min; }

  std::optional<std::size_t> category_index(std::string_view label) const {
    for (std::size_t i = 0; i < categories.size(); ++i) {
      if (categories[i] == label) return i;
    }
    return std::nullopt;
  }

  // Native value -> [0,1]. Degenerate domains map to 0.5.
  double normalize(double v) const {
    if (domain_max == domain_min) return 0.5;
    return (v - domain_min) / (domain_max - domain_min);
  }

  double denormalize(double u) const { return domain_min + std::clamp(u, 0.0, 1.0) * (domain_max - domain_min); }

  bool operator==(const ColumnSpec&) const = default;
};

class Schema {
 public:
  Schema() = default;

  explicit Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
    validate();
    std::size_t off = 0;
    offsets_.reserve(columns_.size());
    for (const auto& c : columns_) {
      offsets_.push_back(off);
      off += c.is_categorical() ? c.categories.size() : 1;
    }
    width_ = off;
  }

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const ColumnSpec& column(std::size_t i) const { return columns_.at(i); }
  std::size_t size() const { return columns_.size(); }

  // Σ|categories| over categorical columns + number of numeric columns.
  std::size_t encoded_width() const { return width_; }

  // First encoded slot of column i.
  std::size_t offset(std::size_t i) const { return offsets_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::vector<std::size_t> numeric_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].is_numeric()) out.push_back(i);
    }
    return out;
  }

  std::size_t count(ColumnKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(columns_.begin(), columns_.end(), [kind](const ColumnSpec& c) { return c.kind == kind; }));
  }

  // Schema restricted to the given columns, in the given order.
  Schema project(const std::vector<std::size_t>& cols) const {
    std::vector<ColumnSpec> out;
    out.reserve(cols.size());
    for (auto c : cols) out.push_back(columns_.at(c));
    return Schema(std::move(out));
  }

  // Standalone schema file (format tag + columns).
  std::string serialize() const;
  static Schema parse(std::string_view contents);

  // Column entries only, for embedding in other artifacts.
  void write(text::KvWriter& w) const;
  static Schema read(text::KvReader& r);

  // Stable digest of the serialized form; embedded in derived artifacts.
  std::uint64_t digest() const { return text::fnv1a(serialize()); }

  bool operator==(const Schema& o) const { return columns_ == o.columns_; }

 private:
  void validate() const {
    std::set<std::string> names;
    for (const auto& c : columns_) {
      if (!names.insert(c.name).second) throw Error(Errc::structural, "duplicate column name '" + c.name + "'");
      if (c.is_categorical()) {
        if (c.categories.empty()) throw Error(Errc::structural, "categorical column '" + c.name + "' has no categories");
        std::set<std::string> seen(c.categories.begin(), c.categories.end());
        if (seen.size() != c.categories.size()) {
          throw Error(Errc::structural, "categorical column '" + c.name + "' repeats a category");
        }
      } else if (!(c.domain_min <= c.domain_max)) {
        throw Error(Errc::structural, "numeric column '" + c.name + "' has domain_min > domain_max");
      }
    }
  }

  std::vector<ColumnSpec> columns_;
  std::vector<std::size_t> offsets_;
  std::size_t width_ = 0;
};

inline constexpr std::string_view kSchemaFormat = "rcgan-schema/1";

inline void Schema::write(text::KvWriter& w) const {
  w.put("columns", static_cast<std::uint64_t>(columns_.size()));
  for (const auto& c : columns_) {
    w.put("name", c.name);
    if (c.is_numeric()) {
      w.put("kind", "numeric");
      w.put("min", c.domain_min);
      w.put("max", c.domain_max);
    } else {
      w.put("kind", "categorical");
      w.put("categories", static_cast<std::uint64_t>(c.categories.size()));
      for (const auto& label : c.categories) w.put("category", label);
    }
  }
}

inline Schema Schema::read(text::KvReader& r) {
  const auto n = r.next_uint("columns");
  std::vector<ColumnSpec> cols;
  for (std::uint64_t i = 0; i < n; ++i) {
    ColumnSpec c;
    c.name = r.next("name");
    const auto& kind = r.next("kind");
    if (kind == "numeric") {
      c.kind = ColumnKind::numeric;
      c.domain_min = r.next_double("min");
      c.domain_max = r.next_double("max");
    } else if (kind == "categorical") {
      c.kind = ColumnKind::categorical;
      const auto k = r.next_uint("categories");
      for (std::uint64_t j = 0; j < k; ++j) c.categories.push_back(r.next("category"));
    } else {
      throw Error(Errc::corrupt_file, r.what() + ": unknown column kind '" + kind + "'");
    }
    cols.push_back(std::move(c));
  }
  try {
    return Schema(std::move(cols));
  } catch (const Error& e) {
    throw Error(Errc::corrupt_file, r.what() + ": " + e.what());
  }
}

inline std::string Schema::serialize() const {
  text::KvWriter w;
  w.put("format", kSchemaFormat);
  write(w);
  return w.str();
}

inline Schema Schema::parse(std::string_view contents) {
  text::KvReader r(contents, "schema");
  if (r.done()) throw Error(Errc::corrupt_file, "schema: empty file");
  const auto& fmt = r.next("format");
  if (fmt != kSchemaFormat) throw Error(Errc::version_mismatch, "schema format '" + fmt + "' is not supported");
  auto schema = read(r);
  if (!r.done()) throw Error(Errc::corrupt_file, "schema: trailing entries after the last column");
  return schema;
}

// Column-major record storage. Categorical cells hold the category index.
class Table {
 public:
  Table() = default;
  explicit Table(Schema schema) : schema_(std::move(schema)), cells_(schema_.size()) {}

  const Schema& schema() const { return schema_; }
  std::size_t rows() const { return cells_.empty() ? 0 : cells_.front().size(); }
  std::size_t cols() const { return cells_.size(); }

  double value(std::size_t row, std::size_t col) const { return cells_[col][row]; }
  std::size_t code(std::size_t row, std::size_t col) const { return static_cast<std::size_t>(cells_[col][row]); }
  const std::string& label(std::size_t row, std::size_t col) const {
    return schema_.column(col).categories[code(row, col)];
  }

  const std::vector<double>& column(std::size_t col) const { return cells_.at(col); }

  void reserve(std::size_t n) {
    for (auto& c : cells_) c.reserve(n);
  }

  // One cell per column: category index for categorical, native value for
  // numeric. Values are validated against the schema.
  void append(const std::vector<double>& record) {
    if (record.size() != cells_.size()) throw Error(Errc::structural, "record width does not match schema");
    for (std::size_t c = 0; c < record.size(); ++c) {
      const auto& spec = schema_.column(c);
      const double v = record[c];
      if (spec.is_categorical()) {
        if (!(v >= 0.0) || v >= static_cast<double>(spec.categories.size()) || v != std::floor(v)) {
          throw Error(Errc::structural, "category index out of range in column '" + spec.name + "'");
        }
      } else if (!(v >= spec.domain_min && v <= spec.domain_max)) {
        throw Error(Errc::structural, "value outside domain in column '" + spec.name + "'");
      }
    }
    for (std::size_t c = 0; c < record.size(); ++c) cells_[c].push_back(record[c]);
  }

  std::vector<double> record(std::size_t row) const {
    std::vector<double> r(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) r[c] = cells_[c][row];
    return r;
  }

  Table select_rows(const std::vector<std::size_t>& rows) const {
    Table out(schema_);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      out.cells_[c].reserve(rows.size());
      for (auto r : rows) out.cells_[c].push_back(cells_[c].at(r));
    }
    return out;
  }

  // Same records under a different column subset/order.
  Table project(const std::vector<std::size_t>& cols) const {
    Table out(schema_.project(cols));
    for (std::size_t i = 0; i < cols.size(); ++i) out.cells_[i] = cells_.at(cols[i]);
    return out;
  }

  // Rows of `other` appended; schemas must be identical.
  void concat(const Table& other) {
    if (!(other.schema_ == schema_)) throw Error(Errc::structural, "cannot concatenate tables with different schemas");
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      cells_[c].insert(cells_[c].end(), other.cells_[c].begin(), other.cells_[c].end());
    }
  }

  bool operator==(const Table& o) const { return schema_ == o.schema_ && cells_ == o.cells_; }

 private:
  friend Table decode(const EncodedMatrix&, const Schema&);

  Schema schema_;
  std::vector<std::vector<double>> cells_;
};

// ---------------------------------------------------------------------------
// Inference and ingestion

// A column is numeric iff every value parses as a real, or it is hinted.
// Categories are kept in first-appearance order. Without a header the
// columns are named col0, col1, ...
inline Schema infer_schema(const text::RawCsv& raw, const std::set<std::string>& numeric_hints = {}) {
  if (raw.rows.empty()) throw Error(Errc::empty_input, "no data rows to infer a schema from");
  const std::size_t ncols = raw.header.empty() ? raw.rows.front().size() : raw.header.size();
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    if (raw.rows[r].size() != ncols) {
      throw Error(Errc::structural, "row " + std::to_string(r + 1) + " has " + std::to_string(raw.rows[r].size()) +
                                        " fields, expected " + std::to_string(ncols));
    }
  }
  for (const auto& hint : numeric_hints) {
    if (std::find(raw.header.begin(), raw.header.end(), hint) == raw.header.end()) {
      throw Error(Errc::structural, "numeric hint names unknown column '" + hint + "'");
    }
  }

  std::vector<ColumnSpec> cols(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    auto& spec = cols[c];
    spec.name = raw.header.empty() ? "col" + std::to_string(c) : raw.header[c];
    const bool hinted = numeric_hints.count(spec.name) > 0;

    bool all_numeric = true;
    double lo = 0.0, hi = 0.0;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
      const auto& cell = raw.rows[r][c];
      if (text::trim(cell).empty()) {
        throw Error(Errc::ingestion, "missing value at row " + std::to_string(r + 1) + ", column '" + spec.name + "'");
      }
      auto v = text::parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        if (hinted) {
          throw Error(Errc::ingestion, "row " + std::to_string(r + 1) + ", column '" + spec.name +
                                           "': '" + cell + "' is not numeric");
        }
        all_numeric = false;
        break;
      }
      if (r == 0) {
        lo = hi = *v;
      } else {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }

    if (all_numeric) {
      spec.kind = ColumnKind::numeric;
      spec.domain_min = lo;
      spec.domain_max = hi;
    } else {
      spec.kind = ColumnKind::categorical;
      std::unordered_map<std::string, std::size_t> seen;
      for (const auto& row : raw.rows) {
        if (seen.emplace(row[c], spec.categories.size()).second) spec.categories.push_back(row[c]);
      }
    }
  }
  return Schema(std::move(cols));
}

// Converts raw records under `schema`. Numerics are clamped into the
// declared domain; unseen labels and unparsable numbers are rejected.
inline Table table_from_raw(const text::RawCsv& raw, const Schema& schema) {
  if (raw.header.size() != schema.size()) {
    throw Error(Errc::ingestion, "header has " + std::to_string(raw.header.size()) + " columns, schema has " +
                                     std::to_string(schema.size()));
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (raw.header[c] != schema.column(c).name) {
      throw Error(Errc::ingestion, "header column " + std::to_string(c + 1) + " is '" + raw.header[c] +
                                       "', schema expects '" + schema.column(c).name + "'");
    }
  }

  std::vector<std::unordered_map<std::string, std::size_t>> lookup(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema.column(c);
    for (std::size_t k = 0; k < spec.categories.size(); ++k) lookup[c].emplace(spec.categories[k], k);
  }

  Table table(schema);
  table.reserve(raw.rows.size());
  std::vector<double> record(schema.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& row = raw.rows[r];
    const auto where = [&](std::size_t c) {
      return "row " + std::to_string(r + 1) + ", column '" + schema.column(c).name + "'";
    };
    if (row.size() != schema.size()) {
      throw Error(Errc::ingestion, "row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) + " fields");
    }
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const auto& spec = schema.column(c);
      if (text::trim(row[c]).empty()) throw Error(Errc::ingestion, "missing value at " + where(c));
      if (spec.is_categorical()) {
        auto it = lookup[c].find(row[c]);
        if (it == lookup[c].end()) throw Error(Errc::ingestion, "unknown label '" + row[c] + "' at " + where(c));
        record[c] = static_cast<double>(it->second);
      } else {
        auto v = text::parse_double(row[c]);
        if (!v || std::isnan(*v)) throw Error(Errc::ingestion, "'" + row[c] + "' is not numeric at " + where(c));
        record[c] = std::clamp(*v, spec.domain_min, spec.domain_max);
      }
    }
    table.append(record);
  }
  return table;
}

inline Table load_table(const std::string& path, const Schema& schema) {
  return table_from_raw(text::parse_csv(text::read_file(path)), schema);
}

// Uniform sample of n rows without replacement, kept in table order.
inline Table subsample(const Table& t, std::size_t n, std::uint64_t seed) {
  if (n >= t.rows()) return t;
  std::vector<std::size_t> idx(t.rows());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return t.select_rows(idx);
}

inline Schema load_schema(const std::string& path) { return Schema::parse(text::read_file(path)); }

inline std::string table_to_csv(const Table& t) {
  const auto& schema = t.schema();
  std::string out;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c) out += ',';
    out += text::csv_escape(schema.column(c).name);
  }
  out += '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out += ',';
      if (schema.column(c).is_categorical()) {
        out += text::csv_escape(t.label(r, c));
      } else {
        out += text::format_double(t.value(r, c));
      }
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Encoding

inline EncodedMatrix encode(const Table& t) {
  const auto& schema = t.schema();
  EncodedMatrix m = EncodedMatrix::Zero(static_cast<Eigen::Index>(t.rows()),
                                        static_cast<Eigen::Index>(schema.encoded_width()));
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema.column(c);
    const auto off = static_cast<Eigen::Index>(schema.offset(c));
    const auto& col = t.column(c);
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      if (spec.is_categorical()) {
        m(row, off + static_cast<Eigen::Index>(col[r])) = 1.0;
      } else {
        m(row, off) = spec.normalize(col[r]);
      }
    }
  }
  return m;
}

// Total on any finite matrix of the right width: categorical blocks decode
// by argmax (lowest index wins ties), numerics are clamped to [0,1] and
// denormalized. NaN numerics decode to the domain minimum.
inline Table decode(const EncodedMatrix& m, const Schema& schema) {
  if (static_cast<std::size_t>(m.cols()) != schema.encoded_width()) {
    throw Error(Errc::structural, "matrix width " + std::to_string(m.cols()) + " does not match encoded width " +
                                      std::to_string(schema.encoded_width()));
  }
  Table t(schema);
  const auto n = static_cast<std::size_t>(m.rows());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema.column(c);
    const auto off = static_cast<Eigen::Index>(schema.offset(c));
    auto& col = t.cells_[c];
    col.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      if (spec.is_categorical()) {
        std::size_t best = 0;
        double best_v = m(row, off);
        for (std::size_t k = 1; k < spec.categories.size(); ++k) {
          const double v = m(row, off + static_cast<Eigen::Index>(k));
          if (v > best_v || (std::isnan(best_v) && !std::isnan(v))) {
            best = k;
            best_v = v;
          }
        }
        col[r] = static_cast<double>(best);
      } else {
        const double u = m(row, off);
        col[r] = spec.denormalize(std::isnan(u) ? 0.0 : u);
      }
    }
  }
  return t;
}

}  // namespace rcgan
