#pragma once

// Range-count workloads over numeric attributes, the exact scan oracle and
// the Q-Error metric.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rcgan/data.hpp"
#include "rcgan/error.hpp"
#include "rcgan/rng.hpp"
#include "rcgan/text.hpp"

namespace rcgan {

// Inclusive interval on one numeric column, native units.
struct Predicate {
  std::size_t column = 0;
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const Predicate&) const = default;
};

struct RangeQuery {
  std::uint64_t id = 0;
  std::vector<Predicate> predicates;  // sorted by column, one per column

  bool operator==(const RangeQuery&) const = default;
};

struct WorkloadParams {
  std::size_t min_attrs = 1;
  std::size_t max_attrs = 0;  // 0: all numeric columns
  double min_half_width = 0.005;
  double max_half_width = 0.25;

  bool operator==(const WorkloadParams&) const = default;
};

struct Workload {
  std::vector<RangeQuery> queries;
  std::uint64_t seed = 0;
  WorkloadParams params;
  std::uint64_t schema_digest = 0;

  std::size_t size() const { return queries.size(); }
  bool operator==(const Workload&) const = default;
};

inline constexpr double kDefaultQErrorEps = 1e-6;

struct SelectivityPair {
  double sel_true = 0.0;
  double sel_gen = 0.0;
};

// max(1, (t+eps)/(g+eps), (g+eps)/(t+eps))
inline double qerror(SelectivityPair p, double eps = kDefaultQErrorEps) {
  const double t = p.sel_true + eps;
  const double g = p.sel_gen + eps;
  return std::max({1.0, t / g, g / t});
}

inline void validate_query(const RangeQuery& q, const Schema& schema) {
  if (q.predicates.empty()) throw Error(Errc::query, "query " + std::to_string(q.id) + " has no predicates");
  for (std::size_t i = 0; i < q.predicates.size(); ++i) {
    const auto& p = q.predicates[i];
    if (p.column >= schema.size()) {
      throw Error(Errc::query, "query " + std::to_string(q.id) + " references column " + std::to_string(p.column) +
                                   " outside the schema");
    }
    if (!schema.column(p.column).is_numeric()) {
      throw Error(Errc::query, "query " + std::to_string(q.id) + " predicates non-numeric column '" +
                                   schema.column(p.column).name + "'");
    }
    if (!(p.lo <= p.hi)) throw Error(Errc::query, "query " + std::to_string(q.id) + " has lo > hi");
    for (std::size_t j = 0; j < i; ++j) {
      if (q.predicates[j].column == p.column) {
        throw Error(Errc::query, "query " + std::to_string(q.id) + " predicates column '" +
                                     schema.column(p.column).name + "' twice");
      }
    }
  }
}

// Each query: k ~ U{min_attrs..max_attrs} distinct numeric columns; per
// column a center ~ U[min,max] and a half-width ~ U[min_hw,max_hw]·span,
// clipped to the column domain.
inline Workload generate_workload(const Schema& schema, std::size_t n, std::uint64_t seed,
                                  const WorkloadParams& params = {}) {
  const auto numeric = schema.numeric_columns();
  if (numeric.empty()) throw Error(Errc::unsupported_schema, "workload generation needs at least one numeric column");
  if (n == 0) throw Error(Errc::usage, "workload size must be at least 1");
  const std::size_t max_attrs = params.max_attrs == 0 ? numeric.size() : std::min(params.max_attrs, numeric.size());
  if (params.min_attrs < 1 || params.min_attrs > max_attrs) {
    throw Error(Errc::usage, "attributes per query must satisfy 1 <= min <= max");
  }
  if (!(params.min_half_width >= 0.0 && params.min_half_width <= params.max_half_width)) {
    throw Error(Errc::usage, "half-width fractions must satisfy 0 <= min <= max");
  }

  Workload w;
  w.seed = seed;
  w.params = params;
  w.schema_digest = schema.digest();
  w.queries.reserve(n);

  Rng rng(seed);
  std::vector<std::size_t> pool(numeric);
  for (std::size_t i = 0; i < n; ++i) {
    RangeQuery q;
    q.id = i;
    const std::size_t k = params.min_attrs + rng.below(max_attrs - params.min_attrs + 1);
    // Partial Fisher-Yates: the first k slots become the chosen columns.
    std::copy(numeric.begin(), numeric.end(), pool.begin());
    for (std::size_t j = 0; j < k; ++j) {
      const auto pick = j + rng.below(pool.size() - j);
      std::swap(pool[j], pool[pick]);
    }
    std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());
    for (auto col : chosen) {
      const auto& spec = schema.column(col);
      const double center = rng.uniform(spec.domain_min, spec.domain_max);
      const double half = rng.uniform(params.min_half_width, params.max_half_width) * spec.span();
      q.predicates.push_back({col, std::max(spec.domain_min, center - half), std::min(spec.domain_max, center + half)});
    }
    w.queries.push_back(std::move(q));
  }
  return w;
}

// Rows satisfying every predicate, bounds inclusive.
inline std::size_t exact_count(const RangeQuery& q, const Table& t) {
  validate_query(q, t.schema());
  std::vector<const double*> cols;
  cols.reserve(q.predicates.size());
  for (const auto& p : q.predicates) cols.push_back(t.column(p.column).data());

  std::size_t count = 0;
  const std::size_t n = t.rows();
  const std::size_t m = q.predicates.size();
  for (std::size_t r = 0; r < n; ++r) {
    bool hit = true;
    for (std::size_t j = 0; j < m && hit; ++j) hit = q.predicates[j].contains(cols[j][r]);
    count += hit ? 1 : 0;
  }
  return count;
}

inline double selectivity(const RangeQuery& q, const Table& t) {
  if (t.rows() == 0) throw Error(Errc::undefined_selectivity, "selectivity on an empty table");
  return static_cast<double>(exact_count(q, t)) / static_cast<double>(t.rows());
}

inline std::vector<double> selectivities(const Workload& w, const Table& t) {
  std::vector<double> out;
  out.reserve(w.size());
  for (const auto& q : w.queries) out.push_back(selectivity(q, t));
  return out;
}

// Bounds mapped into the normalized [0,1] units used by the encoded matrix.
// A degenerate column encodes every row as 0.5, so its predicate becomes
// either the whole unit interval or an interval no encoded value can reach.
inline RangeQuery normalize_query(const RangeQuery& q, const Schema& schema) {
  RangeQuery out = q;
  for (auto& p : out.predicates) {
    const auto& spec = schema.column(p.column);
    if (spec.domain_min == spec.domain_max) {
      const bool covered = p.contains(spec.domain_min);
      p.lo = covered ? 0.0 : 2.0;
      p.hi = covered ? 1.0 : 3.0;
    } else {
      p.lo = spec.normalize(p.lo);
      p.hi = spec.normalize(p.hi);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Workload file
//
//   # format=rcgan-workload/1
//   # seed=...                      header: one key=value per '#' line
//   id,column,lo,hi[,column,lo,hi]...

inline constexpr std::string_view kWorkloadFormat = "rcgan-workload/1";

inline std::uint64_t params_digest(const WorkloadParams& p) {
  return text::fnv1a(std::to_string(p.min_attrs) + " " + std::to_string(p.max_attrs) + " " +
                     text::format_double(p.min_half_width) + " " + text::format_double(p.max_half_width));
}

inline std::string workload_to_text(const Workload& w, const Schema& schema) {
  std::string out;
  const auto header = [&out](std::string_view k, const std::string& v) {
    out += "# ";
    out += k;
    out += '=';
    out += v;
    out += '\n';
  };
  header("format", std::string(kWorkloadFormat));
  header("seed", std::to_string(w.seed));
  header("count", std::to_string(w.size()));
  header("min_attrs", std::to_string(w.params.min_attrs));
  header("max_attrs", std::to_string(w.params.max_attrs));
  header("min_half_width", text::format_double(w.params.min_half_width));
  header("max_half_width", text::format_double(w.params.max_half_width));
  header("schema_digest", text::hex64(w.schema_digest));
  header("config_digest", text::hex64(params_digest(w.params)));
  for (const auto& q : w.queries) {
    out += std::to_string(q.id);
    for (const auto& p : q.predicates) {
      out += ',';
      out += text::csv_escape(schema.column(p.column).name);
      out += ',';
      out += text::format_double(p.lo);
      out += ',';
      out += text::format_double(p.hi);
    }
    out += '\n';
  }
  return out;
}

inline Workload workload_from_text(std::string_view contents, const Schema& schema) {
  Workload w;
  std::size_t expected = 0;
  bool have_format = false, have_count = false;
  std::size_t pos = 0, lineno = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto where = "workload line " + std::to_string(lineno);
    if (line.front() == '#') {
      line.remove_prefix(1);
      line = text::trim(line);
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = line.substr(0, eq);
      const auto val = line.substr(eq + 1);
      const auto num = [&]() {
        auto v = text::parse_double(val);
        if (!v) throw Error(Errc::corrupt_file, where + ": bad value for '" + std::string(key) + "'");
        return *v;
      };
      if (key == "format") {
        if (val != kWorkloadFormat) throw Error(Errc::version_mismatch, "workload format '" + std::string(val) + "'");
        have_format = true;
      } else if (key == "seed") {
        auto v = text::parse_uint(val);
        if (!v) throw Error(Errc::corrupt_file, where + ": bad seed");
        w.seed = *v;
      } else if (key == "count") {
        expected = static_cast<std::size_t>(num());
        have_count = true;
      } else if (key == "min_attrs") {
        w.params.min_attrs = static_cast<std::size_t>(num());
      } else if (key == "max_attrs") {
        w.params.max_attrs = static_cast<std::size_t>(num());
      } else if (key == "min_half_width") {
        w.params.min_half_width = num();
      } else if (key == "max_half_width") {
        w.params.max_half_width = num();
      } else if (key == "schema_digest") {
        w.schema_digest = std::stoull(std::string(val), nullptr, 16);
      }
      continue;
    }
    const auto fields = text::split_csv_line(line);
    if (fields.size() < 4 || (fields.size() - 1) % 3 != 0) {
      throw Error(Errc::corrupt_file, where + ": expected id followed by (column, lo, hi) triples");
    }
    RangeQuery q;
    auto id = text::parse_uint(fields[0]);
    if (!id) throw Error(Errc::corrupt_file, where + ": bad query id");
    q.id = *id;
    for (std::size_t i = 1; i + 2 < fields.size(); i += 3) {
      auto col = schema.find(fields[i]);
      if (!col) throw Error(Errc::query, where + ": unknown column '" + fields[i] + "'");
      auto lo = text::parse_double(fields[i + 1]);
      auto hi = text::parse_double(fields[i + 2]);
      if (!lo || !hi) throw Error(Errc::corrupt_file, where + ": bad bound");
      q.predicates.push_back({*col, *lo, *hi});
    }
    std::sort(q.predicates.begin(), q.predicates.end(),
              [](const Predicate& a, const Predicate& b) { return a.column < b.column; });
    validate_query(q, schema);
    w.queries.push_back(std::move(q));
  }
  if (!have_format) throw Error(Errc::corrupt_file, "workload: missing format header");
  if (have_count && expected != w.queries.size()) {
    throw Error(Errc::corrupt_file, "workload: header announces " + std::to_string(expected) + " queries, found " +
                                        std::to_string(w.queries.size()));
  }
  return w;
}

inline Workload load_workload(const std::string& path, const Schema& schema) {
  return workload_from_text(text::read_file(path), schema);
}

}  // namespace rcgan
