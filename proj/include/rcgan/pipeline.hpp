#pragma once

// Generation-based query answering at desk scale:
//
//   text --analyze--> QueryPlan --route--> per-generator results --synthesize--> Answer
//
// The analyzer is a fixed grammar behind the QueryAnalyzer interface:
//
//   query     := prefix "where" predicate ("and" predicate)* ["?" | "."]
//   prefix    := "how" "many" "records" | "count" word*
//   predicate := column "between" number "and" number
//
// Keywords are case-insensitive, column names must match exactly.
// Result generators answer RangeCount sub-queries either from a generated
// table (model) or by scanning the real table (oracle); when both answer,
// the Answer carries their q-error and faithfulness = 1 / q-error.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcgan/data.hpp"
#include "rcgan/error.hpp"
#include "rcgan/text.hpp"
#include "rcgan/workload.hpp"

namespace rcgan::pipeline {

struct UserQuery {
  std::string text;
};

enum class SubQueryKind { range_count };

struct SubQuery {
  SubQueryKind kind = SubQueryKind::range_count;
  RangeQuery query;
  std::size_t span_begin = 0;  // source text [begin, end)
  std::size_t span_end = 0;
};

struct QueryPlan {
  std::vector<SubQuery> sub_queries;
};

class QueryAnalyzer {
 public:
  virtual ~QueryAnalyzer() = default;
  virtual QueryPlan analyze(const UserQuery& q, const Schema& schema) const = 0;
};

namespace detail {

struct Token {
  std::string text;
  std::size_t pos = 0;
};

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    out.push_back({std::string(s.substr(start, i - start)), start});
  }
  // A trailing '?' or '.' closes the sentence; split it off as its own token
  // unless it is part of a number ("40." stays a number).
  if (!out.empty()) {
    auto& last = out.back();
    if (last.text.size() > 1 && (last.text.back() == '?' || last.text.back() == '.') &&
        !(last.text.back() == '.' && text::parse_double(last.text))) {
      out.push_back({std::string(1, last.text.back()), last.pos + last.text.size() - 1});
      last.text.pop_back();
    }
  }
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

class GrammarAnalyzer final : public QueryAnalyzer {
 public:
  QueryPlan analyze(const UserQuery& q, const Schema& schema) const override {
    const auto tokens = detail::tokenize(q.text);
    std::size_t i = 0;
    const auto at_end = [&] { return i >= tokens.size(); };
    const auto pos = [&] { return at_end() ? q.text.size() : tokens[i].pos; };
    const auto fail = [&](const std::string& what) -> void {
      throw Error(Errc::parse, "at position " + std::to_string(pos()) + ": " + what);
    };
    const auto is_kw = [&](std::string_view kw) { return !at_end() && detail::lower(tokens[i].text) == kw; };
    const auto expect_kw = [&](std::string_view kw) {
      if (!is_kw(kw)) {
        fail("expected '" + std::string(kw) + "'" + (at_end() ? " but the query ended" : ", found '" + tokens[i].text + "'"));
      }
      ++i;
    };

    if (tokens.empty()) throw Error(Errc::parse, "at position 0: empty query");
    if (is_kw("how")) {
      ++i;
      expect_kw("many");
      expect_kw("records");
    } else if (is_kw("count")) {
      ++i;
      while (!at_end() && !is_kw("where")) ++i;
    } else {
      fail("expected 'how many records' or 'count'");
    }
    expect_kw("where");

    SubQuery sub;
    sub.span_begin = pos();
    for (;;) {
      if (at_end()) fail("expected a column name");
      const auto col_tok = tokens[i++];
      const auto col = schema.find(col_tok.text);
      if (!col) throw Error(Errc::semantic, unknown_column_message(col_tok.text, schema));
      if (!schema.column(*col).is_numeric()) {
        throw Error(Errc::semantic, "column '" + col_tok.text + "' is categorical; ranges need a numeric column");
      }
      expect_kw("between");
      const auto lo = number(tokens, i, fail);
      expect_kw("and");
      const auto hi = number(tokens, i, fail);
      if (lo > hi) {
        throw Error(Errc::semantic, "range on '" + col_tok.text + "' has lower bound above upper bound");
      }
      for (const auto& p : sub.query.predicates) {
        if (p.column == *col) throw Error(Errc::semantic, "column '" + col_tok.text + "' is constrained twice");
      }
      sub.query.predicates.push_back({*col, lo, hi});
      sub.span_end = tokens[i - 1].pos + tokens[i - 1].text.size();
      if (at_end()) break;
      if (tokens[i].text == "?" || tokens[i].text == ".") {
        ++i;
        if (!at_end()) fail("unexpected text after the end of the query");
        break;
      }
      expect_kw("and");
    }
    std::sort(sub.query.predicates.begin(), sub.query.predicates.end(),
              [](const Predicate& a, const Predicate& b) { return a.column < b.column; });
    validate_query(sub.query, schema);
    return QueryPlan{{std::move(sub)}};
  }

 private:
  template <class Fail>
  static double number(const std::vector<detail::Token>& tokens, std::size_t& i, Fail& fail) {
    if (i >= tokens.size()) fail("expected a number but the query ended");
    auto v = text::parse_double(tokens[i].text);
    if (!v || !std::isfinite(*v)) fail("expected a number, found '" + tokens[i].text + "'");
    ++i;
    return *v;
  }

  static std::string unknown_column_message(const std::string& name, const Schema& schema) {
    std::vector<std::pair<std::size_t, std::string>> scored;
    for (auto c : schema.numeric_columns()) {
      const auto& cn = schema.column(c).name;
      scored.emplace_back(detail::edit_distance(detail::lower(name), detail::lower(cn)), cn);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string msg = "unknown column '" + name + "'; numeric columns are";
    for (std::size_t k = 0; k < scored.size(); ++k) msg += (k ? ", '" : " '") + scored[k].second + "'";
    return msg;
  }
};

// ---------------------------------------------------------------------------
// Result generators

enum class GeneratorRole { model, oracle };

class ResultGenerator {
 public:
  virtual ~ResultGenerator() = default;
  virtual GeneratorRole role() const = 0;
  virtual bool handles(SubQueryKind kind) const = 0;
  virtual std::uint64_t answer(const SubQuery& sub) const = 0;
};

// Half-up rounding of a non-negative count.
inline std::uint64_t round_count(double x) { return static_cast<std::uint64_t>(std::floor(x + 0.5)); }

// Answers from a generated table scaled to the real table's size.
class ModelResultGenerator final : public ResultGenerator {
 public:
  ModelResultGenerator(Table generated, std::size_t real_rows)
      : generated_(std::move(generated)), real_rows_(real_rows) {
    if (generated_.rows() == 0) throw Error(Errc::usage, "model generator needs a non-empty generated table");
  }

  GeneratorRole role() const override { return GeneratorRole::model; }
  bool handles(SubQueryKind kind) const override { return kind == SubQueryKind::range_count; }
  std::uint64_t answer(const SubQuery& sub) const override {
    return round_count(selectivity(sub.query, generated_) * static_cast<double>(real_rows_));
  }

  const Table& generated() const { return generated_; }

 private:
  Table generated_;
  std::size_t real_rows_;
};

// Retrieval over the real table.
class OracleResultGenerator final : public ResultGenerator {
 public:
  explicit OracleResultGenerator(const Table& real) : real_(&real) {}

  GeneratorRole role() const override { return GeneratorRole::oracle; }
  bool handles(SubQueryKind kind) const override { return kind == SubQueryKind::range_count; }
  std::uint64_t answer(const SubQuery& sub) const override { return exact_count(sub.query, *real_); }

 private:
  const Table* real_;
};

using Registry = std::map<std::string, std::shared_ptr<const ResultGenerator>>;

struct SubQueryResult {
  std::optional<std::uint64_t> model;
  std::optional<std::uint64_t> oracle;
};

inline std::vector<SubQueryResult> route(const QueryPlan& plan, const Registry& registry) {
  if (registry.empty()) throw Error(Errc::routing, "no result generators are registered");
  std::vector<SubQueryResult> out;
  out.reserve(plan.sub_queries.size());
  for (const auto& sub : plan.sub_queries) {
    SubQueryResult res;
    bool handled = false;
    for (const auto& [name, gen] : registry) {
      if (!gen || !gen->handles(sub.kind)) continue;
      handled = true;
      auto& slot = gen->role() == GeneratorRole::model ? res.model : res.oracle;
      if (!slot) slot = gen->answer(sub);
    }
    if (!handled) throw Error(Errc::routing, "no registered generator handles range-count sub-queries");
    out.push_back(res);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthesis

struct SubAnswer {
  RangeQuery query;
  std::optional<std::uint64_t> generated;
  std::optional<std::uint64_t> oracle;
  std::optional<double> qerror;
  std::optional<double> faithfulness;

  std::uint64_t count() const { return generated ? *generated : *oracle; }
};

struct Answer {
  std::vector<SubAnswer> parts;
  std::string text;
};

inline std::string describe(const RangeQuery& q, const Schema& schema) {
  std::string out;
  for (std::size_t i = 0; i < q.predicates.size(); ++i) {
    const auto& p = q.predicates[i];
    if (i) out += " and ";
    out += schema.column(p.column).name + " between " + text::format_double(p.lo) + " and " +
           text::format_double(p.hi);
  }
  return out;
}

inline std::string format_faithfulness(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", f);
  return buf;
}

// `real_rows` converts counts to selectivities for the q-error.
inline Answer synthesize(const UserQuery& q, const QueryPlan& plan, const std::vector<SubQueryResult>& results,
                         const Schema& schema, std::size_t real_rows, double eps = kDefaultQErrorEps) {
  (void)q;
  if (results.size() != plan.sub_queries.size()) {
    throw Error(Errc::structural, "results do not cover every sub-query");
  }
  Answer ans;
  for (std::size_t i = 0; i < results.size(); ++i) {
    SubAnswer part;
    part.query = plan.sub_queries[i].query;
    part.generated = results[i].model;
    part.oracle = results[i].oracle;
    if (!part.generated && !part.oracle) throw Error(Errc::structural, "sub-query has no result");
    if (part.generated && part.oracle) {
      const double n = std::max<double>(1.0, static_cast<double>(real_rows));
      part.qerror = qerror({static_cast<double>(*part.oracle) / n, static_cast<double>(*part.generated) / n}, eps);
      part.faithfulness = *part.generated == *part.oracle ? 1.0 : 1.0 / *part.qerror;
    }

    std::string sentence;
    if (part.generated) {
      sentence = "Approximately " + std::to_string(*part.generated) + " records match " +
                 describe(part.query, schema);
      if (part.faithfulness) sentence += " (faithfulness " + format_faithfulness(*part.faithfulness) + ")";
    } else {
      sentence = std::to_string(*part.oracle) + " records match " + describe(part.query, schema);
    }
    sentence += ".";
    if (!ans.text.empty()) ans.text += " ";
    ans.text += sentence;
    ans.parts.push_back(std::move(part));
  }
  return ans;
}

// Machine-readable form: one key=value per line.
inline std::string answer_record(const Answer& a, const Schema& schema) {
  text::KvWriter w;
  w.put("sub_queries", static_cast<std::uint64_t>(a.parts.size()));
  for (const auto& p : a.parts) {
    w.put("sub_query", describe(p.query, schema));
    w.put("count", p.count());
    if (p.generated) w.put("generated", *p.generated);
    if (p.oracle) w.put("oracle", *p.oracle);
    if (p.qerror) w.put("qerror", *p.qerror);
    if (p.faithfulness) w.put("faithfulness", *p.faithfulness);
  }
  w.put("text", a.text);
  return w.str();
}

// Analyzer + registry bound to one schema and real table size.
class Pipeline {
 public:
  Pipeline(Schema schema, std::size_t real_rows, Registry registry,
           std::shared_ptr<const QueryAnalyzer> analyzer = std::make_shared<GrammarAnalyzer>())
      : schema_(std::move(schema)),
        real_rows_(real_rows),
        registry_(std::move(registry)),
        analyzer_(std::move(analyzer)) {}

  Answer ask(const UserQuery& q) const {
    const auto plan = analyzer_->analyze(q, schema_);
    return synthesize(q, plan, route(plan, registry_), schema_, real_rows_);
  }

  const Schema& schema() const { return schema_; }

 private:
  Schema schema_;
  std::size_t real_rows_;
  Registry registry_;
  std::shared_ptr<const QueryAnalyzer> analyzer_;
};

// Renders a range query in the analyzer's grammar.
inline std::string to_question(const RangeQuery& q, const Schema& schema) {
  return "how many records where " + describe(q, schema);
}

}  // namespace rcgan::pipeline
