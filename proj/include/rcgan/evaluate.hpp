#pragma once

// Fidelity of a generated table: Q-Error percentiles over a workload and
// the mixed real/generated classifier experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rcgan/classifier.hpp"
#include "rcgan/data.hpp"
#include "rcgan/error.hpp"
#include "rcgan/rng.hpp"
#include "rcgan/text.hpp"
#include "rcgan/workload.hpp"

namespace rcgan {

// Nearest-rank percentile: element ⌈p·n⌉ (1-based) of the sorted values.
inline double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw Error(Errc::usage, "percentile of an empty list");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

struct QErrorReport {
  std::string workload;
  std::vector<double> qerrors;  // per query, workload order
  double median = 1.0;
  double p75 = 1.0;
  double p90 = 1.0;
};

inline QErrorReport summarize_qerrors(std::vector<double> qerrors, std::string workload_name = {}) {
  QErrorReport rep;
  rep.workload = std::move(workload_name);
  rep.qerrors = qerrors;
  std::sort(qerrors.begin(), qerrors.end());
  rep.median = nearest_rank(qerrors, 0.5);
  rep.p75 = nearest_rank(qerrors, 0.75);
  rep.p90 = nearest_rank(qerrors, 0.9);
  return rep;
}

// Per-query q-error between selectivity on `real` and on `generated`.
inline QErrorReport qerror_report(const Table& real, const Table& generated, const Workload& w,
                                  double eps = kDefaultQErrorEps, std::string workload_name = {}) {
  if (!(real.schema() == generated.schema())) throw Error(Errc::structural, "real and generated schemas differ");
  if (real.rows() == 0 || generated.rows() == 0) {
    throw Error(Errc::undefined_selectivity, "q-error report needs non-empty tables");
  }
  if (w.queries.empty()) throw Error(Errc::usage, "q-error report needs a non-empty workload");
  std::vector<double> q;
  q.reserve(w.size());
  for (const auto& query : w.queries) {
    q.push_back(qerror({selectivity(query, real), selectivity(query, generated)}, eps));
  }
  return summarize_qerrors(std::move(q), std::move(workload_name));
}

inline std::string qerror_report_text(const QErrorReport& r) {
  text::KvWriter w;
  w.put("workload", r.workload);
  w.put("queries", static_cast<std::uint64_t>(r.qerrors.size()));
  w.put("median", r.median);
  w.put("p75", r.p75);
  w.put("p90", r.p90);
  return w.str();
}

inline std::string qerror_report_csv(const std::vector<QErrorReport>& reports) {
  std::string out = "workload,queries,median,p75,p90\n";
  for (const auto& r : reports) {
    out += text::csv_escape(r.workload) + "," + std::to_string(r.qerrors.size()) + "," +
           text::format_double(r.median) + "," + text::format_double(r.p75) + "," + text::format_double(r.p90) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classifier fidelity

// Maps a record to the binary target. Numeric targets are positive when the
// native value exceeds `threshold`; categorical targets when the label is
// one of `positive_labels`.
struct LabelRule {
  double threshold = 50000.0;
  std::vector<std::string> positive_labels = {">50K", ">50K."};

  int label(const Table& t, std::size_t row, std::size_t col) const {
    const auto& spec = t.schema().column(col);
    if (spec.is_numeric()) return t.value(row, col) > threshold ? 1 : 0;
    const auto& l = t.label(row, col);
    return std::find(positive_labels.begin(), positive_labels.end(), l) != positive_labels.end() ? 1 : 0;
  }
};

struct FidelitySplit {
  std::size_t test_records = 1000;
  double real_fraction_a = 0.15;       // setting A: real only
  double real_fraction_b = 0.05;       // setting B: real part
  double generated_fraction_b = 0.10;  // setting B: generated part
  // Fractions are of the real table's size.
};

struct FidelitySetting {
  std::string description;
  std::size_t real_rows = 0;
  std::size_t generated_rows = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct FidelityReport {
  std::string target;
  std::size_t test_records = 0;
  std::size_t test_positives = 0;
  std::vector<FidelitySetting> settings;  // [0]: real only, [1]: real + generated
};

// Trains one classifier on `real_fraction_a` of the real records and one on
// `real_fraction_b` real plus `generated_fraction_b` generated records;
// both are scored on the same held-out real records, which are drawn first
// and excluded from every training pool.
inline FidelityReport fidelity_experiment(const Table& real, const Table& generated, const std::string& target,
                                          const LabelRule& rule = {}, const FidelitySplit& split = {},
                                          std::uint64_t seed = 0, const gbdt::BoostConfig& boost = {}) {
  if (!(real.schema() == generated.schema())) throw Error(Errc::structural, "real and generated schemas differ");
  const auto target_col = real.schema().find(target);
  if (!target_col) throw Error(Errc::experiment, "target column '" + target + "' is not in the schema");

  const std::size_t n = real.rows();
  const auto count = [n](double f) { return static_cast<std::size_t>(std::llround(f * static_cast<double>(n))); };
  const std::size_t n_a = count(split.real_fraction_a);
  const std::size_t n_b_real = count(split.real_fraction_b);
  const std::size_t n_b_gen = count(split.generated_fraction_b);
  if (split.test_records + std::max(n_a, n_b_real) > n) {
    throw Error(Errc::experiment, "real table has too few records for the requested split");
  }
  if (n_b_gen > generated.rows()) {
    throw Error(Errc::experiment, "generated table has " + std::to_string(generated.rows()) + " records, " +
                                      std::to_string(n_b_gen) + " needed");
  }

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order.begin(), order.end());
  const std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(split.test_records));
  std::vector<std::size_t> pool(order.begin() + static_cast<std::ptrdiff_t>(split.test_records), order.end());
  rng.shuffle(pool.begin(), pool.end());

  std::vector<std::size_t> gen_order(generated.rows());
  for (std::size_t i = 0; i < gen_order.size(); ++i) gen_order[i] = i;
  rng.shuffle(gen_order.begin(), gen_order.end());

  std::vector<std::size_t> features;
  for (std::size_t c = 0; c < real.schema().size(); ++c) {
    if (c != *target_col) features.push_back(c);
  }
  const auto labels_of = [&](const Table& t) {
    std::vector<int> y(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) y[r] = rule.label(t, r, *target_col);
    return y;
  };

  const Table test_table = real.select_rows(test);
  const Matrix test_x = encode(test_table.project(features));
  const auto test_y = labels_of(test_table);
  FidelityReport report;
  report.target = target;
  report.test_records = test.size();
  for (int y : test_y) report.test_positives += static_cast<std::size_t>(y);
  if (report.test_positives == 0 || report.test_positives == test_y.size()) {
    throw Error(Errc::experiment, "held-out records contain a single class");
  }

  const auto run = [&](const Table& train, std::string description, std::size_t nr, std::size_t ng) {
    const auto model = gbdt::fit(encode(train.project(features)), labels_of(train), boost);
    const auto m = gbdt::metrics(gbdt::predict(model, test_x), test_y);
    return FidelitySetting{std::move(description), nr, ng, m.precision, m.recall, m.f1};
  };

  const Table train_a = real.select_rows({pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_a)});
  Table train_b = real.select_rows({pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_b_real)});
  train_b.concat(generated.select_rows({gen_order.begin(), gen_order.begin() + static_cast<std::ptrdiff_t>(n_b_gen)}));

  const auto pct = [](double f) { return std::to_string(static_cast<int>(std::lround(f * 100.0))) + "%"; };
  report.settings.push_back(run(train_a, pct(split.real_fraction_a) + " real", n_a, 0));
  report.settings.push_back(run(train_b, pct(split.real_fraction_b) + " real + " + pct(split.generated_fraction_b) +
                                             " generated",
                                n_b_real, n_b_gen));
  return report;
}

inline std::string fidelity_report_text(const FidelityReport& r) {
  text::KvWriter w;
  w.put("target", r.target);
  w.put("test_records", static_cast<std::uint64_t>(r.test_records));
  w.put("test_positives", static_cast<std::uint64_t>(r.test_positives));
  for (const auto& s : r.settings) {
    w.put("setting", s.description);
    w.put("real_rows", static_cast<std::uint64_t>(s.real_rows));
    w.put("generated_rows", static_cast<std::uint64_t>(s.generated_rows));
    w.put("precision", s.precision);
    w.put("recall", s.recall);
    w.put("f1", s.f1);
  }
  return w.str();
}

inline std::string fidelity_report_csv(const FidelityReport& r) {
  std::string out = "setting,real_rows,generated_rows,precision,recall,f1\n";
  for (const auto& s : r.settings) {
    out += text::csv_escape(s.description) + "," + std::to_string(s.real_rows) + "," +
           std::to_string(s.generated_rows) + "," + text::format_double(s.precision) + "," +
           text::format_double(s.recall) + "," + text::format_double(s.f1) + "\n";
  }
  return out;
}

}  // namespace rcgan
