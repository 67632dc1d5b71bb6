#pragma once

// Fixtures and independent oracles shared by the unit tests. The oracles
// deliberately avoid the library's own helpers (no Predicate::contains, no
// nn::backward) so they can catch errors in them.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rcgan/data.hpp"
#include "rcgan/model.hpp"
#include "rcgan/workload.hpp"

namespace rcgan::test {

// Two numeric columns and one categorical, small enough to reason about.
inline Schema mixed_schema() {
  return Schema({
      {"x", ColumnKind::numeric, {}, 0.0, 10.0},
      {"color", ColumnKind::categorical, {"red", "green", "blue"}, 0.0, 0.0},
      {"y", ColumnKind::numeric, {}, -5.0, 5.0},
  });
}

inline Schema numeric_schema(std::size_t cols, double lo = 0.0, double hi = 100.0) {
  std::vector<ColumnSpec> specs;
  for (std::size_t c = 0; c < cols; ++c) specs.push_back({"n" + std::to_string(c), ColumnKind::numeric, {}, lo, hi});
  return Schema(std::move(specs));
}

// Uniform random table; numerics rounded to integers so that nesting and
// boundary cases actually produce ties.
inline Table random_table(const Schema& schema, std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Table t(schema);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> rec;
    for (const auto& c : schema.columns()) {
      if (c.is_categorical()) {
        rec.push_back(static_cast<double>(gen() % c.categories.size()));
      } else {
        std::uniform_real_distribution<double> u(c.domain_min, c.domain_max);
        rec.push_back(std::clamp(std::round(u(gen)), c.domain_min, c.domain_max));
      }
    }
    t.append(rec);
  }
  return t;
}

inline RangeQuery random_query(const Schema& schema, std::mt19937_64& gen) {
  RangeQuery q;
  for (auto c : schema.numeric_columns()) {
    if (gen() % 2 == 0 && !(q.predicates.empty() && c == schema.numeric_columns().back())) continue;
    const auto& spec = schema.column(c);
    std::uniform_real_distribution<double> u(spec.domain_min, spec.domain_max);
    double a = std::round(u(gen)), b = std::round(u(gen));
    if (a > b) std::swap(a, b);
    q.predicates.push_back({c, a, b});
  }
  return q;
}

// Row-by-row, predicate-by-predicate scan written from the definition.
inline std::size_t brute_count(const RangeQuery& q, const Table& t) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    bool ok = true;
    for (std::size_t k = 0; k < q.predicates.size(); ++k) {
      const double v = t.record(r)[q.predicates[k].column];
      if (v < q.predicates[k].lo || v > q.predicates[k].hi) ok = false;
    }
    if (ok) ++n;
  }
  return n;
}

// Plain-loop definitional Q-Error.
inline double qerror_formula(double truth, double est, double eps) {
  double best = 1.0;
  const double a = (truth + eps) / (est + eps);
  const double b = (est + eps) / (truth + eps);
  if (a > best) best = a;
  if (b > best) best = b;
  return best;
}

// Central differences of an arbitrary scalar function of a network's
// parameters, compared against `analytic`; returns the max relative error.
template <class Loss>
double fd_against(nn::Network net, const nn::Gradients& analytic, Loss&& loss, double h = 1e-4) {
  std::vector<double> a;
  nn::for_each_gradient(analytic, [&](double g) { a.push_back(g); });
  std::vector<double*> params;
  nn::for_each_parameter(net, [&](std::size_t, double& p) { params.push_back(&p); });
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i];
    const double saved = *p;
    *p = saved + h;
    net.touch();
    const double up = loss(net);
    *p = saved - h;
    net.touch();
    const double down = loss(net);
    *p = saved;
    net.touch();
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(a[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace rcgan::test
