#include <gtest/gtest.h>

#include <random>
#include <set>

#include "rcgan/workload.hpp"
#include "support.hpp"

using namespace rcgan;

TEST(QError, SpecExamples) {
  EXPECT_EQ(qerror({0.2, 0.2}), 1.0);
  EXPECT_NEAR(qerror({0.2, 0.1}, 1e-15), 2.0, 1e-12);
  const double q = qerror({0.0, 0.01}, 1e-6);
  EXPECT_NEAR(q, (0.01 + 1e-6) / 1e-6, 1e-6);
  EXPECT_TRUE(std::isfinite(q));
  EXPECT_GT(q, 1.0);
}

TEST(QError, PropertiesOnRandomPairs) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    // Mix in exact zeros and repeats.
    const double a = i % 7 == 0 ? 0.0 : u(gen);
    const double b = i % 11 == 0 ? a : u(gen);
    const double q = qerror({a, b});
    ASSERT_GE(q, 1.0);
    ASSERT_EQ(q, qerror({b, a}));
    ASSERT_EQ(qerror({a, a}), 1.0);
    ASSERT_NEAR(q, test::qerror_formula(a, b, kDefaultQErrorEps), 1e-12 * q);
  }
}

TEST(ExactCount, HandTable) {
  const Schema s({{"age", ColumnKind::numeric, {}, 0, 100}});
  Table t(s);
  for (double v : {25.0, 30.0, 50.0, 40.0, 60.0}) t.append({v});
  // Rows 2 and 4 (1-based) sit inside [30,40]; both bounds inclusive.
  EXPECT_EQ(exact_count({0, {{0, 30, 40}}}, t), 2u);
  EXPECT_EQ(exact_count({0, {{0, 0, 100}}}, t), 5u);
  EXPECT_EQ(exact_count({0, {{0, 33, 33}}}, t), 0u);
  EXPECT_DOUBLE_EQ(selectivity({0, {{0, 30, 40}}}, t), 0.4);
}

TEST(ExactCount, SelectivityOfTenInHundred) {
  const Schema s = test::numeric_schema(1);
  Table t(s);
  for (int i = 0; i < 100; ++i) t.append({static_cast<double>(i)});
  EXPECT_DOUBLE_EQ(selectivity({0, {{0, 0, 9}}}, t), 0.10);
  EXPECT_DOUBLE_EQ(selectivity({0, {{0, 0, 100}}}, t), 1.0);
}

TEST(ExactCount, Errors) {
  const Schema s = test::mixed_schema();
  const Table t = test::random_table(s, 5, 1);
  try {
    exact_count({0, {{1, 0, 1}}}, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::query);
  }
  try {
    selectivity({0, {{0, 0, 1}}}, Table(s));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::undefined_selectivity);
  }
}

TEST(ExactCount, MatchesDoubleLoopScan) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 100; ++i) {
    const Schema s = test::numeric_schema(1 + gen() % 4, 0.0, 20.0);
    const Table t = test::random_table(s, 1 + gen() % 1000, gen());
    const RangeQuery q = test::random_query(s, gen);
    ASSERT_EQ(exact_count(q, t), test::brute_count(q, t)) << "instance " << i;
  }
}

TEST(ExactCount, MonotoneUnderNesting) {
  std::mt19937_64 gen(9);
  const Schema s = test::numeric_schema(3, 0.0, 50.0);
  const Table t = test::random_table(s, 500, 4);
  for (int i = 0; i < 1000; ++i) {
    const RangeQuery inner = test::random_query(s, gen);
    RangeQuery outer = inner;
    for (auto& p : outer.predicates) {
      p.lo -= static_cast<double>(gen() % 5);
      p.hi += static_cast<double>(gen() % 5);
    }
    ASSERT_LE(exact_count(inner, t), exact_count(outer, t));
  }
}

TEST(GenerateWorkload, DeterministicAndValid) {
  const Schema s = test::mixed_schema();
  const Workload a = generate_workload(s, 500, 3);
  const Workload b = generate_workload(s, 500, 3);
  EXPECT_EQ(workload_to_text(a, s), workload_to_text(b, s));
  ASSERT_EQ(a.size(), 500u);
  for (const auto& q : a.queries) {
    validate_query(q, s);
    for (const auto& p : q.predicates) {
      const auto& c = s.column(p.column);
      EXPECT_GE(p.lo, c.domain_min);
      EXPECT_LE(p.hi, c.domain_max);
      EXPECT_TRUE(c.is_numeric());
    }
  }
}

TEST(GenerateWorkload, DifferentSeedsGiveDisjointQueries) {
  const Schema s = test::numeric_schema(6);
  const Workload train = generate_workload(s, 2000, 1);
  const Workload test_w = generate_workload(s, 500, 2);
  std::set<std::vector<double>> seen;
  const auto key = [](const RangeQuery& q) {
    std::vector<double> k;
    for (const auto& p : q.predicates) k.insert(k.end(), {static_cast<double>(p.column), p.lo, p.hi});
    return k;
  };
  for (const auto& q : train.queries) seen.insert(key(q));
  for (const auto& q : test_w.queries) EXPECT_FALSE(seen.count(key(q)));
}

TEST(GenerateWorkload, AttributeCountsCoverRange) {
  const Schema s = test::numeric_schema(4);
  const Workload w = generate_workload(s, 2000, 5);
  std::set<std::size_t> sizes;
  for (const auto& q : w.queries) sizes.insert(q.predicates.size());
  EXPECT_EQ(sizes, (std::set<std::size_t>{1, 2, 3, 4}));
}

TEST(GenerateWorkload, NoNumericColumns) {
  const Schema s({{"c", ColumnKind::categorical, {"a"}, 0, 0}});
  try {
    generate_workload(s, 10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unsupported_schema);
  }
}

TEST(WorkloadFile, RoundTripAndCountCheck) {
  const Schema s = test::mixed_schema();
  const Workload w = generate_workload(s, 50, 8);
  const auto txt = workload_to_text(w, s);
  EXPECT_EQ(workload_from_text(txt, s), w);
  EXPECT_NE(txt.find("# seed=8"), std::string::npos);
  EXPECT_NE(txt.find("# config_digest="), std::string::npos);
  const auto cut = txt.substr(0, txt.rfind('\n', txt.size() - 2) + 1);
  EXPECT_THROW(workload_from_text(cut, s), Error);
}

TEST(NormalizeQuery, MapsBoundsToUnitInterval) {
  const Schema s = test::mixed_schema();
  const auto n = normalize_query({0, {{0, 2.5, 5}, {2, -5, 0}}}, s);
  EXPECT_DOUBLE_EQ(n.predicates[0].lo, 0.25);
  EXPECT_DOUBLE_EQ(n.predicates[0].hi, 0.5);
  EXPECT_DOUBLE_EQ(n.predicates[1].lo, 0.0);
  EXPECT_DOUBLE_EQ(n.predicates[1].hi, 0.5);
}
