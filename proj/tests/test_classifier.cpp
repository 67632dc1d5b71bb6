#include <gtest/gtest.h>

#include "rcgan/classifier.hpp"
#include "rcgan/rng.hpp"

using namespace rcgan;

namespace {

struct Toy {
  Matrix x;
  std::vector<int> y;
};

// Two features; label is x0 + x1 > 1.
Toy separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Toy t{Matrix(static_cast<Eigen::Index>(n), 2), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    t.x(static_cast<Eigen::Index>(i), 0) = a;
    t.x(static_cast<Eigen::Index>(i), 1) = b;
    t.y.push_back(a + b > 1.0 ? 1 : 0);
  }
  return t;
}

std::size_t depth(const gbdt::Tree& t, int node = 0) {
  const auto& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.feature < 0) return 0;
  return 1 + std::max(depth(t, n.left), depth(t, n.right));
}

double accuracy(const std::vector<double>& p, const std::vector<int>& y) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < p.size(); ++i) ok += (p[i] >= 0.5) == (y[i] == 1);
  return static_cast<double>(ok) / static_cast<double>(p.size());
}

}  // namespace

TEST(Fit, AxisAlignedToyIsLearnedPerfectly) {
  // A single threshold separates the classes; one split per tree suffices.
  Rng rng(1);
  Matrix x(400, 2);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < 400; ++i) {
    x(i, 0) = rng.uniform();
    x(i, 1) = rng.uniform();
    y.push_back(x(i, 0) > 0.4 ? 1 : 0);
  }
  const auto m = gbdt::fit(x, y);
  EXPECT_GE(accuracy(gbdt::predict(m, x), y), 0.99);
}

TEST(Fit, LinearlySeparableToyTrainingAccuracy) {
  const Toy t = separable(1000, 2);
  gbdt::BoostConfig cfg;
  cfg.rounds = 300;
  cfg.max_depth = 4;
  cfg.learning_rate = 0.3;
  cfg.max_candidates = 256;
  const auto m = gbdt::fit(t.x, t.y, cfg);
  EXPECT_GE(accuracy(gbdt::predict(m, t.x), t.y), 0.99);
}

TEST(Fit, RejectsSingleClass) {
  const Toy t = separable(50, 3);
  try {
    gbdt::fit(t.x, std::vector<int>(50, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::experiment);
  }
}

TEST(Fit, ZeroRoundsPredictsPrior) {
  Toy t = separable(40, 4);
  for (std::size_t i = 0; i < t.y.size(); ++i) t.y[i] = i % 2;
  gbdt::BoostConfig cfg;
  cfg.rounds = 0;
  const auto m = gbdt::fit(t.x, t.y, cfg);
  EXPECT_TRUE(m.trees.empty());
  for (double p : gbdt::predict(m, t.x)) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(Fit, StructureAndDeterminism) {
  const Toy t = separable(300, 5);
  const auto a = gbdt::fit(t.x, t.y);
  const auto b = gbdt::fit(t.x, t.y);
  EXPECT_EQ(a.trees.size(), 50u);
  EXPECT_EQ(gbdt::dump(a), gbdt::dump(b));
  for (const auto& tree : a.trees) {
    EXPECT_LE(depth(tree), 3u);
    for (const auto& n : tree.nodes) EXPECT_LT(n.feature, 2);
  }
}

TEST(Fit, TrainingLossNeverIncreases) {
  Toy t = separable(500, 6);
  Rng rng(6);
  for (auto& y : t.y) {
    if (rng.uniform() < 0.15) y = 1 - y;  // label noise
  }
  const auto m = gbdt::fit(t.x, t.y);
  std::vector<double> score(t.y.size(), m.initial_log_odds);
  double prev = gbdt::logistic_loss(score, t.y);
  for (const auto& tree : m.trees) {
    for (std::size_t i = 0; i < score.size(); ++i) {
      score[i] += m.learning_rate * tree.eval(t.x.row(static_cast<Eigen::Index>(i)).data());
    }
    const double cur = gbdt::logistic_loss(score, t.y);
    EXPECT_LE(cur, prev + 1e-12);
    prev = cur;
  }
}

TEST(Predict, MonotoneFeatureGivesMonotoneProbabilities) {
  Matrix x(200, 1);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < 200; ++i) {
    x(i, 0) = static_cast<double>(i) / 200.0;
    y.push_back(i >= 120 ? 1 : 0);
  }
  const auto m = gbdt::fit(x, y);
  const auto p = gbdt::predict(m, x);
  for (std::size_t i = 1; i < p.size(); ++i) EXPECT_GE(p[i] + 1e-12, p[i - 1]);
  for (double v : p) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_THROW(gbdt::predict(m, Matrix(2, 3)), Error);
}

TEST(Metrics, PerfectAllNegativeAndHandCase) {
  const std::vector<int> y{1, 0, 1, 1, 0, 0, 1, 0, 0, 1};
  std::vector<double> perfect;
  for (int v : y) perfect.push_back(v);
  const auto m1 = gbdt::metrics(perfect, y);
  EXPECT_EQ(m1.precision, 1.0);
  EXPECT_EQ(m1.recall, 1.0);
  EXPECT_EQ(m1.f1, 1.0);

  const auto m0 = gbdt::metrics(std::vector<double>(10, 0.1), y);
  EXPECT_EQ(m0.precision, 0.0);
  EXPECT_EQ(m0.recall, 0.0);
  EXPECT_EQ(m0.f1, 0.0);

  // Predicted positive at 0,1,2,5,9 -> tp 3 (0,2,9), fp 2 (1,5), fn 2 (3,6).
  const std::vector<double> p{0.9, 0.6, 0.5, 0.4, 0.2, 0.7, 0.3, 0.1, 0.0, 0.8};
  const auto m = gbdt::metrics(p, y);
  EXPECT_DOUBLE_EQ(m.precision, 0.6);
  EXPECT_DOUBLE_EQ(m.recall, 0.6);
  EXPECT_DOUBLE_EQ(m.f1, 0.6);
  const auto m2 = gbdt::metrics(p, y, 0.65);  // positives 0,5,9 -> tp 2, fp 1, fn 3
  EXPECT_DOUBLE_EQ(m2.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m2.recall, 0.4);
  EXPECT_NEAR(m2.f1, 2 * (2.0 / 3.0) * 0.4 / (2.0 / 3.0 + 0.4), 1e-12);
}

TEST(CandidateThresholds, MidpointsAndCap) {
  const auto c = gbdt::detail::candidate_thresholds({3, 1, 2, 2, 1}, 32);
  EXPECT_EQ(c, (std::vector<double>{1.5, 2.5}));
  std::vector<double> many;
  for (int i = 0; i < 1000; ++i) many.push_back(i);
  EXPECT_LE(gbdt::detail::candidate_thresholds(many, 32).size(), 32u);
  EXPECT_TRUE(gbdt::detail::candidate_thresholds({4, 4, 4}, 32).empty());
}
