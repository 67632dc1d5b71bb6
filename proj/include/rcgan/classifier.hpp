#pragma once

// Small gradient-boosted decision trees for binary classification
// (logistic loss). Only the fidelity experiment uses it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rcgan/data.hpp"
#include "rcgan/error.hpp"
#include "rcgan/nn.hpp"
#include "rcgan/text.hpp"

namespace rcgan::gbdt {

struct BoostConfig {
  std::size_t rounds = 50;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  std::size_t min_leaf = 5;
  std::size_t max_candidates = 32;  // split thresholds per feature
};

struct TreeNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double eval(const double* x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
};

struct BoostedModel {
  std::vector<Tree> trees;
  double learning_rate = 0.1;
  double initial_log_odds = 0.0;
  std::size_t width = 0;

  double raw_score(const double* x) const {
    double s = initial_log_odds;
    for (const auto& t : trees) s += learning_rate * t.eval(x);
    return s;
  }
};

inline double logistic_loss(const std::vector<double>& score, const std::vector<int>& y) {
  double l = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    // log(1 + e^{-s}) for y=1, log(1 + e^{s}) for y=0, computed stably
    const double s = y[i] ? -score[i] : score[i];
    l += s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  }
  return l / static_cast<double>(y.size());
}

namespace detail {

// Midpoints between consecutive distinct values; when there are more than
// `cap`, the midpoints just above `cap` evenly spaced data quantiles.
inline std::vector<double> candidate_thresholds(std::vector<double> values, std::size_t cap) {
  std::sort(values.begin(), values.end());
  std::vector<double> distinct;
  for (double v : values) {
    if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
  }
  std::vector<double> mids;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) mids.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  if (mids.size() <= cap) return mids;

  std::vector<double> out;
  const auto n = values.size();
  for (std::size_t j = 1; j <= cap; ++j) {
    const double q = values[std::min(n - 1, j * n / (cap + 1))];
    auto it = std::upper_bound(mids.begin(), mids.end(), q);
    if (it == mids.end()) --it;
    if (out.empty() || *it != out.back()) out.push_back(*it);
  }
  return out;
}

struct Fitter {
  const Matrix& x;
  const BoostConfig& cfg;
  std::vector<std::vector<double>> thresholds;  // per feature
  std::vector<std::vector<std::uint8_t>> bins;  // per feature, per row: #thresholds below value

  Fitter(const Matrix& features, const BoostConfig& c) : x(features), cfg(c) {
    const auto p = static_cast<std::size_t>(x.cols());
    const auto n = static_cast<std::size_t>(x.rows());
    thresholds.resize(p);
    bins.resize(p);
    for (std::size_t f = 0; f < p; ++f) {
      std::vector<double> col(n);
      for (std::size_t r = 0; r < n; ++r) col[r] = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f));
      thresholds[f] = candidate_thresholds(col, cfg.max_candidates);
      bins[f].resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        bins[f][r] = static_cast<std::uint8_t>(
            std::lower_bound(thresholds[f].begin(), thresholds[f].end(), col[r]) - thresholds[f].begin());
      }
    }
  }

  // Regression tree on `target` (negative gradients) with greedy
  // variance-reduction splits. Leaf values come from `leaf_value`.
  template <class LeafValue>
  Tree grow(const std::vector<double>& target, LeafValue&& leaf_value) const {
    Tree tree;
    std::vector<std::size_t> all(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    build(tree, all, 0, target, leaf_value);
    return tree;
  }

 private:
  template <class LeafValue>
  int build(Tree& tree, const std::vector<std::size_t>& rows, std::size_t depth, const std::vector<double>& target,
            LeafValue& leaf_value) const {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    int best_f = -1;
    std::size_t best_t = 0;
    double best_gain = 0.0;
    if (depth < cfg.max_depth && rows.size() >= 2 * cfg.min_leaf) {
      double total = 0.0;
      for (auto r : rows) total += target[r];
      const double n = static_cast<double>(rows.size());
      const double base = total * total / n;
      std::vector<double> sum;
      std::vector<std::size_t> cnt;
      for (std::size_t f = 0; f < thresholds.size(); ++f) {
        const auto k = thresholds[f].size();
        if (k == 0) continue;
        sum.assign(k + 1, 0.0);
        cnt.assign(k + 1, 0);
        for (auto r : rows) {
          sum[bins[f][r]] += target[r];
          ++cnt[bins[f][r]];
        }
        // Split after threshold t: left holds bins 0..t.
        double ls = 0.0;
        std::size_t lc = 0;
        for (std::size_t t = 0; t < k; ++t) {
          ls += sum[t];
          lc += cnt[t];
          const std::size_t rc = rows.size() - lc;
          if (lc < cfg.min_leaf || rc < cfg.min_leaf) continue;
          const double rs = total - ls;
          const double gain = ls * ls / static_cast<double>(lc) + rs * rs / static_cast<double>(rc) - base;
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best_f = static_cast<int>(f);
            best_t = t;
          }
        }
      }
    }

    if (best_f < 0) {
      tree.nodes[static_cast<std::size_t>(id)].value = leaf_value(rows);
      return id;
    }
    std::vector<std::size_t> left, right;
    const auto& b = bins[static_cast<std::size_t>(best_f)];
    for (auto r : rows) (b[r] <= best_t ? left : right).push_back(r);
    const int l = build(tree, left, depth + 1, target, leaf_value);
    const int rr = build(tree, right, depth + 1, target, leaf_value);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_f;
    node.threshold = thresholds[static_cast<std::size_t>(best_f)][best_t];
    node.left = l;
    node.right = rr;
    return id;
  }
};

}  // namespace detail

// Logistic-loss boosting. Each round fits a tree to the residuals y - p;
// leaf values are damped Newton steps Σr / Σp(1-p), halved until the
// leaf's own loss does not increase, so training loss never goes up.
inline BoostedModel fit(const Matrix& features, const std::vector<int>& labels, const BoostConfig& cfg = {}) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(Errc::structural, "feature rows and labels differ in length");
  }
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(Errc::usage, "labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos < 2 || neg < 2) {
    throw Error(Errc::experiment, "training labels need at least two samples per class (got " + std::to_string(pos) +
                                      " positive, " + std::to_string(neg) + " negative)");
  }

  BoostedModel model;
  model.learning_rate = cfg.learning_rate;
  model.width = static_cast<std::size_t>(features.cols());
  model.initial_log_odds = std::log(static_cast<double>(pos) / static_cast<double>(neg));

  const std::size_t n = labels.size();
  std::vector<double> score(n, model.initial_log_odds), prob(n), resid(n);
  detail::Fitter fitter(features, cfg);

  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = nn::sigmoid(score[i]);
      resid[i] = static_cast<double>(labels[i]) - prob[i];
    }
    auto leaf_value = [&](const std::vector<std::size_t>& rows) {
      double num = 0.0, den = 0.0;
      for (auto r : rows) {
        num += resid[r];
        den += prob[r] * (1.0 - prob[r]);
      }
      double v = num / std::max(den, 1e-12);
      const auto leaf_loss = [&](double step) {
        double l = 0.0;
        for (auto r : rows) {
          const double s0 = score[r] + cfg.learning_rate * step;
          const double s = labels[r] ? -s0 : s0;
          l += s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
        }
        return l;
      };
      const double before = leaf_loss(0.0);
      for (int k = 0; k < 60 && leaf_loss(v) > before; ++k) v *= 0.5;
      return leaf_loss(v) > before ? 0.0 : v;
    };
    Tree tree = fitter.grow(resid, leaf_value);
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += cfg.learning_rate * tree.eval(features.row(static_cast<Eigen::Index>(i)).data());
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

inline std::vector<double> predict(const BoostedModel& model, const Matrix& features) {
  if (static_cast<std::size_t>(features.cols()) != model.width) {
    throw Error(Errc::structural, "feature width " + std::to_string(features.cols()) + " does not match model width " +
                                      std::to_string(model.width));
  }
  std::vector<double> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    out[static_cast<std::size_t>(r)] = nn::sigmoid(model.raw_score(features.row(r).data()));
  }
  return out;
}

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Positive class: probability >= threshold. Zero denominators yield 0.
inline Metrics metrics(const std::vector<double>& prob, const std::vector<int>& labels, double threshold = 0.5) {
  if (prob.size() != labels.size()) throw Error(Errc::structural, "predictions and labels differ in length");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const bool pred = prob[i] >= threshold;
    if (pred && labels[i]) ++tp;
    if (pred && !labels[i]) ++fp;
    if (!pred && labels[i]) ++fn;
  }
  Metrics m;
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision + m.recall > 0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

// Debug dump: one line per node.
inline std::string dump(const BoostedModel& model) {
  std::string out = "initial_log_odds=" + text::format_double(model.initial_log_odds) +
                    "\nlearning_rate=" + text::format_double(model.learning_rate) +
                    "\ntrees=" + std::to_string(model.trees.size()) + "\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    for (std::size_t i = 0; i < model.trees[t].nodes.size(); ++i) {
      const auto& n = model.trees[t].nodes[i];
      out += "tree=" + std::to_string(t) + " node=" + std::to_string(i);
      if (n.feature < 0) {
        out += " leaf=" + text::format_double(n.value) + "\n";
      } else {
        out += " feature=" + std::to_string(n.feature) + " threshold=" + text::format_double(n.threshold) +
               " left=" + std::to_string(n.left) + " right=" + std::to_string(n.right) + "\n";
      }
    }
  }
  return out;
}

}  // namespace rcgan::gbdt
