#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "frailwatch/classifiers.hpp"
#include "frailwatch/rng.hpp"

namespace frailwatch {

namespace {

// Thresholds are training values and splits test "x <= v", so tree routing
// depends only on the ordering of values, never on midpoints. That keeps
// predictions invariant under strictly monotone per-feature transforms.
struct TreeBuilder {
  const Problem& problem;
  const RfParams& params;
  Rng rng;
  int mtry;
  std::vector<RandomForest::Node>& nodes;

  int leaf(const std::vector<std::size_t>& idx) {
    int counts[2] = {0, 0};
    for (std::size_t i : idx) counts[problem.y[i]] += 1;
    RandomForest::Node node;
    node.label = counts[1] >= counts[0] ? 1 : 0;
    nodes.push_back(node);
    return static_cast<int>(nodes.size() - 1);
  }

  static double gini(int c0, int c1) {
    double n = c0 + c1;
    if (n <= 0) return 0;
    double p0 = c0 / n, p1 = c1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
  }

  int build(std::vector<std::size_t> idx, int depth) {
    int counts[2] = {0, 0};
    for (std::size_t i : idx) counts[problem.y[i]] += 1;
    bool pure = counts[0] == 0 || counts[1] == 0;
    bool depth_limit = params.max_depth > 0 && depth >= params.max_depth;
    if (pure || depth_limit || idx.size() < 2) return leaf(idx);

    const int d = static_cast<int>(problem.cols());
    std::vector<int> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    for (int i = 0; i < mtry && i < d; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(feats[i], feats[pick(rng)]);
    }

    const double parent_impurity = gini(counts[0], counts[1]);
    double best_gain = 0;
    int best_feature = -1;
    double best_threshold = 0;

    std::vector<std::pair<double, int>> vals;
    vals.reserve(idx.size());
    for (int fi = 0; fi < mtry && fi < d; ++fi) {
      int f = feats[fi];
      vals.clear();
      for (std::size_t i : idx) vals.emplace_back(problem.x[i][f], problem.y[i]);
      std::sort(vals.begin(), vals.end());

      int left[2] = {0, 0};
      const double n = static_cast<double>(idx.size());
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left[vals[i].second] += 1;
        if (vals[i].first == vals[i + 1].first) continue;  // not a boundary
        int right0 = counts[0] - left[0], right1 = counts[1] - left[1];
        double nl = static_cast<double>(i + 1), nr = n - nl;
        double child = (nl / n) * gini(left[0], left[1]) +
                       (nr / n) * gini(right0, right1);
        double gain = parent_impurity - child;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = f;
          best_threshold = vals[i].first;
        }
      }
    }

    if (best_feature < 0) return leaf(idx);

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      if (problem.x[i][best_feature] <= best_threshold)
        left_idx.push_back(i);
      else
        right_idx.push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) return leaf(idx);

    RandomForest::Node node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    nodes.push_back(node);
    int self = static_cast<int>(nodes.size() - 1);
    int l = build(std::move(left_idx), depth + 1);
    int r = build(std::move(right_idx), depth + 1);
    nodes[self].left = l;
    nodes[self].right = r;
    return self;
  }
};

}  // namespace

int RandomForest::Tree::predict(std::span<const double> x) const {
  int n = 0;
  while (nodes[n].feature >= 0) {
    n = x[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
  }
  return nodes[n].label;
}

RandomForest::RandomForest(const RfParams& params, std::uint64_t seed,
                           const Problem& problem) {
  const std::size_t n = problem.rows();
  const int d = static_cast<int>(problem.cols());
  if (n == 0 || d == 0) throw std::invalid_argument("random forest: empty problem");
  if (params.n_trees < 1) throw std::invalid_argument("random forest: n_trees < 1");

  int mtry = params.features_per_split > 0
                 ? params.features_per_split
                 : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  mtry = std::min(mtry, d);

  trees_.resize(params.n_trees);
  std::vector<std::vector<std::uint8_t>> in_bag(params.n_trees,
                                                std::vector<std::uint8_t>(n, 0));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> idx;
    idx.reserve(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t s = pick(rng);
        idx.push_back(s);
        in_bag[t][s] = 1;
      }
    } else {
      idx.resize(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::fill(in_bag[t].begin(), in_bag[t].end(), 1);
    }
    TreeBuilder builder{problem, params, std::move(rng), mtry, trees_[t].nodes};
    builder.build(std::move(idx), 0);
  }

  // Out-of-bag accuracy: vote over the trees that never saw each sample.
  std::size_t scored = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int votes[2] = {0, 0};
    for (int t = 0; t < params.n_trees; ++t) {
      if (in_bag[t][i]) continue;
      votes[trees_[t].predict(problem.x[i])] += 1;
    }
    if (votes[0] + votes[1] == 0) continue;
    int pred = votes[1] >= votes[0] ? 1 : 0;
    ++scored;
    if (pred == problem.y[i]) ++correct;
  }
  oob_accuracy_ = scored > 0 ? static_cast<double>(correct) / scored : 0.0;
}

int RandomForest::predict(std::span<const double> x, int,
                          const EnvObservation*) const {
  int votes[2] = {0, 0};
  for (const auto& tree : trees_) votes[tree.predict(x)] += 1;
  return votes[1] >= votes[0] ? 1 : 0;
}

}  // namespace frailwatch
