#include "kgroups/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "kgroups/errors.hpp"

namespace kgroups {

std::size_t ForestParams::resolved_max_features(std::size_t n_cols) const {
  const std::size_t m =
      max_features ? *max_features : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_cols))));
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(n_cols, 1));
}

double gini_index(std::span<const double> class_counts, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (const double c : class_counts) sum_sq += (c / total) * (c / total);
  return 1.0 - sum_sq;
}

namespace {

ClassId argmax_class(std::span<const double> counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return static_cast<ClassId>(best);
}

// Equal-impurity splits on different features go to the feature whose
// values at the node's rows compare lexicographically smaller, so the tree
// does not depend on column order.
bool column_precedes(std::span<const double> a, std::span<const double> b, const std::vector<std::size_t>& rows) {
  for (const std::size_t r : rows) {
    if (a[r] != b[r]) return a[r] < b[r];
  }
  return false;
}

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double weighted_child_impurity = 0.0;  // n_left * G(left) + n_right * G(right)
};

}  // namespace

void DecisionTree::fit(const Matrix& x, std::span<const ClassId> y, std::size_t n_classes,
                       std::vector<std::size_t> samples, std::size_t max_features, std::size_t min_samples_split,
                       Rng& rng, std::span<double> importance) {
  if (samples.empty()) throw InvalidArgument("cannot grow a tree on zero samples");
  nodes_.clear();
  const std::size_t n_features = x.cols();
  const auto total = static_cast<double>(samples.size());

  std::vector<std::size_t> feature_pool(n_features);
  std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
  std::vector<std::pair<double, ClassId>> sorted;
  std::vector<double> counts(n_classes), left_counts(n_classes), right_counts(n_classes);

  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  nodes_.emplace_back();
  stack.push_back({0, std::move(samples)});

  while (!stack.empty()) {
    Pending work = std::move(stack.back());
    stack.pop_back();
    const auto& rows = work.rows;
    const auto m = static_cast<double>(rows.size());

    std::fill(counts.begin(), counts.end(), 0.0);
    for (const std::size_t r : rows) counts[static_cast<std::size_t>(y[r])] += 1.0;
    nodes_[work.node].majority = argmax_class(counts);
    const double node_impurity = gini_index(counts, m);
    if (node_impurity <= 0.0 || rows.size() < min_samples_split) continue;

    Split best;
    std::size_t examined = 0;
    // Partial Fisher-Yates over a persistent pool: each node draws features
    // without replacement, skipping constant ones, until max_features
    // non-constant features have been examined.
    for (std::size_t i = 0; i < n_features && examined < max_features; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, n_features - i));
      std::swap(feature_pool[i], feature_pool[j]);
      const std::size_t f = feature_pool[i];

      const auto col = x.column(f);
      sorted.clear();
      for (const std::size_t r : rows) sorted.emplace_back(col[r], y[r]);
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;
      ++examined;

      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      right_counts = counts;
      for (std::size_t t = 0; t + 1 < sorted.size(); ++t) {
        const auto cls = static_cast<std::size_t>(sorted[t].second);
        left_counts[cls] += 1.0;
        right_counts[cls] -= 1.0;
        if (!(sorted[t].first < sorted[t + 1].first)) continue;
        const auto n_left = static_cast<double>(t + 1);
        const double n_right = m - n_left;
        const double weighted =
            n_left * gini_index(left_counts, n_left) + n_right * gini_index(right_counts, n_right);
        const bool wins = !best.found || weighted < best.weighted_child_impurity ||
                          (weighted == best.weighted_child_impurity && f != best.feature &&
                           column_precedes(col, x.column(best.feature), rows));
        if (wins) {
          best.found = true;
          best.feature = f;
          best.weighted_child_impurity = weighted;
          double threshold = 0.5 * (sorted[t].first + sorted[t + 1].first);
          if (!(threshold < sorted[t + 1].first)) threshold = sorted[t].first;
          best.threshold = threshold;
        }
      }
    }
    if (!best.found) continue;

    const double decrease = m * node_impurity - best.weighted_child_impurity;
    if (!importance.empty()) importance[best.feature] += decrease / total;

    std::vector<std::size_t> left_rows, right_rows;
    const auto col = x.column(best.feature);
    for (const std::size_t r : rows) (col[r] <= best.threshold ? left_rows : right_rows).push_back(r);

    const auto left_id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    Node& node = nodes_[work.node];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left_id;
    node.right = left_id + 1;
    stack.push_back({static_cast<std::size_t>(left_id + 1), std::move(right_rows)});
    stack.push_back({static_cast<std::size_t>(left_id), std::move(left_rows)});
  }
}

ClassId DecisionTree::predict(const Matrix& x, std::size_t row) const {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const Node& n = nodes_[id];
    id = static_cast<std::size_t>(x(row, n.feature) <= n.threshold ? n.left : n.right);
  }
  return nodes_[id].majority;
}

void RandomForest::fit(const Matrix& x, std::span<const ClassId> y, std::size_t n_classes) {
  if (params_.n_trees == 0) throw InvalidArgument("forest needs at least one tree");
  if (x.rows() == 0) throw InvalidArgument("cannot fit a forest on zero rows");
  n_classes_ = n_classes;
  trees_.assign(params_.n_trees, DecisionTree{});
  importance_.assign(x.cols(), 0.0);
  const std::size_t max_features = params_.resolved_max_features(x.cols());
  const std::size_t n = x.rows();

  for (std::size_t t = 0; t < params_.n_trees; ++t) {
    Rng rng(mix_seed(params_.seed, t));
    std::vector<std::size_t> samples(n);
    if (params_.bootstrap) {
      for (auto& s : samples) s = static_cast<std::size_t>(uniform_index(rng, n));
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    trees_[t].fit(x, y, n_classes, std::move(samples), max_features, params_.min_samples_split, rng, importance_);
  }
  for (double& v : importance_) v /= static_cast<double>(params_.n_trees);
}

std::vector<ClassId> RandomForest::predict(const Matrix& x) const {
  std::vector<ClassId> out(x.rows());
  std::vector<std::size_t> votes(n_classes_);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict(x, r))];
    out[r] = static_cast<ClassId>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

}  // namespace kgroups
