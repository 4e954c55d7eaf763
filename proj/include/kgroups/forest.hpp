#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kgroups/dataset.hpp"
#include "kgroups/matrix.hpp"
#include "kgroups/rng.hpp"

namespace kgroups {

struct ForestParams {
  std::size_t n_trees = 100;
  /// Features examined per split; unset means floor(sqrt(n_cols)), at least 1.
  std::optional<std::size_t> max_features;
  std::size_t min_samples_split = 2;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t resolved_max_features(std::size_t n_cols) const;
};

/// CART classification tree grown with the Gini index, no depth limit.
class DecisionTree {
 public:
  struct Node {
    // Internal nodes send x[feature] <= threshold to `left`.
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    ClassId majority = 0;

    [[nodiscard]] bool is_leaf() const noexcept { return left < 0; }
  };

  /// Grows the tree on the rows listed in `samples` (repeats allowed; this is
  /// how bootstrap multiplicity enters). When `importance` is non-null, adds
  /// each split's weighted impurity decrease
  ///   (n_node / N) * G(node) - (n_left / N) * G(left) - (n_right / N) * G(right)
  /// to the split feature's slot, with N = samples.size().
  void fit(const Matrix& x, std::span<const ClassId> y, std::size_t n_classes,
           std::vector<std::size_t> samples, std::size_t max_features, std::size_t min_samples_split,
           Rng& rng, std::span<double> importance = {});

  [[nodiscard]] ClassId predict(const Matrix& x, std::size_t row) const;
  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<Node> nodes_;
};

/// Gini index 1 - sum_c p_c^2 of a class-count histogram.
double gini_index(std::span<const double> class_counts, double total);

class RandomForest {
 public:
  explicit RandomForest(ForestParams params) : params_(params) {}

  /// Trees are seeded independently from params.seed, so the forest is a
  /// deterministic function of (x, y, params).
  void fit(const Matrix& x, std::span<const ClassId> y, std::size_t n_classes);

  /// Majority vote over trees; ties go to the smaller class id.
  [[nodiscard]] std::vector<ClassId> predict(const Matrix& x) const;

  /// Per-feature impurity decrease summed over each tree's splits, averaged
  /// over trees. Not normalized.
  [[nodiscard]] const std::vector<double>& raw_importance() const noexcept { return importance_; }

  [[nodiscard]] const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 private:
  ForestParams params_;
  std::size_t n_classes_ = 0;
  std::vector<DecisionTree> trees_;
  std::vector<double> importance_;
};

}  // namespace kgroups
