#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "kgroups/classifiers.hpp"
#include "kgroups/errors.hpp"
#include "kgroups/forest.hpp"
#include "synthetic.hpp"

using namespace kgroups;

namespace {

// Same toy table as the hand-traced importance test.
Dataset toy() { return synth::from_columns({{1, 2, 3, 4, 5, 6}, {0, 0, 3, 0, 2, 1}}, {0, 1, 1, 0, 1, 0}, 2); }

Matrix points(const std::vector<std::pair<double, double>>& xy) {
  Matrix m(xy.size(), 2);
  for (std::size_t r = 0; r < xy.size(); ++r) {
    m(r, 0) = xy[r].first;
    m(r, 1) = xy[r].second;
  }
  return m;
}

}  // namespace

TEST_CASE("gini index") {
  const std::vector<double> balanced{3, 3}, pure{0, 4}, three{1, 1, 2};
  CHECK(gini_index(balanced, 6) == doctest::Approx(0.5));
  CHECK(gini_index(pure, 4) == 0.0);
  CHECK(gini_index(three, 4) == doctest::Approx(1.0 - (1.0 + 1.0 + 4.0) / 16.0));
}

TEST_CASE("max_features default is floor(sqrt(p)), at least 1") {
  ForestParams fp;
  CHECK(fp.resolved_max_features(1) == 1);
  CHECK(fp.resolved_max_features(3) == 1);
  CHECK(fp.resolved_max_features(2000) == 44);
  fp.max_features = 50;
  CHECK(fp.resolved_max_features(10) == 10);
}

TEST_CASE("hand-traced tree predictions") {
  // Tree: f1 <= 1.5 ? (f0 <= 3 ? (f0 <= 1.5 ? 0 : 1) : 0) : 1
  const auto d = toy();
  ForestParams fp;
  fp.n_trees = 1;
  fp.bootstrap = false;
  fp.max_features = 2;
  const auto test = points({{4, 0}, {1, 3}, {2, 0}, {1, 0}, {10, 1.4}, {0, 1.6}});
  const auto pred = rf_classify(d.features, d.labels, 2, test, fp);
  CHECK(pred == std::vector<ClassId>{0, 1, 1, 0, 0, 1});

  RandomForest forest(fp);
  forest.fit(d.features, d.labels, 2);
  const auto& nodes = forest.trees()[0].nodes();
  CHECK(nodes.size() == 7);
  // A fully grown tree reproduces its training labels.
  CHECK(forest.predict(d.features) == d.labels);
}

TEST_CASE("single tree with a pure region predicts that region's class") {
  const auto d = synth::from_columns({{0, 0.1, 0.2, 5, 5.1, 5.2}}, {1, 1, 1, 0, 0, 0}, 2);
  ForestParams fp;
  fp.n_trees = 1;
  fp.bootstrap = false;
  Matrix test(2, 1);
  test(0, 0) = 0.15;
  test(1, 0) = 4.0;
  CHECK(rf_classify(d.features, d.labels, 2, test, fp) == std::vector<ClassId>{1, 0});
}

TEST_CASE("forest predictions and importances are deterministic for a seed") {
  Rng rng(12);
  const auto d = synth::random_dataset(rng, 70, 10, 3);
  ForestParams fp;
  fp.n_trees = 20;
  fp.seed = 99;
  RandomForest a(fp), b(fp);
  a.fit(d.features, d.labels, 3);
  b.fit(d.features, d.labels, 3);
  CHECK(a.predict(d.features) == b.predict(d.features));
  CHECK(a.raw_importance() == b.raw_importance());
  fp.seed = 100;
  RandomForest c(fp);
  c.fit(d.features, d.labels, 3);
  CHECK(c.raw_importance() != a.raw_importance());
}

TEST_CASE("raw importance equals the sum of per-split decreases") {
  Rng rng(13);
  const auto d = synth::random_dataset(rng, 50, 6, 2);
  ForestParams fp;
  fp.n_trees = 1;
  fp.bootstrap = false;
  fp.max_features = 6;
  RandomForest forest(fp);
  forest.fit(d.features, d.labels, 2);
  // With no bootstrap, a fully grown tree explains all root impurity:
  // sum of weighted decreases == G(root).
  std::vector<double> counts(2, 0.0);
  for (const auto y : d.labels) counts[static_cast<std::size_t>(y)] += 1.0;
  const double root = gini_index(counts, static_cast<double>(d.n_rows()));
  const auto& imp = forest.raw_importance();
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  // Exact duplicate rows with different labels would leave impurity behind.
  bool clashes = false;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    for (std::size_t j = i + 1; j < d.n_rows(); ++j) {
      bool same = d.labels[i] != d.labels[j];
      for (std::size_t c = 0; same && c < d.n_cols(); ++c) same = d.features(i, c) == d.features(j, c);
      clashes = clashes || same;
    }
  }
  if (!clashes) CHECK(total == doctest::Approx(root).epsilon(1e-12));
  CHECK(total <= root + 1e-12);
}

TEST_CASE("constant features are never split on") {
  const auto d = synth::from_columns({{2, 2, 2, 2, 2, 2}, {1, 2, 3, 4, 5, 6}}, {0, 0, 0, 1, 1, 1}, 2);
  ForestParams fp;
  fp.n_trees = 10;
  fp.max_features = 1;
  RandomForest forest(fp);
  forest.fit(d.features, d.labels, 2);
  CHECK(forest.raw_importance()[0] == 0.0);
  CHECK(forest.raw_importance()[1] > 0.0);
}

TEST_CASE("forest argument errors") {
  const auto d = toy();
  ForestParams fp;
  fp.n_trees = 0;
  RandomForest forest(fp);
  CHECK_THROWS_AS(forest.fit(d.features, d.labels, 2), InvalidArgument);
}

TEST_CASE("min_samples_split stops growth") {
  const auto d = toy();
  ForestParams fp;
  fp.n_trees = 1;
  fp.bootstrap = false;
  fp.max_features = 2;
  fp.min_samples_split = 7;
  RandomForest forest(fp);
  forest.fit(d.features, d.labels, 2);
  CHECK(forest.trees()[0].nodes().size() == 1);
  // Balanced root: the vote tie goes to class 0.
  CHECK(forest.predict(d.features) == std::vector<ClassId>(6, 0));
}
