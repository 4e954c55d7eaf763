#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "kgroups/dataset.hpp"
#include "kgroups/forest.hpp"
#include "kgroups/matrix.hpp"

namespace kgroups {

enum class Classifier { KNN, GAUSSIAN_NB, RANDOM_FOREST };

std::string_view to_string(Classifier c);
Classifier parse_classifier(std::string_view name);

struct ClassifierParams {
  std::size_t knn_neighbors = 5;
  ForestParams forest;
};

/// Euclidean k-nearest-neighbour majority vote. Equal distances prefer the
/// lower training row; equal votes the smaller class id. `k_neighbors` is
/// clamped to the number of training rows.
std::vector<ClassId> knn_classify(const Matrix& train_x, std::span<const ClassId> train_y, std::size_t n_classes,
                                  const Matrix& test_x, std::size_t k_neighbors = 5);

/// Gaussian naive Bayes with per-class feature means and population
/// variances. Variances are floored at 1e-9 times the largest per-feature
/// training variance. Classes absent from training are never predicted.
class GaussianNB {
 public:
  void fit(const Matrix& x, std::span<const ClassId> y, std::size_t n_classes);
  /// Unnormalized log posterior log p(c) + sum_f log N(x_f; mu_cf, var_cf).
  [[nodiscard]] std::vector<double> log_posteriors(const Matrix& x, std::size_t row) const;
  [[nodiscard]] std::vector<ClassId> predict(const Matrix& x) const;

  [[nodiscard]] double variance_floor() const noexcept { return var_floor_; }

 private:
  std::size_t n_classes_ = 0;
  std::size_t n_features_ = 0;
  std::vector<double> log_prior_;  // -inf for absent classes
  std::vector<double> mean_;       // class-major: [c * n_features + f]
  std::vector<double> var_;
  double var_floor_ = 0.0;
};

std::vector<ClassId> gaussian_nb_classify(const Matrix& train_x, std::span<const ClassId> train_y,
                                          std::size_t n_classes, const Matrix& test_x);

std::vector<ClassId> rf_classify(const Matrix& train_x, std::span<const ClassId> train_y, std::size_t n_classes,
                                 const Matrix& test_x, const ForestParams& forest);

std::vector<ClassId> classify(Classifier classifier, const Matrix& train_x, std::span<const ClassId> train_y,
                              std::size_t n_classes, const Matrix& test_x, const ClassifierParams& params);

}  // namespace kgroups
