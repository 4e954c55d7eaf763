#include "kgroups/classifiers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "kgroups/errors.hpp"

namespace kgroups {

std::string_view to_string(Classifier c) {
  switch (c) {
    case Classifier::KNN: return "KNeighbors";
    case Classifier::GAUSSIAN_NB: return "GaussianNB";
    case Classifier::RANDOM_FOREST: return "RandomForest";
  }
  return "?";
}

Classifier parse_classifier(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "knn" || lower == "kneighbors") return Classifier::KNN;
  if (lower == "gnb" || lower == "gaussiannb" || lower == "nb") return Classifier::GAUSSIAN_NB;
  if (lower == "rf" || lower == "randomforest") return Classifier::RANDOM_FOREST;
  throw InvalidArgument("unknown classifier '" + std::string(name) + "'");
}

namespace {

void check_train(const Matrix& train_x, std::span<const ClassId> train_y, const Matrix& test_x) {
  if (train_x.rows() == 0) throw InvalidArgument("empty training set");
  if (train_y.size() != train_x.rows()) throw InvalidArgument("training labels do not match training rows");
  if (test_x.cols() != train_x.cols()) throw InvalidArgument("test and training feature counts differ");
}

}  // namespace

std::vector<ClassId> knn_classify(const Matrix& train_x, std::span<const ClassId> train_y, std::size_t n_classes,
                                  const Matrix& test_x, std::size_t k_neighbors) {
  check_train(train_x, train_y, test_x);
  if (k_neighbors == 0) throw InvalidArgument("k_neighbors must be positive");
  const std::size_t n_train = train_x.rows();
  const std::size_t k = std::min(k_neighbors, n_train);

  std::vector<ClassId> out(test_x.rows());
  std::vector<double> dist(n_train);
  std::vector<std::size_t> order(n_train);
  std::vector<std::size_t> votes(n_classes);
  for (std::size_t r = 0; r < test_x.rows(); ++r) {
    std::fill(dist.begin(), dist.end(), 0.0);
    for (std::size_t c = 0; c < train_x.cols(); ++c) {
      const double q = test_x(r, c);
      const auto col = train_x.column(c);
      for (std::size_t t = 0; t < n_train; ++t) dist[t] += (col[t] - q) * (col[t] - q);
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(train_y[order[i]])];
    out[r] = static_cast<ClassId>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

void GaussianNB::fit(const Matrix& x, std::span<const ClassId> y, std::size_t n_classes) {
  if (x.rows() == 0) throw InvalidArgument("empty training set");
  if (y.size() != x.rows()) throw InvalidArgument("training labels do not match training rows");
  n_classes_ = n_classes;
  n_features_ = x.cols();
  std::vector<double> count(n_classes, 0.0);
  for (const auto c : y) count[static_cast<std::size_t>(c)] += 1.0;

  const auto n = static_cast<double>(x.rows());
  log_prior_.assign(n_classes, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (count[c] > 0.0) log_prior_[c] = std::log(count[c] / n);
  }

  mean_.assign(n_classes * n_features_, 0.0);
  var_.assign(n_classes * n_features_, 0.0);
  double max_var = 0.0;
  for (std::size_t f = 0; f < n_features_; ++f) {
    const auto col = x.column(f);
    double overall = 0.0;
    for (std::size_t r = 0; r < col.size(); ++r) {
      mean_[static_cast<std::size_t>(y[r]) * n_features_ + f] += col[r];
      overall += col[r];
    }
    overall /= n;
    double overall_ss = 0.0;
    for (const double v : col) overall_ss += (v - overall) * (v - overall);
    max_var = std::max(max_var, overall_ss / n);
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (count[c] > 0.0) mean_[c * n_features_ + f] /= count[c];
    }
    for (std::size_t r = 0; r < col.size(); ++r) {
      const auto idx = static_cast<std::size_t>(y[r]) * n_features_ + f;
      var_[idx] += (col[r] - mean_[idx]) * (col[r] - mean_[idx]);
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (count[c] > 0.0) var_[c * n_features_ + f] /= count[c];
    }
  }
  var_floor_ = max_var > 0.0 ? 1e-9 * max_var : 1e-9;
  for (double& v : var_) v = std::max(v, var_floor_);
}

std::vector<double> GaussianNB::log_posteriors(const Matrix& x, std::size_t row) const {
  std::vector<double> out(n_classes_);
  for (std::size_t c = 0; c < n_classes_; ++c) {
    if (std::isinf(log_prior_[c])) {
      out[c] = log_prior_[c];
      continue;
    }
    double lp = log_prior_[c];
    for (std::size_t f = 0; f < n_features_; ++f) {
      const double var = var_[c * n_features_ + f];
      const double dev = x(row, f) - mean_[c * n_features_ + f];
      lp -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + dev * dev / var);
    }
    out[c] = lp;
  }
  return out;
}

std::vector<ClassId> GaussianNB::predict(const Matrix& x) const {
  if (x.cols() != n_features_) throw InvalidArgument("test and training feature counts differ");
  std::vector<ClassId> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto lp = log_posteriors(x, r);
    out[r] = static_cast<ClassId>(std::max_element(lp.begin(), lp.end()) - lp.begin());
  }
  return out;
}

std::vector<ClassId> gaussian_nb_classify(const Matrix& train_x, std::span<const ClassId> train_y,
                                          std::size_t n_classes, const Matrix& test_x) {
  check_train(train_x, train_y, test_x);
  GaussianNB nb;
  nb.fit(train_x, train_y, n_classes);
  return nb.predict(test_x);
}

std::vector<ClassId> rf_classify(const Matrix& train_x, std::span<const ClassId> train_y, std::size_t n_classes,
                                 const Matrix& test_x, const ForestParams& forest) {
  check_train(train_x, train_y, test_x);
  RandomForest rf(forest);
  rf.fit(train_x, train_y, n_classes);
  return rf.predict(test_x);
}

std::vector<ClassId> classify(Classifier classifier, const Matrix& train_x, std::span<const ClassId> train_y,
                              std::size_t n_classes, const Matrix& test_x, const ClassifierParams& params) {
  switch (classifier) {
    case Classifier::KNN: return knn_classify(train_x, train_y, n_classes, test_x, params.knn_neighbors);
    case Classifier::GAUSSIAN_NB: return gaussian_nb_classify(train_x, train_y, n_classes, test_x);
    case Classifier::RANDOM_FOREST: return rf_classify(train_x, train_y, n_classes, test_x, params.forest);
  }
  throw InvalidArgument("unknown classifier");
}

}  // namespace kgroups
