#pragma once

#include <span>
#include <vector>

#include "kgroups/classifiers.hpp"
#include "kgroups/dataset.hpp"

namespace kgroups {

/// Fraction of positions where prediction and truth agree.
double accuracy(std::span<const ClassId> pred, std::span<const ClassId> truth);

/// counts[actual][predicted].
struct ConfusionCounts {
  std::vector<std::vector<std::size_t>> counts;

  static ConfusionCounts from(std::span<const ClassId> pred, std::span<const ClassId> truth, std::size_t n_classes);

  [[nodiscard]] std::size_t total() const;
  // One-vs-rest counts with `positive` as the positive class.
  [[nodiscard]] std::size_t tp(ClassId positive) const;
  [[nodiscard]] std::size_t tn(ClassId positive) const;
  [[nodiscard]] std::size_t fp(ClassId positive) const;
  [[nodiscard]] std::size_t fn(ClassId positive) const;
  [[nodiscard]] double accuracy() const;
};

struct CvOptions {
  ClassifierParams classifier_params;
  /// Fit scaling on each fold's training rows instead of trusting the input.
  bool scale_per_fold = false;
};

struct CvResult {
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;  // population sd over folds
  std::vector<double> fold_accuracies;
  double cpu_seconds = 0.0;
};

/// Trains on out-of-fold rows restricted to `selected` columns and scores the
/// in-fold rows, fold by fold. Random forests use a per-fold seed derived
/// from the forest seed, so the result does not depend on evaluation order.
CvResult cross_validate(const Dataset& d, std::span<const std::size_t> selected, Classifier classifier,
                        const FoldPlan& folds, const CvOptions& options = {});

/// Accuracy of one fold; exposed so folds can be evaluated in any order.
double evaluate_fold(const Dataset& d, std::span<const std::size_t> selected, Classifier classifier,
                     const FoldPlan& folds, std::size_t fold, const CvOptions& options = {});

/// Mean and population sd.
std::pair<double, double> mean_and_sd(std::span<const double> values);

}  // namespace kgroups
