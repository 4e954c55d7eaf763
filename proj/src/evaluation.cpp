#include "kgroups/evaluation.hpp"

#include <cmath>

#include "kgroups/cpu_timer.hpp"
#include "kgroups/errors.hpp"
#include "kgroups/rng.hpp"

namespace kgroups {

double accuracy(std::span<const ClassId> pred, std::span<const ClassId> truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("prediction and truth lengths differ");
  if (pred.empty()) throw InvalidArgument("accuracy of an empty prediction");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

ConfusionCounts ConfusionCounts::from(std::span<const ClassId> pred, std::span<const ClassId> truth,
                                      std::size_t n_classes) {
  if (pred.size() != truth.size()) throw InvalidArgument("prediction and truth lengths differ");
  ConfusionCounts cc;
  cc.counts.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++cc.counts.at(static_cast<std::size_t>(truth[i])).at(static_cast<std::size_t>(pred[i]));
  }
  return cc;
}

std::size_t ConfusionCounts::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) {
    for (const auto c : row) t += c;
  }
  return t;
}

std::size_t ConfusionCounts::tp(ClassId positive) const {
  const auto p = static_cast<std::size_t>(positive);
  return counts[p][p];
}

std::size_t ConfusionCounts::fp(ClassId positive) const {
  const auto p = static_cast<std::size_t>(positive);
  std::size_t s = 0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (a != p) s += counts[a][p];
  }
  return s;
}

std::size_t ConfusionCounts::fn(ClassId positive) const {
  const auto p = static_cast<std::size_t>(positive);
  std::size_t s = 0;
  for (std::size_t q = 0; q < counts.size(); ++q) {
    if (q != p) s += counts[p][q];
  }
  return s;
}

std::size_t ConfusionCounts::tn(ClassId positive) const { return total() - tp(positive) - fp(positive) - fn(positive); }

double ConfusionCounts::accuracy() const {
  std::size_t diag = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) diag += counts[c][c];
  const auto t = total();
  return t == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(t);
}

std::pair<double, double> mean_and_sd(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

double evaluate_fold(const Dataset& d, std::span<const std::size_t> selected, Classifier classifier,
                     const FoldPlan& folds, std::size_t fold, const CvOptions& options) {
  if (selected.empty()) throw InvalidArgument("cross-validation needs at least one selected feature");
  if (folds.assignments.size() != d.n_rows()) throw InvalidArgument("fold plan does not match the dataset");
  const auto train = folds.train_rows(fold);
  const auto test = folds.test_rows(fold);
  if (test.empty()) throw InvalidArgument("empty fold");
  if (train.empty()) throw InvalidArgument("fold leaves no training rows");

  Matrix train_x = d.features.subset(train, selected);
  Matrix test_x = d.features.subset(test, selected);
  if (options.scale_per_fold) {
    const auto factors = ScalingFactors::fit(train_x);
    factors.apply(train_x);
    factors.apply(test_x);
  }
  std::vector<ClassId> train_y, test_y;
  for (const auto r : train) train_y.push_back(d.labels[r]);
  for (const auto r : test) test_y.push_back(d.labels[r]);

  ClassifierParams params = options.classifier_params;
  params.forest.seed = mix_seed(params.forest.seed, fold);
  const auto pred = classify(classifier, train_x, train_y, d.n_classes(), test_x, params);
  return accuracy(pred, test_y);
}

CvResult cross_validate(const Dataset& d, std::span<const std::size_t> selected, Classifier classifier,
                        const FoldPlan& folds, const CvOptions& options) {
  CpuTimer timer(CpuScope::Thread);
  CvResult out;
  for (std::size_t f = 0; f < folds.n_folds; ++f) {
    out.fold_accuracies.push_back(evaluate_fold(d, selected, classifier, folds, f, options));
  }
  const auto [mean, sd] = mean_and_sd(out.fold_accuracies);
  out.mean_accuracy = mean;
  out.sd_accuracy = sd;
  out.cpu_seconds = timer.elapsed();
  return out;
}

}  // namespace kgroups
