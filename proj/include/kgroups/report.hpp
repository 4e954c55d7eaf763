#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgroups/sweep.hpp"

namespace kgroups {

/// Best cell of one (dataset, estimator, algorithm family) over every k,
/// variant and classifier. Equal accuracies go to the smallest k, then the
/// fewest selected features, then variant and classifier name.
struct BestOverall {
  std::string dataset, estimator, algorithm;
  BenchmarkRecord best;
};

/// Best cell per classifier within one (dataset, estimator, algorithm family).
struct BestPerClassifier {
  std::string dataset, estimator, algorithm, classifier;
  BenchmarkRecord best;
};

/// Mean of the per-classifier best accuracies. `sd_across_classifiers` is the
/// population sd of those bests; `mean_fold_sd` averages each best cell's own
/// sd over CV folds. The two are different dispersion notions.
struct AverageBest {
  std::string dataset, estimator, algorithm;
  double mean_accuracy = 0.0;
  double sd_across_classifiers = 0.0;
  double mean_fold_sd = 0.0;
  std::size_t n_classifiers = 0;
};

/// Head-to-head tally of two algorithm families over datasets, for one
/// estimator. Accuracies are compared as percentages rounded to 2 decimals.
struct WinDraw {
  std::string basis;  // "overall" or "average"
  std::string estimator, algorithm_a, algorithm_b;
  std::size_t wins_a = 0, wins_b = 0, draws = 0;
};

struct Report {
  std::vector<BestOverall> best_overall;
  std::vector<BestPerClassifier> best_per_classifier;
  std::vector<AverageBest> average_best;
  std::vector<WinDraw> tallies;
};

/// True when accuracies agree at the 2-decimal percentage precision.
bool draw_at_table_precision(double a, double b);

/// Ordering used to pick a best cell: higher accuracy first, then the
/// tie-breaking rules documented on BestOverall.
bool better_cell(const BenchmarkRecord& a, const BenchmarkRecord& b);

Report best_config_report(const std::vector<BenchmarkRecord>& records);

/// Writes best_overall.csv, best_per_classifier.csv, average_best.csv and
/// win_draw.csv into `dir`.
void write_report(const Report& report, const std::filesystem::path& dir);

/// Boxplot-ready long table: the n_selected of each classifier's best cell.
void write_nselected_plotdata(const Report& report, std::ostream& out);

}  // namespace kgroups
