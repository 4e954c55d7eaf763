#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgroups/classifiers.hpp"
#include "kgroups/relevance.hpp"
#include "kgroups/selectors.hpp"

namespace kgroups {

/// One selection configuration evaluated by the sweep: KBest, one mRMR
/// instantiation (MID, MIQ, FCD, FCQ, RFCQ, ...) or KGroups at one alpha.
struct SelectorVariant {
  Algorithm algorithm = Algorithm::KBEST;
  MrmrForm form = MrmrForm::DIFFERENCE;
  Redundancy redundancy = Redundancy::MI_PAIR;
  double alpha = 1.0;
  bool mean_normalized = true;

  /// "KBEST", "MID", "RFCQ", "alpha=0.3", ...
  [[nodiscard]] std::string name(Estimator estimator) const;
};

/// Short family name used for grouping in reports: KBEST, MRMR or KGROUPS.
std::string algorithm_family(Algorithm a);

struct SweepConfig {
  std::vector<std::filesystem::path> datasets;
  std::string label_col;  // empty: last column
  std::vector<Estimator> estimators{Estimator::MI, Estimator::FVALUE, Estimator::GINI};
  std::vector<std::string> algorithms{"kbest", "mrmr", "kgroups"};
  std::size_t k_min = 2;
  std::size_t k_max = 100;
  std::vector<double> alpha_grid{0.3, 0.5, 0.7, 1.0, 1.3, 1.5, 1.7};
  std::map<Estimator, std::vector<Estimator>> tie_breaker_map{
      {Estimator::MI, {Estimator::COSINE}},
      {Estimator::FVALUE, {Estimator::MI}},
      {Estimator::GINI, {Estimator::MI}},
      {Estimator::COSINE, {Estimator::MI}}};
  /// mRMR forms per relevance estimator; Gini relevance only has the quotient form.
  std::map<Estimator, std::vector<MrmrForm>> mrmr_forms{
      {Estimator::MI, {MrmrForm::DIFFERENCE, MrmrForm::QUOTIENT}},
      {Estimator::FVALUE, {MrmrForm::DIFFERENCE, MrmrForm::QUOTIENT}},
      {Estimator::GINI, {MrmrForm::QUOTIENT}},
      {Estimator::COSINE, {MrmrForm::DIFFERENCE, MrmrForm::QUOTIENT}}};
  double beta = 1.0;
  bool mean_normalized = true;
  std::vector<Classifier> classifiers{Classifier::KNN, Classifier::GAUSSIAN_NB, Classifier::RANDOM_FOREST};
  std::size_t n_folds = 5;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";
  std::size_t mi_bins = 10;
  std::size_t n_trees = 100;
  std::size_t knn_neighbors = 5;
  bool scale = true;
  bool scale_per_fold = false;
  bool select_per_fold = false;
  bool bin_smoothing = false;
  /// 0: KGROUPS_WORKERS env var, else hardware concurrency.
  std::size_t workers = 0;

  static SweepConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
  /// Values that affect results, echoed into every record.
  [[nodiscard]] nlohmann::json effective_echo() const;
  void validate() const;

  [[nodiscard]] RelevanceParams relevance_params() const;
  [[nodiscard]] ClassifierParams classifier_params() const;
  /// Variants the sweep runs for one relevance estimator.
  [[nodiscard]] std::vector<SelectorVariant> variants(Estimator estimator) const;
  [[nodiscard]] std::size_t resolved_workers() const;
};

Redundancy default_redundancy(Estimator relevance);

struct BenchmarkRecord {
  std::string dataset;
  std::string algorithm;  // KBEST | MRMR | KGROUPS
  std::string variant;
  std::string estimator;
  std::string classifier;
  std::size_t k = 0;
  std::optional<double> alpha;
  std::size_t n_selected = 0;
  std::vector<std::size_t> selected;
  double cv_mean_accuracy = 0.0;
  double cv_sd = 0.0;
  std::vector<double> fold_accuracies;
  double relevance_cpu_seconds = 0.0;
  double selection_cpu_seconds = 0.0;
  double training_cpu_seconds = 0.0;
  /// Only filled when selection is repeated on every fold's training rows.
  std::vector<std::size_t> n_selected_per_fold;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();

  /// Identity of the cell; used to skip finished cells when resuming.
  [[nodiscard]] std::string key() const;
  [[nodiscard]] nlohmann::json to_json() const;
  static BenchmarkRecord from_json(const nlohmann::json& j);
};

struct SweepStats {
  std::size_t relevance_computations = 0;
  std::size_t cells_total = 0;
  std::size_t cells_skipped = 0;
  std::size_t cells_run = 0;
  std::size_t datasets_failed = 0;
  std::size_t k_min = 0;
  std::size_t k_max = 0;
};

using RecordSink = std::function<void(const BenchmarkRecord&)>;

/// Closed-form number of cells for one dataset and the (clamped) k range.
std::size_t cells_per_dataset(const SweepConfig& config, std::size_t k_min, std::size_t k_max);

/// Runs every (dataset, estimator, variant, k, classifier) cell whose key is
/// not in `completed`, handing records to `sink` in a fixed cell order.
/// Relevance vectors and tie-breaker scores are built once per (dataset,
/// estimator) and shared by all k and alpha; each mRMR variant keeps one
/// redundancy cache and one greedy run for its whole k range.
SweepStats run_sweep(const SweepConfig& config, const RecordSink& sink, const std::set<std::string>& completed = {});

/// Reads a JSON-lines record file; a missing file yields no records.
std::vector<BenchmarkRecord> read_records(const std::filesystem::path& path);

}  // namespace kgroups
