#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "kgroups/dataset.hpp"
#include "kgroups/forest.hpp"

namespace kgroups {

enum class Estimator { MI, FVALUE, GINI, COSINE };

std::string_view to_string(Estimator e);
/// Accepts the canonical upper-case names and lower-case CLI spellings.
Estimator parse_estimator(std::string_view name);

struct RelevanceParams {
  std::size_t mi_bins = 10;
  // Zero within-class variance with nonzero between-class variance.
  double fvalue_cap = 1e30;
  ForestParams forest;

  [[nodiscard]] nlohmann::json to_json() const;
};

struct RelevanceVector {
  Estimator estimator = Estimator::MI;
  std::vector<double> values;
  std::string dataset_ref;
  nlohmann::json params = nlohmann::json::object();

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Column mapped to compact integer levels 0..n_levels-1.
struct Discretized {
  std::vector<std::int32_t> codes;
  std::size_t n_levels = 0;
};

/// Equal-frequency discretization into at most `bins` levels. Equal values
/// always share a level; a column with <= bins distinct values keeps one
/// level per distinct value.
Discretized discretize(std::span<const double> values, std::size_t bins);

/// Plug-in mutual information (nats) from the empirical joint frequencies of
/// two discrete variables of equal length.
double plugin_mutual_information(const Discretized& a, const Discretized& b);

double mutual_info_with_label(const Dataset& d, std::size_t col, std::size_t bins);

/// One-way ANOVA F statistic of the column grouped by class.
double f_value_with_label(const Dataset& d, std::size_t col, double cap = 1e30);

/// |x . y| / (|x| |y|) with y the integer-encoded labels; 0 for a zero norm.
double cosine_with_label(const Dataset& d, std::size_t col);

/// Mean decrease in impurity of a random forest, normalized to sum 1 (all
/// zeros if no tree ever split).
RelevanceVector gini_importance(const Dataset& d, const ForestParams& forest);

/// Single-column score for every estimator except GINI, which is not per-column.
double column_relevance(const Dataset& d, std::size_t col, Estimator estimator, const RelevanceParams& params);

RelevanceVector relevance_all(const Dataset& d, Estimator estimator, const RelevanceParams& params = {});

enum class Redundancy { MI_PAIR, ABS_PEARSON };

std::string_view to_string(Redundancy r);
Redundancy parse_redundancy(std::string_view name);

/// |Pearson correlation|; 0 when either column is constant.
double abs_pearson(std::span<const double> x, std::span<const double> y);

/// Uncached pairwise redundancy. Always evaluated as (min(i,j), max(i,j)) so
/// the value is bitwise symmetric. Throws InvalidArgument when i == j.
double pair_redundancy(const Dataset& d, std::size_t i, std::size_t j, Redundancy measure, std::size_t mi_bins);

/// Lazily filled symmetric memo of pairwise redundancy values. Safe for
/// concurrent use; concurrent inserts of the same pair store identical values.
class RedundancyCache {
 public:
  explicit RedundancyCache(Redundancy measure, std::size_t mi_bins = 10) : measure_(measure), mi_bins_(mi_bins) {}

  [[nodiscard]] Redundancy measure() const noexcept { return measure_; }
  [[nodiscard]] std::size_t mi_bins() const noexcept { return mi_bins_; }
  [[nodiscard]] std::size_t size() const;
  /// Number of values actually computed (cache misses).
  [[nodiscard]] std::size_t computed() const;

  double get(const Dataset& d, std::size_t i, std::size_t j);

 private:
  Redundancy measure_;
  std::size_t mi_bins_;
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, double> entries_;
  std::size_t computed_ = 0;
};

double pairwise_redundancy(const Dataset& d, std::size_t i, std::size_t j, Redundancy measure,
                           RedundancyCache& cache);

}  // namespace kgroups
