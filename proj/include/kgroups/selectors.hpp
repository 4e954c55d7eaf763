#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgroups/dataset.hpp"
#include "kgroups/relevance.hpp"

namespace kgroups {

enum class Algorithm { KBEST, MRMR_D, MRMR_Q, KGROUPS };

std::string_view to_string(Algorithm a);

struct SelectionResult {
  Algorithm algorithm = Algorithm::KBEST;
  Estimator estimator = Estimator::MI;
  std::vector<std::size_t> selected;
  std::size_t requested_k = 0;
  nlohmann::json hyperparams = nlohmann::json::object();
  double cpu_time_seconds = 0.0;

  [[nodiscard]] nlohmann::json to_json(const Dataset* d = nullptr) const;
};

/// Top-k by relevance, descending; equal scores keep ascending index order.
SelectionResult select_kbest(const RelevanceVector& rel, std::size_t k);

enum class MrmrForm { DIFFERENCE, QUOTIENT };

struct MrmrOptions {
  MrmrForm form = MrmrForm::DIFFERENCE;
  Redundancy redundancy = Redundancy::MI_PAIR;
  double beta = 1.0;
  /// Divide the redundancy sum by |S| (MID/MIQ/FCD/FCQ); off gives MIFS.
  bool mean_normalized = true;
  double quotient_epsilon = 1e-12;
  std::size_t mi_bins = 10;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Greedy forward search. The first pick is argmax relevance; each later pick
/// maximizes Rel - beta * Red (DIFFERENCE) or Rel / max(Red, eps) (QUOTIENT)
/// over the unselected features, ties to the lower index.
///
/// Pairwise redundancies go through `cache` (a private one is used when null),
/// so a cache shared across calls only needs each pair once. When
/// `step_cpu_seconds` is given it receives the cumulative selection CPU time
/// after each pick; together with prefix-consistency of the greedy order this
/// lets a single k_max run stand in for every smaller k.
SelectionResult select_mrmr(const Dataset& d, const RelevanceVector& rel, std::size_t k, const MrmrOptions& options,
                            RedundancyCache* cache = nullptr, std::vector<double>* step_cpu_seconds = nullptr);

inline constexpr std::size_t kNoCluster = std::numeric_limits<std::size_t>::max();

/// Power-law relevance bins. Edge j (1-based) sits at
///   rel_min + (rel_max - rel_min) * (j / k)^alpha,
/// and a feature belongs to the first bin whose edge is >= its relevance
/// (the first bin is closed at rel_min).
struct BinningScheme {
  std::size_t k = 0;
  double alpha = 1.0;
  double rel_min = 0.0;
  double rel_max = 0.0;
  std::vector<double> edges;
  std::vector<std::size_t> assignments;

  [[nodiscard]] std::size_t non_empty_bins() const;
  [[nodiscard]] std::vector<std::size_t> bin_counts() const;
};

BinningScheme compute_bins(std::span<const double> relevance, std::size_t k, double alpha);
inline BinningScheme compute_bins(const RelevanceVector& rel, std::size_t k, double alpha) {
  return compute_bins(rel.values, k, alpha);
}

/// Relative tolerance for deciding two scores are tied.
inline constexpr double kTieEps = 1e-12;
bool scores_tie(double a, double b, double reference);

/// Lazily computed per-column scores for tie-breaking, shareable across
/// KGroups runs on the same dataset. GINI is computed for all columns at once.
class TieBreakerScores {
 public:
  TieBreakerScores(const Dataset& d, RelevanceParams params) : dataset_(d), params_(std::move(params)) {}

  double get(Estimator estimator, std::size_t col);
  [[nodiscard]] std::size_t evaluations() const;

 private:
  const Dataset& dataset_;
  RelevanceParams params_;
  mutable std::mutex mutex_;
  std::map<Estimator, std::vector<std::optional<double>>> scores_;
  std::size_t evaluations_ = 0;
};

struct KGroupsOptions {
  double alpha = 1.0;
  std::vector<Estimator> tie_breakers;
  RelevanceParams params;
  /// Reserved: selecting it throws NotImplemented.
  bool bin_smoothing = false;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Survivor sets of one cluster's tie-breaking: rounds[0] holds the features
/// tied at the cluster's maximal relevance, rounds[r] those left after the
/// r-th tie-breaker.
struct ClusterTrace {
  std::size_t cluster = 0;
  std::vector<std::vector<std::size_t>> rounds;
};

/// Picks the maximal-relevance feature of every non-empty bin, breaking ties
/// with each tie-breaker in turn. Survivors of an exhausted tie-breaker list
/// are all returned. Output is ordered by descending relevance.
SelectionResult select_kgroups(const Dataset& d, const RelevanceVector& rel, std::size_t k,
                               const KGroupsOptions& options, TieBreakerScores* scores = nullptr,
                               std::vector<ClusterTrace>* trace = nullptr);

}  // namespace kgroups
