#pragma once

// Deliberately naive reference implementations of the selectors. They share
// only the scalar estimators with the library, never its selection code.

#include <vector>

#include "kgroups/dataset.hpp"
#include "kgroups/relevance.hpp"
#include "kgroups/selectors.hpp"

namespace kgroups::oracle {

/// Full stable sort, descending.
std::vector<std::size_t> kbest(const std::vector<double>& relevance, std::size_t k);

/// Greedy mRMR that recomputes every candidate's redundancy against the whole
/// selected set at every step, with no caching.
std::vector<std::size_t> mrmr(const Dataset& d, const std::vector<double>& relevance, std::size_t k,
                              const MrmrOptions& options);

struct Bins {
  std::vector<double> edges;
  std::vector<std::size_t> assignments;
};

/// Bin edges from the power formula and cluster membership by scanning every
/// interval (lower bound open, except the first which is closed at the min).
Bins bins(const std::vector<double>& relevance, std::size_t k, double alpha);

/// KGroups over oracle::bins, tie-breaking by direct per-column estimation.
std::vector<std::size_t> kgroups(const Dataset& d, const std::vector<double>& relevance, std::size_t k, double alpha,
                                 const std::vector<Estimator>& tie_breakers, const RelevanceParams& params);

/// Plug-in MI straight from a contingency table of counts.
double contingency_mi(const std::vector<std::vector<double>>& counts);

}  // namespace kgroups::oracle
