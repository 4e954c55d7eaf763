#include "kgroups/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgroups/cpu_timer.hpp"
#include "kgroups/errors.hpp"

namespace kgroups {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::KBEST: return "KBEST";
    case Algorithm::MRMR_D: return "MRMR_D";
    case Algorithm::MRMR_Q: return "MRMR_Q";
    case Algorithm::KGROUPS: return "KGROUPS";
  }
  return "?";
}

nlohmann::json SelectionResult::to_json(const Dataset* d) const {
  nlohmann::json j;
  j["algorithm"] = to_string(algorithm);
  j["estimator"] = to_string(estimator);
  j["selected"] = selected;
  if (d != nullptr) {
    std::vector<std::string> names;
    names.reserve(selected.size());
    for (const auto i : selected) names.push_back(d->feature_names.at(i));
    j["selected_names"] = names;
  }
  j["requested_k"] = requested_k;
  j["n_selected"] = selected.size();
  j["hyperparams"] = hyperparams;
  j["cpu_time_seconds"] = cpu_time_seconds;
  return j;
}

namespace {

void check_k(std::size_t k, std::size_t n_cols) {
  if (k == 0) throw InvalidArgument("k must be positive");
  if (k > n_cols) {
    throw InvalidArgument("k = " + std::to_string(k) + " exceeds the number of features (" +
                          std::to_string(n_cols) + ")");
  }
}

}  // namespace

SelectionResult select_kbest(const RelevanceVector& rel, std::size_t k) {
  CpuTimer timer(CpuScope::Thread);
  const auto& v = rel.values;
  check_k(k, v.size());
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return v[a] > v[b] || (v[a] == v[b] && a < b); });
  order.resize(k);

  SelectionResult out;
  out.algorithm = Algorithm::KBEST;
  out.estimator = rel.estimator;
  out.selected = std::move(order);
  out.requested_k = k;
  out.cpu_time_seconds = timer.elapsed();
  return out;
}

nlohmann::json MrmrOptions::to_json() const {
  return {{"form", form == MrmrForm::DIFFERENCE ? "DIFFERENCE" : "QUOTIENT"},
          {"redundancy", to_string(redundancy)},
          {"beta", beta},
          {"mean_normalized", mean_normalized},
          {"quotient_epsilon", quotient_epsilon},
          {"mi_bins", mi_bins}};
}

SelectionResult select_mrmr(const Dataset& d, const RelevanceVector& rel, std::size_t k, const MrmrOptions& options,
                            RedundancyCache* cache, std::vector<double>* step_cpu_seconds) {
  CpuTimer timer(CpuScope::Thread);
  const auto& v = rel.values;
  const std::size_t n = v.size();
  check_k(k, n);
  if (n != d.n_cols()) throw InvalidArgument("relevance vector does not match the dataset");
  if (options.beta < 0.0 || options.beta > 1.0) throw InvalidArgument("beta must lie in [0, 1]");

  std::optional<RedundancyCache> local;
  if (cache == nullptr) {
    local.emplace(options.redundancy, options.mi_bins);
    cache = &*local;
  } else if (cache->measure() != options.redundancy || cache->mi_bins() != options.mi_bins) {
    throw InvalidArgument("redundancy cache does not match the requested measure");
  }
  if (step_cpu_seconds != nullptr) step_cpu_seconds->clear();

  std::vector<std::size_t> selected;
  selected.reserve(k);
  std::vector<bool> taken(n, false);
  std::vector<double> redundancy_sum(n, 0.0);

  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] > v[first]) first = i;
  }
  selected.push_back(first);
  taken[first] = true;
  if (step_cpu_seconds != nullptr) step_cpu_seconds->push_back(timer.elapsed());

  while (selected.size() < k) {
    const std::size_t last = selected.back();
    const auto set_size = static_cast<double>(selected.size());
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      redundancy_sum[i] += cache->get(d, i, last);
      const double red = options.mean_normalized ? redundancy_sum[i] / set_size : redundancy_sum[i];
      const double score = options.form == MrmrForm::DIFFERENCE
                               ? v[i] - options.beta * red
                               : v[i] / std::max(red, options.quotient_epsilon);
      if (best == n || score > best_score) {
        best = i;
        best_score = score;
      }
    }
    selected.push_back(best);
    taken[best] = true;
    if (step_cpu_seconds != nullptr) step_cpu_seconds->push_back(timer.elapsed());
  }

  SelectionResult out;
  out.algorithm = options.form == MrmrForm::DIFFERENCE ? Algorithm::MRMR_D : Algorithm::MRMR_Q;
  out.estimator = rel.estimator;
  out.selected = std::move(selected);
  out.requested_k = k;
  out.hyperparams = options.to_json();
  out.cpu_time_seconds = timer.elapsed();
  return out;
}

std::size_t BinningScheme::non_empty_bins() const {
  const auto counts = bin_counts();
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

std::vector<std::size_t> BinningScheme::bin_counts() const {
  std::vector<std::size_t> counts(k, 0);
  for (const auto a : assignments) {
    if (a != kNoCluster) ++counts[a];
  }
  return counts;
}

BinningScheme compute_bins(std::span<const double> relevance, std::size_t k, double alpha) {
  if (k == 0) throw InvalidArgument("number of bins must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be a positive finite number");
  if (relevance.empty()) throw InvalidArgument("cannot bin an empty relevance vector");

  BinningScheme b;
  b.k = k;
  b.alpha = alpha;
  const auto [lo, hi] = std::minmax_element(relevance.begin(), relevance.end());
  b.rel_min = *lo;
  b.rel_max = *hi;
  b.edges.resize(k);
  const double range = b.rel_max - b.rel_min;
  for (std::size_t j = 1; j <= k; ++j) {
    const double u = static_cast<double>(j) / static_cast<double>(k);
    b.edges[j - 1] = std::min(b.rel_min + range * std::pow(u, alpha), b.rel_max);
  }
  b.edges[k - 1] = b.rel_max;

  b.assignments.resize(relevance.size());
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    const double r = relevance[i];
    if (!std::isfinite(r)) {
      b.assignments[i] = kNoCluster;
    } else if (b.rel_min == b.rel_max) {
      b.assignments[i] = 0;
    } else {
      b.assignments[i] = static_cast<std::size_t>(std::lower_bound(b.edges.begin(), b.edges.end(), r) - b.edges.begin());
    }
  }
  return b;
}

bool scores_tie(double a, double b, double reference) {
  return std::abs(a - b) <= kTieEps * std::max(1.0, std::abs(reference));
}

double TieBreakerScores::get(Estimator estimator, std::size_t col) {
  {
    std::lock_guard lock(mutex_);
    auto& slot = scores_[estimator];
    if (slot.empty()) slot.resize(dataset_.n_cols());
    if (slot.at(col)) return *slot[col];
  }
  if (estimator == Estimator::GINI) {
    const auto all = gini_importance(dataset_, params_.forest);
    std::lock_guard lock(mutex_);
    auto& slot = scores_[estimator];
    for (std::size_t c = 0; c < all.values.size(); ++c) slot[c] = all.values[c];
    evaluations_ += all.values.size();
    return *slot[col];
  }
  const double value = column_relevance(dataset_, col, estimator, params_);
  std::lock_guard lock(mutex_);
  scores_[estimator][col] = value;
  ++evaluations_;
  return value;
}

std::size_t TieBreakerScores::evaluations() const {
  std::lock_guard lock(mutex_);
  return evaluations_;
}

nlohmann::json KGroupsOptions::to_json() const {
  std::vector<std::string> names;
  for (const auto e : tie_breakers) names.emplace_back(to_string(e));
  return {{"alpha", alpha}, {"tie_breakers", names}, {"bin_smoothing", bin_smoothing}, {"params", params.to_json()}};
}

SelectionResult select_kgroups(const Dataset& d, const RelevanceVector& rel, std::size_t k,
                               const KGroupsOptions& options, TieBreakerScores* scores,
                               std::vector<ClusterTrace>* trace) {
  CpuTimer timer(CpuScope::Thread);
  if (options.bin_smoothing) {
    throw NotImplemented("bin size smoothing is not implemented: its formula is unspecified");
  }
  const auto& v = rel.values;
  if (v.size() != d.n_cols()) throw InvalidArgument("relevance vector does not match the dataset");

  std::optional<TieBreakerScores> local;
  if (scores == nullptr) {
    local.emplace(d, options.params);
    scores = &*local;
  }

  const BinningScheme bins = compute_bins(v, k, options.alpha);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (bins.assignments[i] != kNoCluster) members[bins.assignments[i]].push_back(i);
  }
  if (trace != nullptr) trace->clear();

  std::vector<std::size_t> selected;
  std::vector<double> tb_values;
  for (std::size_t c = 0; c < k; ++c) {
    const auto& group = members[c];
    if (group.empty()) continue;
    double top = v[group.front()];
    for (const auto i : group) top = std::max(top, v[i]);
    std::vector<std::size_t> survivors;
    for (const auto i : group) {
      if (scores_tie(v[i], top, top)) survivors.push_back(i);
    }
    ClusterTrace ct{c, {survivors}};

    for (const auto breaker : options.tie_breakers) {
      if (survivors.size() <= 1) break;
      tb_values.clear();
      for (const auto i : survivors) tb_values.push_back(scores->get(breaker, i));
      const double best = *std::max_element(tb_values.begin(), tb_values.end());
      std::vector<std::size_t> kept;
      for (std::size_t s = 0; s < survivors.size(); ++s) {
        if (scores_tie(tb_values[s], best, best)) kept.push_back(survivors[s]);
      }
      survivors = std::move(kept);
      ct.rounds.push_back(survivors);
    }
    selected.insert(selected.end(), survivors.begin(), survivors.end());
    if (trace != nullptr) trace->push_back(std::move(ct));
  }
  std::sort(selected.begin(), selected.end(),
            [&](std::size_t a, std::size_t b) { return v[a] > v[b] || (v[a] == v[b] && a < b); });

  SelectionResult out;
  out.algorithm = Algorithm::KGROUPS;
  out.estimator = rel.estimator;
  out.selected = std::move(selected);
  out.requested_k = k;
  out.hyperparams = options.to_json();
  out.cpu_time_seconds = timer.elapsed();
  return out;
}

}  // namespace kgroups
