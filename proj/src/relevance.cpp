#include "kgroups/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgroups/errors.hpp"

namespace kgroups {

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::MI: return "MI";
    case Estimator::FVALUE: return "FVALUE";
    case Estimator::GINI: return "GINI";
    case Estimator::COSINE: return "COSINE";
  }
  return "?";
}

Estimator parse_estimator(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "MI") return Estimator::MI;
  if (upper == "FVALUE" || upper == "F") return Estimator::FVALUE;
  if (upper == "GINI") return Estimator::GINI;
  if (upper == "COSINE" || upper == "COS") return Estimator::COSINE;
  throw InvalidArgument("unknown estimator '" + std::string(name) + "'");
}

std::string_view to_string(Redundancy r) { return r == Redundancy::MI_PAIR ? "MI_PAIR" : "ABS_PEARSON"; }

Redundancy parse_redundancy(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "MI_PAIR" || upper == "MI") return Redundancy::MI_PAIR;
  if (upper == "ABS_PEARSON" || upper == "PEARSON") return Redundancy::ABS_PEARSON;
  throw InvalidArgument("unknown redundancy measure '" + std::string(name) + "'");
}

nlohmann::json RelevanceParams::to_json() const {
  nlohmann::json j;
  j["mi_bins"] = mi_bins;
  j["fvalue_cap"] = fvalue_cap;
  j["forest"] = {{"n_trees", forest.n_trees},
                 {"max_features", forest.max_features ? nlohmann::json(*forest.max_features) : nlohmann::json("sqrt")},
                 {"min_samples_split", forest.min_samples_split},
                 {"bootstrap", forest.bootstrap},
                 {"seed", forest.seed}};
  return j;
}

Discretized discretize(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("bins must be positive");
  const std::size_t n = values.size();
  Discretized out;
  out.codes.assign(n, 0);
  if (n == 0) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::size_t distinct = 1;
  for (std::size_t t = 1; t < n; ++t) {
    if (values[order[t]] != values[order[t - 1]]) ++distinct;
  }

  if (distinct <= bins) {
    std::int32_t level = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (t > 0 && values[order[t]] != values[order[t - 1]]) ++level;
      out.codes[order[t]] = level;
    }
    out.n_levels = distinct;
    return out;
  }

  // A run of equal values takes the bin of its first sorted position; bins
  // skipped over by long runs are compacted away afterwards.
  std::size_t run_start = 0;
  std::int32_t level = -1;
  std::size_t last_bin = bins;  // sentinel: no bin yet
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0 && values[order[t]] != values[order[t - 1]]) run_start = t;
    const std::size_t bin = run_start * bins / n;
    if (bin != last_bin) {
      ++level;
      last_bin = bin;
    }
    out.codes[order[t]] = level;
  }
  out.n_levels = static_cast<std::size_t>(level + 1);
  return out;
}

double plugin_mutual_information(const Discretized& a, const Discretized& b) {
  if (a.codes.size() != b.codes.size()) throw InvalidArgument("mutual information needs equal-length variables");
  const std::size_t n = a.codes.size();
  if (n == 0 || a.n_levels < 2 || b.n_levels < 2) return 0.0;

  std::vector<double> joint(a.n_levels * b.n_levels, 0.0);
  std::vector<double> ca(a.n_levels, 0.0), cb(b.n_levels, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = static_cast<std::size_t>(a.codes[r]);
    const auto y = static_cast<std::size_t>(b.codes[r]);
    joint[x * b.n_levels + y] += 1.0;
    ca[x] += 1.0;
    cb[y] += 1.0;
  }
  const auto total = static_cast<double>(n);
  double mi = 0.0;
  for (std::size_t x = 0; x < a.n_levels; ++x) {
    for (std::size_t y = 0; y < b.n_levels; ++y) {
      const double c = joint[x * b.n_levels + y];
      if (c > 0.0) mi += (c / total) * std::log((c * total) / (ca[x] * cb[y]));
    }
  }
  return std::max(mi, 0.0);
}

namespace {

Discretized label_levels(const Dataset& d) {
  Discretized out;
  out.codes.assign(d.labels.begin(), d.labels.end());
  out.n_levels = d.n_classes();
  return out;
}

}  // namespace

double mutual_info_with_label(const Dataset& d, std::size_t col, std::size_t bins) {
  if (col >= d.n_cols()) throw InvalidArgument("column index out of range");
  return plugin_mutual_information(discretize(d.features.column(col), bins), label_levels(d));
}

double f_value_with_label(const Dataset& d, std::size_t col, double cap) {
  if (col >= d.n_cols()) throw InvalidArgument("column index out of range");
  const auto x = d.features.column(col);
  const std::size_t n_classes = d.n_classes();
  std::vector<double> sum(n_classes, 0.0), count(n_classes, 0.0);
  double grand = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    const auto g = static_cast<std::size_t>(d.labels[r]);
    sum[g] += x[r];
    count[g] += 1.0;
    grand += x[r];
  }
  const auto n = static_cast<double>(x.size());
  grand /= n;

  std::size_t groups = 0;
  std::vector<double> mean(n_classes, 0.0);
  for (std::size_t g = 0; g < n_classes; ++g) {
    if (count[g] > 0.0) {
      mean[g] = sum[g] / count[g];
      ++groups;
    }
  }
  if (groups < 2) return 0.0;

  double between = 0.0;
  for (std::size_t g = 0; g < n_classes; ++g) {
    if (count[g] > 0.0) between += count[g] * (mean[g] - grand) * (mean[g] - grand);
  }
  double within = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double dev = x[r] - mean[static_cast<std::size_t>(d.labels[r])];
    within += dev * dev;
  }

  const double total_ss = between + within;
  if (total_ss <= 0.0) return 0.0;
  // Within-group variance at rounding level relative to the total counts as
  // zero: the groups are perfectly separated.
  const auto df_within = n - static_cast<double>(groups);
  if (within <= 1e-12 * total_ss || df_within <= 0.0) return between > 0.0 ? cap : 0.0;
  const double f = (between / static_cast<double>(groups - 1)) / (within / df_within);
  return std::min(f, cap);
}

double cosine_with_label(const Dataset& d, std::size_t col) {
  if (col >= d.n_cols()) throw InvalidArgument("column index out of range");
  const auto x = d.features.column(col);
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    const auto y = static_cast<double>(d.labels[r]);
    dot += x[r] * y;
    xx += x[r] * x[r];
    yy += y * y;
  }
  if (xx == 0.0 || yy == 0.0) return 0.0;
  return std::min(std::abs(dot) / (std::sqrt(xx) * std::sqrt(yy)), 1.0);
}

RelevanceVector gini_importance(const Dataset& d, const ForestParams& forest) {
  if (forest.n_trees == 0) throw InvalidArgument("gini importance needs n_trees > 0");
  RandomForest rf(forest);
  rf.fit(d.features, d.labels, d.n_classes());

  RelevanceVector out;
  out.estimator = Estimator::GINI;
  out.dataset_ref = d.name;
  out.values = rf.raw_importance();
  const double total = std::accumulate(out.values.begin(), out.values.end(), 0.0);
  if (total > 0.0) {
    for (double& v : out.values) v = std::max(v / total, 0.0);
  }
  RelevanceParams p;
  p.forest = forest;
  out.params = p.to_json()["forest"];
  return out;
}

double column_relevance(const Dataset& d, std::size_t col, Estimator estimator, const RelevanceParams& params) {
  switch (estimator) {
    case Estimator::MI: return mutual_info_with_label(d, col, params.mi_bins);
    case Estimator::FVALUE: return f_value_with_label(d, col, params.fvalue_cap);
    case Estimator::COSINE: return cosine_with_label(d, col);
    case Estimator::GINI: break;
  }
  throw InvalidArgument("GINI relevance is computed for all columns at once");
}

RelevanceVector relevance_all(const Dataset& d, Estimator estimator, const RelevanceParams& params) {
  if (estimator == Estimator::GINI) {
    auto out = gini_importance(d, params.forest);
    out.params = params.to_json();
    return out;
  }
  RelevanceVector out;
  out.estimator = estimator;
  out.dataset_ref = d.name;
  out.values.resize(d.n_cols());
  for (std::size_t c = 0; c < d.n_cols(); ++c) out.values[c] = column_relevance(d, c, estimator, params);
  out.params = params.to_json();
  return out;
}

double abs_pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("correlation needs equal-length columns");
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  bool x_const = true, y_const = true;
  double mx = 0.0, my = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    mx += x[r];
    my += y[r];
    x_const = x_const && x[r] == x[0];
    y_const = y_const && y[r] == y[0];
  }
  if (x_const || y_const) return 0.0;
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double dx = x[r] - mx;
    const double dy = y[r] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::min(std::abs(sxy) / std::sqrt(sxx * syy), 1.0);
}

double pair_redundancy(const Dataset& d, std::size_t i, std::size_t j, Redundancy measure, std::size_t mi_bins) {
  if (i == j) throw InvalidArgument("pairwise redundancy requires two distinct features");
  if (i >= d.n_cols() || j >= d.n_cols()) throw InvalidArgument("column index out of range");
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  if (measure == Redundancy::ABS_PEARSON) return abs_pearson(d.features.column(lo), d.features.column(hi));
  return plugin_mutual_information(discretize(d.features.column(lo), mi_bins),
                                   discretize(d.features.column(hi), mi_bins));
}

std::size_t RedundancyCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t RedundancyCache::computed() const {
  std::lock_guard lock(mutex_);
  return computed_;
}

double RedundancyCache::get(const Dataset& d, std::size_t i, std::size_t j) {
  if (i == j) throw InvalidArgument("pairwise redundancy requires two distinct features");
  const std::uint64_t key = (static_cast<std::uint64_t>(std::min(i, j)) << 32) | std::max(i, j);
  {
    std::lock_guard lock(mutex_);
    if (const auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  const double value = pair_redundancy(d, i, j, measure_, mi_bins_);
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(key, value);
  ++computed_;
  return value;
}

double pairwise_redundancy(const Dataset& d, std::size_t i, std::size_t j, Redundancy measure,
                           RedundancyCache& cache) {
  if (measure != cache.measure()) throw InvalidArgument("cache holds a different redundancy measure");
  return cache.get(d, i, j);
}

}  // namespace kgroups
