#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "kgroups/errors.hpp"
#include "kgroups/selectors.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace kgroups;

namespace {

RelevanceVector rel_of(std::vector<double> v, Estimator e = Estimator::MI) {
  RelevanceVector r;
  r.estimator = e;
  r.values = std::move(v);
  return r;
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

Dataset noise_dataset(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return synth::random_dataset(rng, rows, cols, 2);
}

// Random relevance with frequent exact repeats, to exercise every tie rule.
std::vector<double> tied_relevance(Rng& rng, std::size_t n) {
  std::vector<double> pool(1 + uniform_index(rng, n));
  for (auto& p : pool) p = uniform_real(rng);
  std::vector<double> v(n);
  for (auto& x : v) x = pool[uniform_index(rng, pool.size())];
  return v;
}

}  // namespace

TEST_CASE("kbest examples") {
  CHECK(select_kbest(rel_of({0.1, 0.9, 0.5}), 2).selected == std::vector<std::size_t>{1, 2});
  CHECK(select_kbest(rel_of({0.1, 0.9, 0.5}), 3).selected == std::vector<std::size_t>{1, 2, 0});
  CHECK(select_kbest(rel_of({0.5, 0.5, 0.1}), 1).selected == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(select_kbest(rel_of({0.1, 0.2}), 3), InvalidArgument);
  CHECK_THROWS_AS(select_kbest(rel_of({0.1, 0.2}), 0), InvalidArgument);
  const auto r = select_kbest(rel_of({0.3, 0.2}), 1);
  CHECK(r.algorithm == Algorithm::KBEST);
  CHECK(r.requested_k == 1);
  CHECK(r.cpu_time_seconds >= 0.0);
}

TEST_CASE("kbest matches a full sort on random vectors") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 60);
    auto values = tied_relevance(rng, n);
    if (trial % 2 == 0) {
      for (auto& x : values) x = uniform_real(rng);
    }
    const std::size_t k = 1 + uniform_index(rng, n);
    CHECK(select_kbest(rel_of(values), k).selected == oracle::kbest(values, k));
  }
}

TEST_CASE("mrmr first pick is the relevance argmax") {
  const auto d = noise_dataset(30, 6, 2);
  const auto rel = relevance_all(d, Estimator::MI);
  const auto top = static_cast<std::size_t>(std::max_element(rel.values.begin(), rel.values.end()) - rel.values.begin());
  for (const auto form : {MrmrForm::DIFFERENCE, MrmrForm::QUOTIENT}) {
    MrmrOptions o;
    o.form = form;
    CHECK(select_mrmr(d, rel, 3, o).selected.front() == top);
  }
}

TEST_CASE("MID on a 4-feature table matches the rescanning oracle") {
  // x1 repeats x0's information, x2 is weaker but complementary, x3 is noise.
  const auto d = synth::from_columns({{0, 0, 1, 1, 0, 1, 0, 1},
                                      {0, 0, 1, 1, 0, 1, 1, 1},
                                      {0, 1, 0, 1, 1, 1, 0, 0},
                                      {1, 0, 0, 1, 0, 1, 1, 0}},
                                     {0, 0, 1, 1, 0, 1, 0, 1}, 2);
  const auto rel = relevance_all(d, Estimator::MI);
  MrmrOptions o;
  const auto fast = select_mrmr(d, rel, 3, o);
  CHECK(fast.selected == oracle::mrmr(d, rel.values, 3, o));
  CHECK(fast.selected.front() == 0);
  CHECK(fast.algorithm == Algorithm::MRMR_D);
  CHECK(fast.hyperparams.at("mean_normalized") == true);
}

TEST_CASE("FCD second pick subtracts the absolute correlation") {
  Rng rng(5);
  const std::size_t n = 60;
  const auto y = synth::balanced_labels(rng, n, 2);
  std::vector<double> x0(n), x2(n), x3(n);
  for (std::size_t i = 0; i < n; ++i) {
    x0[i] = 0.5 * y[i] + synth::normal(rng);
    x2[i] = 0.4 * y[i] + synth::normal(rng);
    x3[i] = synth::normal(rng);
  }
  const auto d = synth::from_columns({x0, x0, x2, x3}, y, 2);
  const auto rel = relevance_all(d, Estimator::FVALUE);
  MrmrOptions o;
  o.redundancy = Redundancy::ABS_PEARSON;
  const auto r = select_mrmr(d, rel, 2, o);
  CHECK(r.selected == oracle::mrmr(d, rel.values, 2, o));
  CHECK(r.selected[0] == 0);
  // The exact duplicate scores rel - 1, the others rel - |rho| with x0.
  std::size_t best = 1;
  double best_score = rel.values[1] - 1.0;
  for (std::size_t c = 2; c < 4; ++c) {
    const double s = rel.values[c] - abs_pearson(d.features.column(0), d.features.column(c));
    if (s > best_score) {
      best = c;
      best_score = s;
    }
  }
  CHECK(r.selected[1] == best);
}

TEST_CASE("mrmr argument checks") {
  const auto d = noise_dataset(20, 4, 3);
  const auto rel = relevance_all(d, Estimator::MI);
  MrmrOptions o;
  CHECK_THROWS_AS(select_mrmr(d, rel, 5, o), InvalidArgument);
  o.beta = 1.5;
  CHECK_THROWS_AS(select_mrmr(d, rel, 2, o), InvalidArgument);
  o.beta = 1.0;
  RedundancyCache wrong(Redundancy::ABS_PEARSON);
  CHECK_THROWS_AS(select_mrmr(d, rel, 2, o, &wrong), InvalidArgument);
}

TEST_CASE("mrmr with a shared cache is prefix consistent and reuses pairs") {
  const auto d = noise_dataset(40, 15, 4);
  const auto rel = relevance_all(d, Estimator::MI);
  MrmrOptions o;
  RedundancyCache cache(o.redundancy, o.mi_bins);
  std::vector<double> steps;
  const auto full = select_mrmr(d, rel, 10, o, &cache, &steps);
  REQUIRE(steps.size() == 10);
  CHECK(std::is_sorted(steps.begin(), steps.end()));
  const std::size_t computed = cache.computed();
  for (std::size_t k = 1; k <= 10; ++k) {
    const auto part = select_mrmr(d, rel, k, o, &cache);
    CHECK(std::equal(part.selected.begin(), part.selected.end(), full.selected.begin()));
  }
  CHECK(cache.computed() == computed);
}

TEST_CASE("mrmr fast path equals the oracle on random instances") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t cols = 2 + uniform_index(rng, 25);
    const auto d = synth::random_dataset(rng, 20 + uniform_index(rng, 30), cols, 2 + uniform_index(rng, 2));
    MrmrOptions o;
    o.form = trial % 2 ? MrmrForm::QUOTIENT : MrmrForm::DIFFERENCE;
    o.redundancy = (trial / 2) % 2 ? Redundancy::ABS_PEARSON : Redundancy::MI_PAIR;
    o.mean_normalized = trial % 5 != 0;
    o.beta = trial % 3 == 0 ? uniform_real(rng) : 1.0;
    const auto rel = trial % 4 == 0 ? rel_of(tied_relevance(rng, cols)) : relevance_all(d, Estimator::MI);
    const std::size_t k = 1 + uniform_index(rng, cols);
    const auto fast = select_mrmr(d, rel, k, o);
    CHECK(fast.selected == oracle::mrmr(d, rel.values, k, o));
    CHECK(as_set(fast.selected).size() == k);
  }
}

TEST_CASE("difference form with beta 0 selects the kbest set") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cols = 2 + uniform_index(rng, 20);
    const auto d = synth::random_dataset(rng, 25, cols, 2);
    const auto rel = trial % 2 ? rel_of(tied_relevance(rng, cols)) : relevance_all(d, Estimator::FVALUE);
    const std::size_t k = 1 + uniform_index(rng, cols);
    MrmrOptions o;
    o.beta = 0.0;
    o.redundancy = trial % 3 ? Redundancy::ABS_PEARSON : Redundancy::MI_PAIR;
    CHECK(as_set(select_mrmr(d, rel, k, o).selected) == as_set(select_kbest(rel, k).selected));
  }
}

TEST_CASE("bin edges") {
  const std::vector<double> unit{0.0, 1.0};
  const auto b1 = compute_bins(unit, 4, 1.0);
  CHECK(b1.edges == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  const auto b05 = compute_bins(unit, 4, 0.5);
  const std::vector<double> expect05{0.5, std::sqrt(0.5), std::sqrt(0.75), 1.0};
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(b05.edges[j] - expect05[j]) <= 1e-12);
  CHECK(std::abs(b05.edges[1] - 0.7071) < 1e-4);
  CHECK(std::abs(b05.edges[2] - 0.8660) < 1e-4);
  const auto b2 = compute_bins(unit, 4, 2.0);
  CHECK(b2.edges == std::vector<double>{0.0625, 0.25, 0.5625, 1.0});

  const std::vector<double> rel{0.1, 0.2, 0.9, 0.85};
  const auto b = compute_bins(rel, 2, 1.0);
  CHECK(std::abs(b.edges[0] - 0.5) <= 1e-12);
  CHECK(b.edges[1] == 0.9);
  CHECK(b.assignments == std::vector<std::size_t>{0, 0, 1, 1});
  CHECK(b.non_empty_bins() == 2);
  CHECK(b.bin_counts() == std::vector<std::size_t>{2, 2});
}

TEST_CASE("degenerate and invalid binning") {
  const std::vector<double> flat{0.3, 0.3, 0.3};
  const auto b = compute_bins(flat, 5, 1.0);
  CHECK(b.assignments == std::vector<std::size_t>{0, 0, 0});
  CHECK(b.edges.size() == 5);
  CHECK(b.edges.back() == 0.3);
  CHECK_THROWS_AS(compute_bins(flat, 0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(compute_bins(flat, 2, 0.0), InvalidArgument);
  CHECK_THROWS_AS(compute_bins(flat, 2, -1.0), InvalidArgument);
  CHECK_THROWS_AS(compute_bins(std::vector<double>{}, 2, 1.0), InvalidArgument);
}

TEST_CASE("binning invariants and oracle agreement on random vectors") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 80);
    auto v = trial % 3 == 0 ? tied_relevance(rng, n) : std::vector<double>(n);
    if (trial % 3 != 0) {
      for (auto& x : v) x = std::pow(uniform_real(rng), 3.0) * 5.0;
    }
    const std::size_t k = 1 + uniform_index(rng, 40);
    const double alpha = 0.05 + 2.95 * uniform_real(rng);
    const auto b = compute_bins(v, k, alpha);
    const auto o = oracle::bins(v, k, alpha);
    CHECK(b.edges == o.edges);
    CHECK(b.assignments == o.assignments);
    CHECK(std::is_sorted(b.edges.begin(), b.edges.end()));
    CHECK(b.edges.back() == *std::max_element(v.begin(), v.end()));
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = b.assignments[i];
      REQUIRE(j < k);
      CHECK(v[i] <= b.edges[j]);
      if (j > 0) CHECK(v[i] > b.edges[j - 1]);
    }
  }
}

TEST_CASE("smaller alpha never lowers an edge") {
  Rng rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const double lo = uniform_real(rng), hi = lo + 2.0 * uniform_real(rng);
    const std::vector<double> v{lo, hi};
    const std::size_t k = 1 + uniform_index(rng, 100);
    double a1 = 0.05 + 3.0 * uniform_real(rng), a2 = 0.05 + 3.0 * uniform_real(rng);
    if (a1 > a2) std::swap(a1, a2);
    const auto e1 = compute_bins(v, k, a1).edges, e2 = compute_bins(v, k, a2).edges;
    for (std::size_t j = 0; j < k; ++j) CHECK(e1[j] >= e2[j]);
  }
  // Right-skewed relevance: more edges above the median as alpha shrinks.
  std::vector<double> skew(200);
  for (auto& x : skew) x = std::pow(uniform_real(rng), 4.0);
  auto sorted = skew;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[100];
  std::size_t prev = 0;
  for (const double alpha : {3.0, 1.7, 1.5, 1.3, 1.0, 0.7, 0.5, 0.3, 0.05}) {
    const auto e = compute_bins(skew, 20, alpha).edges;
    const auto above = static_cast<std::size_t>(std::count_if(e.begin(), e.end(), [&](double x) { return x > median; }));
    CHECK(above >= prev);
    prev = above;
  }
}

TEST_CASE("kgroups selects one feature per occupied bin") {
  const auto d = noise_dataset(20, 4, 6);
  KGroupsOptions o;
  const auto r = select_kgroups(d, rel_of({0.1, 0.2, 0.9, 0.85}), 2, o);
  CHECK(as_set(r.selected) == std::set<std::size_t>{1, 2});
  CHECK(r.selected == std::vector<std::size_t>{2, 1});
  CHECK(r.algorithm == Algorithm::KGROUPS);
  // More bins than features is allowed.
  CHECK(select_kgroups(d, rel_of({0.1, 0.2, 0.9, 0.85}), 10, o).selected.size() <= 4);
}

TEST_CASE("unbroken ties return every survivor") {
  const auto d = noise_dataset(20, 5, 7);
  KGroupsOptions o;
  const auto r = select_kgroups(d, rel_of({0.4, 0.4, 0.4, 0.4, 0.4}), 3, o);
  CHECK(r.selected == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("tie-breaker rounds follow a filter oracle") {
  Rng rng(8);
  const std::size_t n = 50;
  const auto y = synth::balanced_labels(rng, n, 2);
  std::vector<double> a(n), shifted(n), weak(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = 1.5 * y[i] + synth::normal(rng);
    shifted[i] = a[i] + 4.0;  // same ranks and F-value, different cosine
    weak[i] = 0.2 * y[i] + synth::normal(rng);
  }
  const auto d = synth::from_columns({a, a, shifted, weak}, y, 2);
  RelevanceParams params;
  const auto rel = relevance_all(d, Estimator::MI, params);
  REQUIRE(rel.values[0] == rel.values[1]);
  REQUIRE(rel.values[0] == rel.values[2]);
  REQUIRE(rel.values[3] < rel.values[0]);

  // Filter oracle for one round: keep survivors maximizing the breaker.
  auto filter = [&](const std::vector<std::size_t>& in, Estimator e) {
    double best = 0.0;
    for (const auto i : in) best = std::max(best, column_relevance(d, i, e, params));
    std::vector<std::size_t> out;
    for (const auto i : in) {
      const double s = column_relevance(d, i, e, params);
      if (std::abs(s - best) <= 1e-12 * std::max(1.0, best)) out.push_back(i);
    }
    return out;
  };

  const std::vector<std::vector<Estimator>> lists{
      {Estimator::COSINE}, {Estimator::FVALUE}, {Estimator::FVALUE, Estimator::COSINE}, {Estimator::COSINE, Estimator::FVALUE}};
  for (const auto& breakers : lists) {
    KGroupsOptions o;
    o.tie_breakers = breakers;
    o.params = params;
    std::vector<ClusterTrace> trace;
    const auto r = select_kgroups(d, rel, 2, o, nullptr, &trace);
    std::vector<std::size_t> expected{0, 1, 2};
    const ClusterTrace* top = nullptr;
    for (const auto& t : trace) {
      if (t.rounds.front().size() == 3) top = &t;
    }
    REQUIRE(top != nullptr);
    CHECK(top->rounds.front() == expected);
    std::size_t round = 1;
    for (const auto e : breakers) {
      if (expected.size() < 2) break;
      expected = filter(expected, e);
      REQUIRE(round < top->rounds.size());
      CHECK(top->rounds[round] == expected);
      ++round;
    }
    std::vector<std::size_t> kgroups_set(r.selected);
    std::sort(kgroups_set.begin(), kgroups_set.end());
    CHECK(kgroups_set == oracle::kgroups(d, rel.values, 2, 1.0, breakers, params));
  }

  // Exact duplicates survive a cosine round, then an F-value round.
  KGroupsOptions dup;
  const auto dd = synth::from_columns({a, a, weak}, y, 2);
  const auto drel = relevance_all(dd, Estimator::MI, params);
  dup.tie_breakers = {Estimator::COSINE};
  CHECK(as_set(select_kgroups(dd, drel, 2, dup).selected) == std::set<std::size_t>{0, 1, 2});
  dup.tie_breakers = {Estimator::COSINE, Estimator::FVALUE};
  const auto both = select_kgroups(dd, drel, 1, dup);
  CHECK(as_set(both.selected) == std::set<std::size_t>{0, 1});
  // The shifted copy ties with `a` on F-value but not on cosine.
  const auto sd = synth::from_columns({a, shifted, weak}, y, 2);
  const auto srel = relevance_all(sd, Estimator::MI, params);
  dup.tie_breakers = {Estimator::FVALUE};
  CHECK(select_kgroups(sd, srel, 1, dup).selected.size() == 2);
  dup.tie_breakers = {Estimator::FVALUE, Estimator::COSINE};
  CHECK(select_kgroups(sd, srel, 1, dup).selected.size() == 1);
}

TEST_CASE("kgroups selected features are cluster maxima") {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t cols = 3 + uniform_index(rng, 40);
    const auto d = synth::random_dataset(rng, 30, cols, 2);
    const auto rel = relevance_all(d, Estimator::MI);
    const std::size_t k = 1 + uniform_index(rng, cols);
    const double alpha = 0.2 + 1.6 * uniform_real(rng);
    KGroupsOptions o;
    o.alpha = alpha;
    o.tie_breakers = {Estimator::COSINE, Estimator::FVALUE};
    std::vector<ClusterTrace> trace;
    const auto r = select_kgroups(d, rel, k, o, nullptr, &trace);
    const auto bins = compute_bins(rel, k, alpha);
    std::map<std::size_t, std::size_t> per_cluster;
    for (const auto i : r.selected) {
      const auto c = bins.assignments[i];
      ++per_cluster[c];
      for (std::size_t j = 0; j < cols; ++j) {
        if (bins.assignments[j] == c) CHECK(rel.values[j] <= rel.values[i] + 1e-12 * std::max(1.0, rel.values[i]));
      }
    }
    for (const auto& t : trace) {
      if (t.rounds.back().size() > 1) continue;  // exhausted: several may share the cluster
      CHECK(per_cluster[t.cluster] == 1);
    }
    CHECK(r.selected.size() <= cols);
    CHECK(as_set(r.selected).size() == r.selected.size());
    CHECK(std::is_sorted(r.selected.begin(), r.selected.end(),
                         [&](std::size_t a, std::size_t b) { return rel.values[a] > rel.values[b]; }));
  }
}

TEST_CASE("kgroups with k = n_cols and distinct relevance selects one per non-empty bin") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 60);
    std::vector<double> v(n);
    for (auto& x : v) x = uniform_real(rng);
    const auto d = noise_dataset(10, n, static_cast<std::uint64_t>(trial));
    const double alpha = 0.1 + 2.0 * uniform_real(rng);
    const auto r = select_kgroups(d, rel_of(v), n, KGroupsOptions{alpha, {}, {}, false});
    CHECK(r.selected.size() == compute_bins(v, n, alpha).non_empty_bins());
  }
}

TEST_CASE("increasing affine maps of relevance keep kbest and kgroups sets") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 50);
    std::vector<double> v(n), w(n);
    const double a = 0.1 + 10.0 * uniform_real(rng), b = 5.0 * (uniform_real(rng) - 0.5);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = uniform_real(rng);
      w[i] = a * v[i] + b;
    }
    const std::size_t k = 1 + uniform_index(rng, n);
    CHECK(as_set(select_kbest(rel_of(v), k).selected) == as_set(select_kbest(rel_of(w), k).selected));
    const auto d = noise_dataset(10, n, static_cast<std::uint64_t>(trial));
    KGroupsOptions o;
    o.alpha = 0.3 + uniform_real(rng);
    CHECK(as_set(select_kgroups(d, rel_of(v), k, o).selected) == as_set(select_kgroups(d, rel_of(w), k, o).selected));
  }
}

TEST_CASE("kgroups fast path equals the oracle on random instances") {
  Rng rng(13);
  RelevanceParams params;
  params.forest.n_trees = 5;
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t cols = 2 + uniform_index(rng, 40);
    const auto d = synth::random_dataset(rng, 20 + uniform_index(rng, 20), cols, 2 + uniform_index(rng, 2));
    const auto rel = trial % 2 ? relevance_all(d, Estimator::MI, params) : rel_of(tied_relevance(rng, cols));
    const std::size_t k = 1 + uniform_index(rng, cols + 3);
    KGroupsOptions o;
    o.alpha = trial % 4 == 0 ? 1.0 : 0.1 + 2.0 * uniform_real(rng);
    o.params = params;
    const std::vector<Estimator> choices{Estimator::MI, Estimator::COSINE, Estimator::FVALUE, Estimator::GINI};
    for (std::size_t t = uniform_index(rng, 3); t > 0; --t) o.tie_breakers.push_back(choices[uniform_index(rng, 4)]);
    auto fast = select_kgroups(d, rel, k, o).selected;
    std::sort(fast.begin(), fast.end());
    CHECK(fast == oracle::kgroups(d, rel.values, k, o.alpha, o.tie_breakers, params));
  }
}

TEST_CASE("shared tie-breaker scores are computed lazily and once") {
  const auto d = noise_dataset(30, 10, 14);
  RelevanceParams params;
  TieBreakerScores scores(d, params);
  CHECK(scores.evaluations() == 0);
  const double a = scores.get(Estimator::COSINE, 3);
  CHECK(a == cosine_with_label(d, 3));
  CHECK(scores.get(Estimator::COSINE, 3) == a);
  CHECK(scores.evaluations() == 1);
  KGroupsOptions o;
  o.tie_breakers = {Estimator::COSINE};
  const auto rel = rel_of(std::vector<double>(10, 0.5));
  select_kgroups(d, rel, 3, o, &scores);
  const auto after = scores.evaluations();
  select_kgroups(d, rel, 4, o, &scores);
  CHECK(scores.evaluations() == after);
}

TEST_CASE("bin smoothing is rejected") {
  const auto d = noise_dataset(10, 3, 15);
  KGroupsOptions o;
  o.bin_smoothing = true;
  CHECK_THROWS_AS(select_kgroups(d, rel_of({0.1, 0.2, 0.3}), 2, o), NotImplemented);
}

TEST_CASE("selection results serialize names and hyperparameters") {
  const auto d = noise_dataset(10, 3, 16);
  KGroupsOptions o;
  o.alpha = 0.5;
  o.tie_breakers = {Estimator::COSINE};
  const auto j = select_kgroups(d, rel_of({0.1, 0.2, 0.3}), 2, o).to_json(&d);
  CHECK(j.at("algorithm") == "KGROUPS");
  CHECK(j.at("hyperparams").at("alpha") == 0.5);
  CHECK(j.at("selected_names").size() == j.at("selected").size());
  CHECK(j.at("n_selected") == j.at("selected").size());
}
