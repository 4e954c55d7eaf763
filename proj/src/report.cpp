#include "kgroups/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "kgroups/errors.hpp"
#include "kgroups/evaluation.hpp"

namespace kgroups {

bool draw_at_table_precision(double a, double b) { return std::llround(a * 1e4) == std::llround(b * 1e4); }

bool better_cell(const BenchmarkRecord& a, const BenchmarkRecord& b) {
  if (a.cv_mean_accuracy != b.cv_mean_accuracy) return a.cv_mean_accuracy > b.cv_mean_accuracy;
  if (a.k != b.k) return a.k < b.k;
  if (a.n_selected != b.n_selected) return a.n_selected < b.n_selected;
  if (a.variant != b.variant) return a.variant < b.variant;
  return a.classifier < b.classifier;
}

Report best_config_report(const std::vector<BenchmarkRecord>& records) {
  using Group = std::tuple<std::string, std::string, std::string>;  // dataset, estimator, algorithm
  std::map<Group, const BenchmarkRecord*> overall;
  std::map<std::tuple<std::string, std::string, std::string, std::string>, const BenchmarkRecord*> per_classifier;
  for (const auto& r : records) {
    const Group g{r.dataset, r.estimator, r.algorithm};
    auto& best = overall[g];
    if (best == nullptr || better_cell(r, *best)) best = &r;
    auto& best_c = per_classifier[{r.dataset, r.estimator, r.algorithm, r.classifier}];
    if (best_c == nullptr || better_cell(r, *best_c)) best_c = &r;
  }

  Report report;
  for (const auto& [g, best] : overall) {
    report.best_overall.push_back({std::get<0>(g), std::get<1>(g), std::get<2>(g), *best});
  }
  std::map<Group, std::vector<const BenchmarkRecord*>> bests_by_group;
  for (const auto& [key, best] : per_classifier) {
    const auto& [ds, est, alg, cls] = key;
    report.best_per_classifier.push_back({ds, est, alg, cls, *best});
    bests_by_group[{ds, est, alg}].push_back(best);
  }
  for (const auto& [g, bests] : bests_by_group) {
    std::vector<double> accs;
    double fold_sd = 0.0;
    for (const auto* b : bests) {
      accs.push_back(b->cv_mean_accuracy);
      fold_sd += b->cv_sd;
    }
    const auto [mean, sd] = mean_and_sd(accs);
    report.average_best.push_back(
        {std::get<0>(g), std::get<1>(g), std::get<2>(g), mean, sd, fold_sd / static_cast<double>(bests.size()),
         bests.size()});
  }

  // Pairwise tallies per estimator over datasets where both families appear.
  std::set<std::string> families;
  for (const auto& b : report.best_overall) families.insert(b.algorithm);
  std::set<std::string> estimators;
  for (const auto& b : report.best_overall) estimators.insert(b.estimator);

  std::map<Group, double> overall_acc, average_acc;
  std::set<std::string> ds_names;
  for (const auto& b : report.best_overall) {
    overall_acc[{b.dataset, b.estimator, b.algorithm}] = b.best.cv_mean_accuracy;
    ds_names.insert(b.dataset);
  }
  for (const auto& a : report.average_best) average_acc[{a.dataset, a.estimator, a.algorithm}] = a.mean_accuracy;

  for (const auto* basis : {"overall", "average"}) {
    const auto& table = std::string(basis) == "overall" ? overall_acc : average_acc;
    for (const auto& est : estimators) {
      for (auto ia = families.begin(); ia != families.end(); ++ia) {
        for (auto ib = std::next(ia); ib != families.end(); ++ib) {
          WinDraw wd{basis, est, *ia, *ib};
          bool any = false;
          for (const auto& ds : ds_names) {
            const auto fa = table.find({ds, est, *ia});
            const auto fb = table.find({ds, est, *ib});
            if (fa == table.end() || fb == table.end()) continue;
            any = true;
            if (draw_at_table_precision(fa->second, fb->second)) {
              ++wd.draws;
            } else if (fa->second > fb->second) {
              ++wd.wins_a;
            } else {
              ++wd.wins_b;
            }
          }
          if (any) report.tallies.push_back(wd);
        }
      }
    }
  }
  return report;
}

namespace {

std::string pct(double accuracy) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", accuracy * 100.0);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_csv(dir / "best_overall.csv");
    out << "dataset,estimator,algorithm,accuracy_pct,cv_sd_pct,variant,classifier,k,alpha,n_selected\n";
    for (const auto& b : report.best_overall) {
      out << b.dataset << ',' << b.estimator << ',' << b.algorithm << ',' << pct(b.best.cv_mean_accuracy) << ','
          << pct(b.best.cv_sd) << ',' << b.best.variant << ',' << b.best.classifier << ',' << b.best.k << ','
          << (b.best.alpha ? num(*b.best.alpha) : "") << ',' << b.best.n_selected << '\n';
    }
  }
  {
    auto out = open_csv(dir / "best_per_classifier.csv");
    out << "dataset,estimator,algorithm,classifier,accuracy_pct,cv_sd_pct,variant,k,n_selected\n";
    for (const auto& b : report.best_per_classifier) {
      out << b.dataset << ',' << b.estimator << ',' << b.algorithm << ',' << b.classifier << ','
          << pct(b.best.cv_mean_accuracy) << ',' << pct(b.best.cv_sd) << ',' << b.best.variant << ',' << b.best.k
          << ',' << b.best.n_selected << '\n';
    }
  }
  {
    auto out = open_csv(dir / "average_best.csv");
    out << "dataset,estimator,algorithm,mean_accuracy_pct,sd_across_classifiers_pct,mean_fold_sd_pct,n_classifiers\n";
    for (const auto& a : report.average_best) {
      out << a.dataset << ',' << a.estimator << ',' << a.algorithm << ',' << pct(a.mean_accuracy) << ','
          << pct(a.sd_across_classifiers) << ',' << pct(a.mean_fold_sd) << ',' << a.n_classifiers << '\n';
    }
  }
  {
    auto out = open_csv(dir / "win_draw.csv");
    out << "basis,estimator,algorithm_a,algorithm_b,wins_a,wins_b,draws\n";
    for (const auto& w : report.tallies) {
      out << w.basis << ',' << w.estimator << ',' << w.algorithm_a << ',' << w.algorithm_b << ',' << w.wins_a << ','
          << w.wins_b << ',' << w.draws << '\n';
    }
  }
}

void write_nselected_plotdata(const Report& report, std::ostream& out) {
  out << "dataset,estimator,algorithm,classifier,n_selected,accuracy_pct\n";
  for (const auto& b : report.best_per_classifier) {
    out << b.dataset << ',' << b.estimator << ',' << b.algorithm << ',' << b.classifier << ',' << b.best.n_selected
        << ',' << pct(b.best.cv_mean_accuracy) << '\n';
  }
}

}  // namespace kgroups
