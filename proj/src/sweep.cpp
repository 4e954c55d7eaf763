#include "kgroups/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "kgroups/cpu_timer.hpp"
#include "kgroups/errors.hpp"
#include "kgroups/evaluation.hpp"

namespace kgroups {

namespace {

std::string format_alpha(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", alpha);
  return buf;
}

std::string relevance_code(Estimator e) {
  switch (e) {
    case Estimator::MI: return "MI";
    case Estimator::FVALUE: return "F";
    case Estimator::GINI: return "RF";
    case Estimator::COSINE: return "COS";
  }
  return "?";
}

MrmrForm parse_form(const std::string& s) {
  std::string lower = s;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "difference" || lower == "diff" || lower == "d") return MrmrForm::DIFFERENCE;
  if (lower == "quotient" || lower == "quot" || lower == "q") return MrmrForm::QUOTIENT;
  throw InvalidArgument("unknown mRMR form '" + s + "'");
}

// Runs fn(0..n-1) on up to `workers` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const std::size_t threads = std::min(workers, n);
  if (threads <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  if (failure) std::rethrow_exception(failure);
}

Dataset rows_of(const Dataset& d, std::span<const std::size_t> rows) {
  Dataset out;
  out.name = d.name;
  std::vector<std::size_t> cols(d.n_cols());
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = c;
  out.features = d.features.subset(rows, cols);
  out.feature_names = d.feature_names;
  out.class_names = d.class_names;
  for (const auto r : rows) out.labels.push_back(d.labels[r]);
  return out;
}

}  // namespace

std::string SelectorVariant::name(Estimator estimator) const {
  switch (algorithm) {
    case Algorithm::KBEST: return "KBEST";
    case Algorithm::KGROUPS: return "alpha=" + format_alpha(alpha);
    case Algorithm::MRMR_D:
    case Algorithm::MRMR_Q: break;
  }
  if (estimator == Estimator::MI && redundancy == Redundancy::MI_PAIR && form == MrmrForm::DIFFERENCE &&
      !mean_normalized) {
    return "MIFS";
  }
  std::string code = relevance_code(estimator);
  if (!(estimator == Estimator::MI && redundancy == Redundancy::MI_PAIR)) {
    code += redundancy == Redundancy::MI_PAIR ? "MI" : "C";
  }
  code += form == MrmrForm::DIFFERENCE ? "D" : "Q";
  if (!mean_normalized) code += "-sum";
  return code;
}

std::string algorithm_family(Algorithm a) {
  switch (a) {
    case Algorithm::KBEST: return "KBEST";
    case Algorithm::MRMR_D:
    case Algorithm::MRMR_Q: return "MRMR";
    case Algorithm::KGROUPS: return "KGROUPS";
  }
  return "?";
}

Redundancy default_redundancy(Estimator relevance) {
  return relevance == Estimator::MI ? Redundancy::MI_PAIR : Redundancy::ABS_PEARSON;
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  SweepConfig c;
  if (j.contains("datasets")) {
    c.datasets.clear();
    for (const auto& p : j.at("datasets")) c.datasets.emplace_back(p.get<std::string>());
  }
  if (j.contains("label_col")) {
    const auto& v = j.at("label_col");
    c.label_col = v.is_number() ? std::to_string(v.get<std::size_t>()) : v.get<std::string>();
  }
  if (j.contains("estimators")) {
    c.estimators.clear();
    for (const auto& e : j.at("estimators")) c.estimators.push_back(parse_estimator(e.get<std::string>()));
  }
  if (j.contains("algorithms")) c.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  if (j.contains("k_range")) {
    const auto range = j.at("k_range").get<std::vector<std::size_t>>();
    if (range.size() != 2) throw InvalidArgument("k_range must be [min, max]");
    c.k_min = range[0];
    c.k_max = range[1];
  }
  if (j.contains("k_min")) c.k_min = j.at("k_min").get<std::size_t>();
  if (j.contains("k_max")) c.k_max = j.at("k_max").get<std::size_t>();
  if (j.contains("alpha_grid")) c.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  if (j.contains("tie_breaker_map")) {
    for (const auto& [key, list] : j.at("tie_breaker_map").items()) {
      std::vector<Estimator> breakers;
      for (const auto& e : list) breakers.push_back(parse_estimator(e.get<std::string>()));
      c.tie_breaker_map[parse_estimator(key)] = breakers;
    }
  }
  if (j.contains("mrmr_forms")) {
    for (const auto& [key, list] : j.at("mrmr_forms").items()) {
      std::vector<MrmrForm> forms;
      for (const auto& f : list) forms.push_back(parse_form(f.get<std::string>()));
      c.mrmr_forms[parse_estimator(key)] = forms;
    }
  }
  if (j.contains("beta")) c.beta = j.at("beta").get<double>();
  if (j.contains("mean_normalized")) c.mean_normalized = j.at("mean_normalized").get<bool>();
  if (j.contains("classifiers")) {
    c.classifiers.clear();
    for (const auto& e : j.at("classifiers")) c.classifiers.push_back(parse_classifier(e.get<std::string>()));
  }
  if (j.contains("n_folds")) c.n_folds = j.at("n_folds").get<std::size_t>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("mi_bins")) c.mi_bins = j.at("mi_bins").get<std::size_t>();
  if (j.contains("n_trees")) c.n_trees = j.at("n_trees").get<std::size_t>();
  if (j.contains("knn_neighbors")) c.knn_neighbors = j.at("knn_neighbors").get<std::size_t>();
  if (j.contains("scale")) c.scale = j.at("scale").get<bool>();
  if (j.contains("scale_per_fold")) c.scale_per_fold = j.at("scale_per_fold").get<bool>();
  if (j.contains("select_per_fold")) c.select_per_fold = j.at("select_per_fold").get<bool>();
  if (j.contains("bin_smoothing")) c.bin_smoothing = j.at("bin_smoothing").get<bool>();
  if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
  return c;
}

nlohmann::json SweepConfig::to_json() const {
  nlohmann::json j = effective_echo();
  std::vector<std::string> paths;
  for (const auto& p : datasets) paths.push_back(p.string());
  j["datasets"] = paths;
  std::vector<std::string> est;
  for (const auto e : estimators) est.emplace_back(to_string(e));
  j["estimators"] = est;
  j["algorithms"] = algorithms;
  j["k_min"] = k_min;
  j["k_max"] = k_max;
  j["alpha_grid"] = alpha_grid;
  std::vector<std::string> cls;
  for (const auto c : classifiers) cls.emplace_back(to_string(c));
  j["classifiers"] = cls;
  nlohmann::json forms = nlohmann::json::object();
  for (const auto& [e, list] : mrmr_forms) {
    std::vector<std::string> names;
    for (const auto f : list) names.emplace_back(f == MrmrForm::DIFFERENCE ? "DIFFERENCE" : "QUOTIENT");
    forms[std::string(to_string(e))] = names;
  }
  j["mrmr_forms"] = forms;
  j["output_dir"] = output_dir.string();
  j["workers"] = workers;
  return j;
}

nlohmann::json SweepConfig::effective_echo() const {
  nlohmann::json tb = nlohmann::json::object();
  for (const auto& [e, list] : tie_breaker_map) {
    std::vector<std::string> names;
    for (const auto b : list) names.emplace_back(to_string(b));
    tb[std::string(to_string(e))] = names;
  }
  return {{"n_folds", n_folds},
          {"seed", seed},
          {"mi_bins", mi_bins},
          {"n_trees", n_trees},
          {"knn_neighbors", knn_neighbors},
          {"beta", beta},
          {"mean_normalized", mean_normalized},
          {"scale", scale},
          {"scale_per_fold", scale_per_fold},
          {"select_per_fold", select_per_fold},
          {"bin_smoothing", bin_smoothing},
          {"label_col", label_col},
          {"tie_breaker_map", tb}};
}

void SweepConfig::validate() const {
  if (bin_smoothing) {
    throw NotImplemented("bin_smoothing: bin size smoothing is not implemented; its formula is unspecified");
  }
  if (k_min == 0 || k_min > k_max) throw InvalidArgument("k range must satisfy 1 <= k_min <= k_max");
  for (const double a : alpha_grid) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("alpha values must be positive");
  }
  for (const auto& a : algorithms) {
    if (a != "kbest" && a != "mrmr" && a != "kgroups") throw InvalidArgument("unknown algorithm '" + a + "'");
  }
  if (n_folds < 2) throw InvalidArgument("n_folds must be at least 2");
  if (beta < 0.0 || beta > 1.0) throw InvalidArgument("beta must lie in [0, 1]");
  if (mi_bins == 0 || n_trees == 0 || knn_neighbors == 0) {
    throw InvalidArgument("mi_bins, n_trees and knn_neighbors must be positive");
  }
  if (estimators.empty() || classifiers.empty() || algorithms.empty()) {
    throw InvalidArgument("estimators, algorithms and classifiers must be non-empty");
  }
}

RelevanceParams SweepConfig::relevance_params() const {
  RelevanceParams p;
  p.mi_bins = mi_bins;
  p.forest.n_trees = n_trees;
  p.forest.seed = seed;
  return p;
}

ClassifierParams SweepConfig::classifier_params() const {
  ClassifierParams p;
  p.knn_neighbors = knn_neighbors;
  p.forest.n_trees = n_trees;
  p.forest.seed = seed;
  return p;
}

std::vector<SelectorVariant> SweepConfig::variants(Estimator estimator) const {
  std::vector<SelectorVariant> out;
  for (const auto& a : algorithms) {
    if (a == "kbest") {
      out.push_back({Algorithm::KBEST});
    } else if (a == "mrmr") {
      const auto it = mrmr_forms.find(estimator);
      if (it == mrmr_forms.end()) continue;
      for (const auto form : it->second) {
        SelectorVariant v;
        v.algorithm = form == MrmrForm::DIFFERENCE ? Algorithm::MRMR_D : Algorithm::MRMR_Q;
        v.form = form;
        v.redundancy = default_redundancy(estimator);
        v.mean_normalized = mean_normalized;
        out.push_back(v);
      }
    } else if (a == "kgroups") {
      for (const double alpha : alpha_grid) {
        SelectorVariant v;
        v.algorithm = Algorithm::KGROUPS;
        v.alpha = alpha;
        out.push_back(v);
      }
    }
  }
  return out;
}

std::size_t SweepConfig::resolved_workers() const {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("KGROUPS_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::string BenchmarkRecord::key() const {
  return dataset + "|" + estimator + "|" + variant + "|" + std::to_string(k) + "|" + classifier;
}

nlohmann::json BenchmarkRecord::to_json() const {
  nlohmann::json j;
  j["dataset"] = dataset;
  j["algorithm"] = algorithm;
  j["variant"] = variant;
  j["estimator"] = estimator;
  j["classifier"] = classifier;
  j["k"] = k;
  j["alpha"] = alpha ? nlohmann::json(*alpha) : nlohmann::json(nullptr);
  j["n_selected"] = n_selected;
  j["selected"] = selected;
  j["cv_mean_accuracy"] = cv_mean_accuracy;
  j["cv_sd"] = cv_sd;
  j["fold_accuracies"] = fold_accuracies;
  j["relevance_cpu_seconds"] = relevance_cpu_seconds;
  j["selection_cpu_seconds"] = selection_cpu_seconds;
  j["training_cpu_seconds"] = training_cpu_seconds;
  if (!n_selected_per_fold.empty()) j["n_selected_per_fold"] = n_selected_per_fold;
  j["seed"] = seed;
  j["config"] = config;
  return j;
}

BenchmarkRecord BenchmarkRecord::from_json(const nlohmann::json& j) {
  BenchmarkRecord r;
  r.dataset = j.at("dataset").get<std::string>();
  r.algorithm = j.at("algorithm").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.estimator = j.at("estimator").get<std::string>();
  r.classifier = j.at("classifier").get<std::string>();
  r.k = j.at("k").get<std::size_t>();
  if (j.contains("alpha") && !j.at("alpha").is_null()) r.alpha = j.at("alpha").get<double>();
  r.n_selected = j.at("n_selected").get<std::size_t>();
  r.selected = j.value("selected", std::vector<std::size_t>{});
  r.cv_mean_accuracy = j.at("cv_mean_accuracy").get<double>();
  r.cv_sd = j.value("cv_sd", 0.0);
  r.fold_accuracies = j.value("fold_accuracies", std::vector<double>{});
  r.relevance_cpu_seconds = j.value("relevance_cpu_seconds", 0.0);
  r.selection_cpu_seconds = j.value("selection_cpu_seconds", 0.0);
  r.training_cpu_seconds = j.value("training_cpu_seconds", 0.0);
  r.n_selected_per_fold = j.value("n_selected_per_fold", std::vector<std::size_t>{});
  r.seed = j.value("seed", std::uint64_t{0});
  r.config = j.value("config", nlohmann::json::object());
  return r;
}

std::size_t cells_per_dataset(const SweepConfig& config, std::size_t k_min, std::size_t k_max) {
  std::size_t variants = 0;
  for (const auto e : config.estimators) variants += config.variants(e).size();
  return variants * (k_max - k_min + 1) * config.classifiers.size();
}

std::vector<BenchmarkRecord> read_records(const std::filesystem::path& path) {
  std::vector<BenchmarkRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(BenchmarkRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      // A truncated last line is what an interrupted run leaves behind.
      log_warning(path.string() + ":" + std::to_string(line_no) + ": skipping unreadable record (" + e.what() + ")");
    }
  }
  return out;
}

namespace {

// Data a selection run sees: the full dataset, or one fold's training rows.
struct SelectionContext {
  const Dataset* data = nullptr;
  RelevanceVector relevance;
  std::unique_ptr<TieBreakerScores> tie_scores;
};

struct Unit {
  std::size_t variant = 0;
  std::size_t k = 0;
  bool needed = false;
  std::vector<std::vector<std::size_t>> selected;  // per context
  std::vector<double> cpu;                         // per context
};

struct Cell {
  std::size_t unit = 0;
  Classifier classifier = Classifier::KNN;
};

}  // namespace

SweepStats run_sweep(const SweepConfig& config, const RecordSink& sink, const std::set<std::string>& completed) {
  config.validate();
  SweepStats stats;
  const std::size_t workers = config.resolved_workers();

  std::vector<Dataset> datasets;
  for (const auto& path : config.datasets) {
    try {
      datasets.push_back(load_csv(path, LabelColumn::parse(config.label_col)));
    } catch (const DataError& e) {
      std::cerr << "error: skipping dataset " << path << ": " << e.what() << '\n';
      ++stats.datasets_failed;
    }
  }
  if (datasets.empty()) return stats;

  std::size_t min_cols = datasets.front().n_cols();
  for (const auto& d : datasets) min_cols = std::min(min_cols, d.n_cols());
  std::size_t k_max = config.k_max;
  std::size_t k_min = config.k_min;
  if (k_max > min_cols) {
    log_warning("k range clamped to max " + std::to_string(min_cols) + " (smallest dataset feature count)");
    k_max = min_cols;
  }
  if (k_min > k_max) {
    log_warning("k_min clamped to " + std::to_string(k_max));
    k_min = k_max;
  }
  stats.k_min = k_min;
  stats.k_max = k_max;

  const RelevanceParams rel_params = config.relevance_params();
  CvOptions cv_options;
  cv_options.classifier_params = config.classifier_params();
  cv_options.scale_per_fold = config.scale_per_fold;
  const nlohmann::json echo = config.effective_echo();

  for (auto& raw : datasets) {
    const Dataset d = config.scale && !config.scale_per_fold ? standard_scale(raw) : raw;
    const FoldPlan folds = make_folds(d, config.n_folds, config.seed);

    for (const Estimator estimator : config.estimators) {
      const auto variants = config.variants(estimator);
      const std::string est_name(to_string(estimator));

      std::vector<Unit> units;
      std::vector<Cell> cells;
      for (std::size_t v = 0; v < variants.size(); ++v) {
        const std::string vname = variants[v].name(estimator);
        for (std::size_t k = k_min; k <= k_max; ++k) {
          Unit unit;
          unit.variant = v;
          unit.k = k;
          for (const auto cls : config.classifiers) {
            BenchmarkRecord probe;
            probe.dataset = d.name;
            probe.estimator = est_name;
            probe.variant = vname;
            probe.k = k;
            probe.classifier = std::string(to_string(cls));
            ++stats.cells_total;
            if (completed.contains(probe.key())) {
              ++stats.cells_skipped;
              continue;
            }
            unit.needed = true;
            cells.push_back({units.size(), cls});
          }
          units.push_back(std::move(unit));
        }
      }
      if (cells.empty()) continue;

      // Relevance on the full dataset, once per (dataset, estimator).
      std::vector<SelectionContext> contexts;
      std::vector<Dataset> fold_data;
      CpuTimer rel_timer(CpuScope::Thread);
      contexts.emplace_back();
      contexts[0].data = &d;
      contexts[0].relevance = relevance_all(d, estimator, rel_params);
      ++stats.relevance_computations;
      const double relevance_cpu = rel_timer.elapsed();
      if (config.select_per_fold) {
        fold_data.reserve(folds.n_folds);
        for (std::size_t f = 0; f < folds.n_folds; ++f) fold_data.push_back(rows_of(d, folds.train_rows(f)));
        for (std::size_t f = 0; f < folds.n_folds; ++f) {
          SelectionContext ctx;
          ctx.data = &fold_data[f];
          ctx.relevance = relevance_all(fold_data[f], estimator, rel_params);
          contexts.push_back(std::move(ctx));
        }
        contexts.erase(contexts.begin());
      }
      const auto tie_breakers = [&] {
        const auto it = config.tie_breaker_map.find(estimator);
        return it == config.tie_breaker_map.end() ? std::vector<Estimator>{} : it->second;
      }();
      for (auto& ctx : contexts) ctx.tie_scores = std::make_unique<TieBreakerScores>(*ctx.data, rel_params);
      for (auto& u : units) {
        u.selected.resize(contexts.size());
        u.cpu.assign(contexts.size(), 0.0);
      }

      // Selection: one task per (variant, context).
      const std::size_t n_tasks = variants.size() * contexts.size();
      parallel_for(n_tasks, workers, [&](std::size_t task) {
        const std::size_t v = task / contexts.size();
        const std::size_t c = task % contexts.size();
        const SelectorVariant& variant = variants[v];
        const SelectionContext& ctx = contexts[c];
        std::vector<Unit*> mine;
        for (auto& u : units) {
          if (u.variant == v && u.needed) mine.push_back(&u);
        }
        if (mine.empty()) return;

        switch (variant.algorithm) {
          case Algorithm::KBEST:
            for (Unit* u : mine) {
              auto r = select_kbest(ctx.relevance, u->k);
              u->selected[c] = std::move(r.selected);
              u->cpu[c] = r.cpu_time_seconds;
            }
            break;
          case Algorithm::MRMR_D:
          case Algorithm::MRMR_Q: {
            MrmrOptions opts;
            opts.form = variant.form;
            opts.redundancy = variant.redundancy;
            opts.beta = config.beta;
            opts.mean_normalized = variant.mean_normalized;
            opts.mi_bins = config.mi_bins;
            RedundancyCache cache(opts.redundancy, opts.mi_bins);
            std::size_t longest = 0;
            for (const Unit* u : mine) longest = std::max(longest, u->k);
            std::vector<double> steps;
            const auto r = select_mrmr(*ctx.data, ctx.relevance, longest, opts, &cache, &steps);
            for (Unit* u : mine) {
              u->selected[c].assign(r.selected.begin(), r.selected.begin() + static_cast<std::ptrdiff_t>(u->k));
              u->cpu[c] = steps[u->k - 1];
            }
            break;
          }
          case Algorithm::KGROUPS: {
            KGroupsOptions opts;
            opts.alpha = variant.alpha;
            opts.tie_breakers = tie_breakers;
            opts.params = rel_params;
            for (Unit* u : mine) {
              auto r = select_kgroups(*ctx.data, ctx.relevance, u->k, opts, ctx.tie_scores.get());
              u->selected[c] = std::move(r.selected);
              u->cpu[c] = r.cpu_time_seconds;
            }
            break;
          }
        }
      });

      // Evaluation, emitted in cell order through one serialized sink.
      std::vector<std::optional<BenchmarkRecord>> ready(cells.size());
      std::size_t next_emit = 0;
      std::mutex emit_mutex;
      parallel_for(cells.size(), workers, [&](std::size_t i) {
        const Cell& cell = cells[i];
        const Unit& unit = units[cell.unit];
        const SelectorVariant& variant = variants[unit.variant];

        CpuTimer train_timer(CpuScope::Thread);
        BenchmarkRecord rec;
        rec.dataset = d.name;
        rec.algorithm = algorithm_family(variant.algorithm);
        rec.variant = variant.name(estimator);
        rec.estimator = est_name;
        rec.classifier = std::string(to_string(cell.classifier));
        rec.k = unit.k;
        if (variant.algorithm == Algorithm::KGROUPS) rec.alpha = variant.alpha;
        for (std::size_t f = 0; f < folds.n_folds; ++f) {
          const auto& sel = config.select_per_fold ? unit.selected[f] : unit.selected[0];
          rec.fold_accuracies.push_back(evaluate_fold(d, sel, cell.classifier, folds, f, cv_options));
        }
        const auto [mean, sd] = mean_and_sd(rec.fold_accuracies);
        rec.cv_mean_accuracy = mean;
        rec.cv_sd = sd;
        if (config.select_per_fold) {
          double total = 0.0, cpu_total = 0.0;
          for (std::size_t f = 0; f < unit.selected.size(); ++f) {
            rec.n_selected_per_fold.push_back(unit.selected[f].size());
            total += static_cast<double>(unit.selected[f].size());
            cpu_total += unit.cpu[f];
          }
          rec.n_selected = static_cast<std::size_t>(std::lround(total / static_cast<double>(unit.selected.size())));
          rec.selection_cpu_seconds = cpu_total / static_cast<double>(unit.selected.size());
        } else {
          rec.selected = unit.selected[0];
          rec.n_selected = rec.selected.size();
          rec.selection_cpu_seconds = unit.cpu[0];
        }
        rec.relevance_cpu_seconds = relevance_cpu;
        rec.seed = config.seed;
        rec.config = echo;
        rec.training_cpu_seconds = train_timer.elapsed();

        std::lock_guard lock(emit_mutex);
        ready[i] = std::move(rec);
        while (next_emit < ready.size() && ready[next_emit]) {
          sink(*ready[next_emit]);
          ready[next_emit].reset();
          ++next_emit;
          ++stats.cells_run;
        }
      });
    }
  }
  return stats;
}

}  // namespace kgroups
