#include "kgroups/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgroups/cpu_timer.hpp"
#include "kgroups/errors.hpp"
#include "kgroups/relevance.hpp"
#include "kgroups/report.hpp"
#include "kgroups/selectors.hpp"
#include "kgroups/sweep.hpp"

namespace kgroups {

namespace {

struct DataOptions {
  std::string path;
  std::string label_col;
  bool no_scale = false;
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.path, "CSV file with a header row")->required();
  cmd->add_option("--label-col", o.label_col, "label column name or zero-based index (default: last)");
  cmd->add_flag("--no-scale", o.no_scale, "skip standard scaling");
}

Dataset load(const DataOptions& o) {
  Dataset d = load_csv(o.path, LabelColumn::parse(o.label_col));
  return o.no_scale ? d : standard_scale(d);
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Estimator> parse_estimators(const std::vector<std::string>& names) {
  std::vector<Estimator> out;
  for (const auto& n : names) out.push_back(parse_estimator(n));
  return out;
}

// Output file when a path is given, else the command's stream.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw DataError("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct EstimateArgs {
  DataOptions data;
  std::string estimator = "mi";
  std::size_t bins = 10;
  std::size_t trees = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string params_out;
};

int run_estimate(const EstimateArgs& a, std::ostream& out) {
  const Dataset d = load(a.data);
  RelevanceParams params;
  params.mi_bins = a.bins;
  params.forest.n_trees = a.trees;
  params.forest.seed = a.seed;
  const Estimator est = parse_estimator(a.estimator);
  CpuTimer timer;
  const RelevanceVector rel = relevance_all(d, est, params);
  const double cpu = timer.elapsed();

  Output csv(a.out, out);
  csv.get() << "feature_name,relevance\n";
  for (std::size_t c = 0; c < d.n_cols(); ++c) csv.get() << d.feature_names[c] << ',' << fmt_real(rel.values[c]) << '\n';

  const std::string sidecar = !a.params_out.empty() ? a.params_out : (a.out.empty() ? "" : a.out + ".json");
  if (!sidecar.empty()) {
    nlohmann::json j{{"dataset", d.name},
                     {"estimator", to_string(est)},
                     {"params", rel.params},
                     {"n_rows", d.n_rows()},
                     {"n_cols", d.n_cols()},
                     {"scaled", !a.data.no_scale},
                     {"seed", a.seed},
                     {"cpu_time_seconds", cpu}};
    Output side(sidecar, out);
    side.get() << j.dump(2) << '\n';
  }
  return kExitOk;
}

struct SelectArgs {
  DataOptions data;
  std::string algo = "kgroups";
  std::string estimator = "mi";
  std::size_t k = 10;
  double alpha = 1.0;
  std::string form = "diff";
  double beta = 1.0;
  std::string redundancy;
  bool sum_redundancy = false;
  std::vector<std::string> tie_breakers;
  bool tie_breakers_given = false;
  std::uint64_t seed = 0;
  std::size_t bins = 10;
  std::size_t trees = 100;
  bool smoothing = false;
  std::string out;
};

int run_select(const SelectArgs& a, std::ostream& out) {
  if (a.smoothing) throw NotImplemented("--smoothing: bin size smoothing is not implemented; its formula is unspecified");
  const Dataset d = load(a.data);
  RelevanceParams params;
  params.mi_bins = a.bins;
  params.forest.n_trees = a.trees;
  params.forest.seed = a.seed;
  const Estimator est = parse_estimator(a.estimator);

  CpuTimer rel_timer;
  const RelevanceVector rel = relevance_all(d, est, params);
  const double rel_cpu = rel_timer.elapsed();

  SelectionResult result;
  if (a.algo == "kbest") {
    result = select_kbest(rel, a.k);
  } else if (a.algo == "mrmr") {
    MrmrOptions opts;
    opts.form = (a.form == "quot" || a.form == "quotient") ? MrmrForm::QUOTIENT : MrmrForm::DIFFERENCE;
    if (a.form != "diff" && a.form != "difference" && a.form != "quot" && a.form != "quotient") {
      throw InvalidArgument("--form must be diff or quot");
    }
    opts.redundancy = a.redundancy.empty() ? default_redundancy(est) : parse_redundancy(a.redundancy);
    opts.beta = a.beta;
    opts.mean_normalized = !a.sum_redundancy;
    opts.mi_bins = a.bins;
    result = select_mrmr(d, rel, a.k, opts);
  } else if (a.algo == "kgroups") {
    KGroupsOptions opts;
    opts.alpha = a.alpha;
    opts.params = params;
    if (a.tie_breakers_given) {
      opts.tie_breakers = parse_estimators(a.tie_breakers);
    } else {
      opts.tie_breakers = SweepConfig{}.tie_breaker_map.at(est);
    }
    result = select_kgroups(d, rel, a.k, opts);
  } else {
    throw InvalidArgument("--algo must be kbest, mrmr or kgroups");
  }

  nlohmann::json j = result.to_json(&d);
  j["dataset"] = d.name;
  j["seed"] = a.seed;
  j["relevance_params"] = rel.params;
  j["relevance_cpu_seconds"] = rel_cpu;
  j["total_cpu_seconds"] = rel_cpu + result.cpu_time_seconds;
  Output o(a.out, out);
  o.get() << j.dump(2) << '\n';
  return kExitOk;
}

struct BenchmarkArgs {
  std::string config_path;
  std::vector<std::string> data;
  std::string label_col;
  std::vector<std::string> estimators;
  std::vector<std::string> algorithms;
  std::vector<std::string> classifiers;
  std::vector<double> alphas;
  std::size_t k_min = 0, k_max = 0, folds = 0, workers = 0, trees = 0, bins = 0;
  std::int64_t seed = -1;
  std::string output_dir;
  bool scale_per_fold = false, select_per_fold = false, no_scale = false, smoothing = false;
};

SweepConfig build_config(const BenchmarkArgs& a) {
  nlohmann::json file = nlohmann::json::object();
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw DataError("cannot open config " + a.config_path);
    file = nlohmann::json::parse(in);
  }
  SweepConfig c = SweepConfig::from_json(file);
  if (!a.data.empty()) c.datasets.assign(a.data.begin(), a.data.end());
  if (!a.label_col.empty()) c.label_col = a.label_col;
  if (!a.estimators.empty()) c.estimators = parse_estimators(a.estimators);
  if (!a.algorithms.empty()) c.algorithms = a.algorithms;
  if (!a.classifiers.empty()) {
    c.classifiers.clear();
    for (const auto& n : a.classifiers) c.classifiers.push_back(parse_classifier(n));
  }
  if (!a.alphas.empty()) c.alpha_grid = a.alphas;
  if (a.k_min > 0) c.k_min = a.k_min;
  if (a.k_max > 0) c.k_max = a.k_max;
  if (a.folds > 0) c.n_folds = a.folds;
  if (a.workers > 0) c.workers = a.workers;
  if (a.trees > 0) c.n_trees = a.trees;
  if (a.bins > 0) c.mi_bins = a.bins;
  if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
  if (!a.output_dir.empty()) c.output_dir = a.output_dir;
  if (a.scale_per_fold) c.scale_per_fold = true;
  if (a.select_per_fold) c.select_per_fold = true;
  if (a.no_scale) c.scale = false;
  if (a.smoothing) c.bin_smoothing = true;
  if (c.datasets.empty()) throw InvalidArgument("no datasets given (--data or config 'datasets')");
  c.validate();
  return c;
}

int run_benchmark(const BenchmarkArgs& a, std::ostream& out) {
  const SweepConfig config = build_config(a);
  std::filesystem::create_directories(config.output_dir);
  const auto records_path = config.output_dir / "records.jsonl";
  {
    std::ofstream cfg(config.output_dir / "config.json");
    cfg << config.to_json().dump(2) << '\n';
  }

  std::set<std::string> completed;
  for (const auto& r : read_records(records_path)) completed.insert(r.key());

  bool dangling = false;  // an interrupted run may leave a partial last line
  if (std::ifstream prev(records_path, std::ios::binary); prev && prev.seekg(0, std::ios::end).tellg() > 0) {
    prev.seekg(-1, std::ios::end);
    dangling = prev.get() != '\n';
  }
  std::ofstream sink_file(records_path, std::ios::app);
  if (!sink_file) throw DataError("cannot write " + records_path.string());
  if (dangling) sink_file << '\n';
  const auto stats = run_sweep(config, [&](const BenchmarkRecord& r) {
    sink_file << r.to_json().dump() << '\n';
    sink_file.flush();
  }, completed);

  out << "cells: " << stats.cells_total << " total, " << stats.cells_run << " run, " << stats.cells_skipped
      << " already present\n"
      << "k range: [" << stats.k_min << ", " << stats.k_max << "]\n"
      << "records: " << records_path.string() << '\n';
  if (stats.datasets_failed > 0) {
    out << "datasets failed to load: " << stats.datasets_failed << '\n';
    return kExitData;
  }
  return kExitOk;
}

struct ReportArgs {
  std::string records = "results/records.jsonl";
  std::string output_dir = "results/report";
};

int run_report(const ReportArgs& a, std::ostream& out) {
  const auto records = read_records(a.records);
  if (records.empty()) throw DataError("no records in " + a.records);
  const Report report = best_config_report(records);
  write_report(report, a.output_dir);
  out << "wrote " << report.best_overall.size() << " best configurations to " << a.output_dir << '\n';
  return kExitOk;
}

struct PlotArgs {
  std::string kind = "nselected";
  std::string records = "results/records.jsonl";
  DataOptions data;
  std::string estimator = "mi";
  std::size_t k = 20;
  std::vector<double> alphas{1.0};
  std::size_t bins = 10;
  std::size_t trees = 100;
  std::uint64_t seed = 0;
  std::string out;
};

int run_plotdata(const PlotArgs& a, std::ostream& out) {
  Output o(a.out, out);
  if (a.kind == "nselected") {
    const auto records = read_records(a.records);
    if (records.empty()) throw DataError("no records in " + a.records);
    write_nselected_plotdata(best_config_report(records), o.get());
    return kExitOk;
  }
  if (a.kind != "bins") throw InvalidArgument("--kind must be nselected or bins");
  if (a.data.path.empty()) throw InvalidArgument("--kind bins needs --data");
  const Dataset d = load(a.data);
  RelevanceParams params;
  params.mi_bins = a.bins;
  params.forest.n_trees = a.trees;
  params.forest.seed = a.seed;
  const auto rel = relevance_all(d, parse_estimator(a.estimator), params);
  o.get() << "alpha,bin,lower_edge,upper_edge,n_features\n";
  for (const double alpha : a.alphas) {
    const auto scheme = compute_bins(rel, a.k, alpha);
    const auto counts = scheme.bin_counts();
    for (std::size_t j = 0; j < scheme.k; ++j) {
      const double lower = j == 0 ? scheme.rel_min : scheme.edges[j - 1];
      o.get() << fmt_real(alpha) << ',' << j << ',' << fmt_real(lower) << ',' << fmt_real(scheme.edges[j]) << ','
              << counts[j] << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Filter feature selection with KGroups, KBest and mRMR", "kgroups"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "per-feature relevance scores as CSV");
  add_data_options(estimate, est.data);
  estimate->add_option("--estimator", est.estimator, "mi | fvalue | gini | cosine");
  estimate->add_option("--bins", est.bins, "MI discretization bins");
  estimate->add_option("--trees", est.trees, "random forest size for gini");
  estimate->add_option("--seed", est.seed);
  estimate->add_option("--out", est.out, "CSV path (default stdout); params go to <out>.json");
  estimate->add_option("--params-out", est.params_out, "JSON sidecar path");

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "run one selector and print the result as JSON");
  add_data_options(select, sel.data);
  select->add_option("--algo", sel.algo, "kbest | mrmr | kgroups");
  select->add_option("--estimator", sel.estimator, "mi | fvalue | gini | cosine");
  select->add_option("--k", sel.k);
  select->add_option("--alpha", sel.alpha, "KGroups bin power");
  select->add_option("--form", sel.form, "mRMR form: diff | quot");
  select->add_option("--beta", sel.beta, "mRMR redundancy weight");
  select->add_option("--redundancy", sel.redundancy, "mi_pair | abs_pearson (default by estimator)");
  select->add_flag("--sum-redundancy", sel.sum_redundancy, "do not average redundancy over the selected set");
  auto* tb = select->add_option("--tie-breakers", sel.tie_breakers, "comma-separated estimators")->delimiter(',');
  select->add_option("--seed", sel.seed);
  select->add_option("--bins", sel.bins);
  select->add_option("--trees", sel.trees);
  select->add_flag("--smoothing", sel.smoothing, "bin size smoothing (reserved)");
  select->add_option("--out", sel.out);

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "run the cross-validated sweep, appending JSON lines");
  benchmark->add_option("--config", bench.config_path, "JSON config file");
  benchmark->add_option("--data", bench.data, "dataset CSV (repeatable)");
  benchmark->add_option("--label-col", bench.label_col);
  benchmark->add_option("--estimators", bench.estimators)->delimiter(',');
  benchmark->add_option("--algorithms", bench.algorithms, "kbest,mrmr,kgroups")->delimiter(',');
  benchmark->add_option("--classifiers", bench.classifiers, "knn,gnb,rf")->delimiter(',');
  benchmark->add_option("--alphas", bench.alphas)->delimiter(',');
  benchmark->add_option("--k-min", bench.k_min);
  benchmark->add_option("--k-max", bench.k_max);
  benchmark->add_option("--folds", bench.folds);
  benchmark->add_option("--workers", bench.workers, "worker threads (default: KGROUPS_WORKERS or all cores)");
  benchmark->add_option("--trees", bench.trees);
  benchmark->add_option("--bins", bench.bins);
  benchmark->add_option("--seed", bench.seed);
  benchmark->add_option("--output-dir", bench.output_dir);
  benchmark->add_flag("--scale-per-fold", bench.scale_per_fold);
  benchmark->add_flag("--select-per-fold", bench.select_per_fold);
  benchmark->add_flag("--no-scale", bench.no_scale);
  benchmark->add_flag("--smoothing", bench.smoothing, "bin size smoothing (reserved)");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "best-configuration tables from benchmark records");
  report->add_option("--records", rep.records);
  report->add_option("--output-dir", rep.output_dir);

  PlotArgs plot;
  auto* plotdata = app.add_subcommand("plotdata", "emit plot-ready CSV data");
  plotdata->add_option("--kind", plot.kind, "nselected | bins");
  plotdata->add_option("--records", plot.records);
  plotdata->add_option("--data", plot.data.path);
  plotdata->add_option("--label-col", plot.data.label_col);
  plotdata->add_flag("--no-scale", plot.data.no_scale);
  plotdata->add_option("--estimator", plot.estimator);
  plotdata->add_option("--k", plot.k);
  plotdata->add_option("--alphas", plot.alphas)->delimiter(',');
  plotdata->add_option("--bins", plot.bins);
  plotdata->add_option("--trees", plot.trees);
  plotdata->add_option("--seed", plot.seed);
  plotdata->add_option("--out", plot.out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*estimate) return run_estimate(est, out);
    if (*select) {
      sel.tie_breakers_given = tb->count() > 0;
      return run_select(sel, out);
    }
    if (*benchmark) return run_benchmark(bench, out);
    if (*report) return run_report(rep, out);
    if (*plotdata) return run_plotdata(plot, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NotImplemented& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace kgroups
