#include "kgroups/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "kgroups/errors.hpp"
#include "kgroups/rng.hpp"

namespace kgroups {

void log_warning(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

Matrix Matrix::subset(std::span<const std::size_t> row_ids, std::span<const std::size_t> col_ids) const {
  Matrix out(row_ids.size(), col_ids.size());
  for (std::size_t c = 0; c < col_ids.size(); ++c) {
    const auto src = column(col_ids[c]);
    auto dst = out.column(c);
    for (std::size_t r = 0; r < row_ids.size(); ++r) dst[r] = src[row_ids[r]];
  }
  return out;
}

void Dataset::validate() const {
  if (n_rows() < 2) throw DataError("dataset must have at least 2 rows");
  if (n_cols() < 1) throw DataError("dataset must have at least 1 feature column");
  if (labels.size() != n_rows()) throw DataError("label count does not match row count");
  if (feature_names.size() != n_cols()) throw DataError("feature name count does not match column count");
  if (class_names.size() < 2) throw DataError("dataset must have at least 2 classes");
  std::vector<bool> seen(class_names.size(), false);
  for (const ClassId y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= class_names.size()) throw DataError("label id out of range");
    seen[static_cast<std::size_t>(y)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw DataError("a class has no rows");
  for (std::size_t c = 0; c < n_cols(); ++c) {
    for (const double v : features.column(c)) {
      if (!std::isfinite(v)) throw DataError("non-finite value in column " + feature_names[c]);
    }
  }
}

LabelColumn LabelColumn::parse(const std::string& text) {
  if (text.empty()) return last();
  std::size_t idx = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, idx);
  if (ec == std::errc() && ptr == end) return {text, idx};
  return by_name(text);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::string cell_location(std::size_t line_no, std::size_t col, std::string_view header) {
  std::ostringstream os;
  os << "row " << line_no << ", column " << (col + 1) << " ('" << header << "')";
  return os.str();
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& name, const LabelColumn& label) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      const auto line = rest.substr(0, nl);
      if (!trim(line).empty()) lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.empty()) throw DataError(name + ": empty file");

  const auto header = split_fields(lines.front());
  const std::size_t width = header.size();
  if (width < 2) throw DataError(name + ": need at least one feature column and a label column");

  std::size_t label_col = width - 1;
  if (label.name) {
    const auto it = std::find(header.begin(), header.end(), std::string_view(*label.name));
    if (it != header.end()) {
      label_col = static_cast<std::size_t>(it - header.begin());
    } else if (label.index) {
      label_col = *label.index;
    } else {
      throw DataError(name + ": label column '" + *label.name + "' not found in header");
    }
  } else if (label.index) {
    label_col = *label.index;
  }
  if (label_col >= width) throw DataError(name + ": label column index out of range");

  const std::size_t n_rows = lines.size() - 1;
  const std::size_t n_cols = width - 1;
  Dataset d;
  d.name = name;
  d.features = Matrix(n_rows, n_cols);
  d.labels.reserve(n_rows);
  for (std::size_t c = 0; c < width; ++c) {
    if (c != label_col) d.feature_names.emplace_back(header[c]);
  }

  std::unordered_map<std::string, ClassId> class_ids;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t line_no = r + 2;  // 1-based, header is line 1
    const auto fields = split_fields(lines[r + 1]);
    if (fields.size() != width) {
      std::ostringstream os;
      os << name << ": row " << line_no << " has " << fields.size() << " fields, expected " << width;
      throw DataError(os.str());
    }
    std::size_t out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) {
        const std::string key(fields[c]);
        auto [it, inserted] = class_ids.try_emplace(key, static_cast<ClassId>(class_ids.size()));
        if (inserted) d.class_names.push_back(key);
        d.labels.push_back(it->second);
        continue;
      }
      auto cell = fields[c];
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw DataError(name + ": cannot parse '" + std::string(fields[c]) + "' as a number at " +
                        cell_location(line_no, c, header[c]));
      }
      if (!std::isfinite(value)) {
        throw DataError(name + ": non-finite value '" + std::string(fields[c]) + "' at " +
                        cell_location(line_no, c, header[c]));
      }
      d.features(r, out_col++) = value;
    }
  }
  if (d.class_names.size() < 2) {
    throw DataError(name + ": label column has fewer than 2 distinct values");
  }
  d.validate();
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), path.stem().string(), label);
}

ScalingFactors ScalingFactors::fit(const Matrix& x) {
  ScalingFactors f;
  f.mean.resize(x.cols());
  f.scale.resize(x.cols());
  const auto n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const auto col = x.column(c);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    double mean = 0.0;
    for (const double v : col) mean += v;
    mean /= n;
    f.mean[c] = mean;
    if (col.empty() || *lo == *hi) {
      f.scale[c] = 0.0;
      continue;
    }
    double ss = 0.0;
    for (const double v : col) ss += (v - mean) * (v - mean);
    f.scale[c] = std::sqrt(ss / n);
  }
  return f;
}

void ScalingFactors::apply(Matrix& x) const {
  for (std::size_t c = 0; c < x.cols(); ++c) {
    auto col = x.column(c);
    for (double& v : col) v = scale[c] == 0.0 ? 0.0 : (v - mean[c]) / scale[c];
  }
}

Dataset standard_scale(const Dataset& d) {
  Dataset out = d;
  ScalingFactors::fit(d.features).apply(out.features);
  return out;
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) rows.push_back(i);
  }
  return rows;
}

FoldPlan make_folds(const Dataset& d, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds == 0) throw InvalidArgument("n_folds must be positive");
  if (n_folds > d.n_rows()) throw InvalidArgument("n_folds exceeds the number of rows");

  std::vector<std::vector<std::size_t>> members(d.n_classes());
  for (std::size_t i = 0; i < d.labels.size(); ++i) members[static_cast<std::size_t>(d.labels[i])].push_back(i);

  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.assignments.assign(d.n_rows(), 0);
  Rng rng(seed);
  std::size_t next_fold = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& rows = members[c];
    if (!rows.empty() && rows.size() < n_folds) {
      log_warning("class '" + d.class_names[c] + "' has " + std::to_string(rows.size()) +
                  " members, fewer than " + std::to_string(n_folds) + " folds");
    }
    fisher_yates(std::span(rows), rng);
    for (const std::size_t row : rows) {
      plan.assignments[row] = next_fold;
      next_fold = (next_fold + 1) % n_folds;
    }
  }
  return plan;
}

}  // namespace kgroups
