#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgroups/matrix.hpp"

namespace kgroups {

using ClassId = int;

/// Numeric feature table with encoded class labels.
///
/// Invariants (checked by validate()): at least 2 rows and 1 column, one label
/// per row, at least two classes each present at least once, all values finite.
struct Dataset {
  std::string name;
  Matrix features;
  std::vector<std::string> feature_names;
  std::vector<ClassId> labels;
  std::vector<std::string> class_names;

  [[nodiscard]] std::size_t n_rows() const noexcept { return features.rows(); }
  [[nodiscard]] std::size_t n_cols() const noexcept { return features.cols(); }
  [[nodiscard]] std::size_t n_classes() const noexcept { return class_names.size(); }

  /// Throws DataError when an invariant does not hold.
  void validate() const;
};

/// Label column selector: a header name, or a zero-based index. Empty means
/// the last column.
struct LabelColumn {
  std::optional<std::string> name;
  std::optional<std::size_t> index;

  static LabelColumn last() { return {}; }
  static LabelColumn by_name(std::string n) { return {std::move(n), std::nullopt}; }
  static LabelColumn by_index(std::size_t i) { return {std::nullopt, i}; }
  /// Header name if it matches one, otherwise a non-negative integer index.
  static LabelColumn parse(const std::string& text);
};

/// Reads a comma-separated file with one header row. Labels are encoded to
/// 0..C-1 in order of first appearance.
Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label = LabelColumn::last());
Dataset parse_csv(const std::string& text, const std::string& name,
                  const LabelColumn& label = LabelColumn::last());

/// Per-column z-scores with the population standard deviation. Constant
/// columns become all zeros.
Dataset standard_scale(const Dataset& d);

/// Column means and population standard deviations used by standard_scale;
/// exposed so fold-wise scaling can fit on train rows and apply to test rows.
struct ScalingFactors {
  std::vector<double> mean;
  std::vector<double> scale;  // 0 marks a constant column

  static ScalingFactors fit(const Matrix& x);
  void apply(Matrix& x) const;
};

struct FoldPlan {
  std::size_t n_folds = 0;
  std::vector<std::size_t> assignments;
  std::uint64_t seed = 0;

  [[nodiscard]] std::vector<std::size_t> test_rows(std::size_t fold) const;
  [[nodiscard]] std::vector<std::size_t> train_rows(std::size_t fold) const;
};

/// Stratified, seeded fold assignment. Each class is shuffled and dealt
/// round-robin, continuing from where the previous class stopped, so
/// per-class counts and fold sizes both differ by at most one.
FoldPlan make_folds(const Dataset& d, std::size_t n_folds, std::uint64_t seed);

}  // namespace kgroups
