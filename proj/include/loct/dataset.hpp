#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace loct {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Population standard deviations below this value are treated as 1 so that
// constant columns map to all zeros.
inline constexpr double kStddevFloor = 1e-12;

struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;  // already floored, never zero
};

// Binary classification data: n rows of p real features, labels in {-1,+1}.
struct Dataset {
  RowMatrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::optional<Standardization> standardization;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  // Copy of the selected rows; feature names and standardization carry over.
  Dataset subset(std::span<const std::size_t> indices) const;
};

// A label column is addressed either by header name or by position. Negative
// positions count from the end (-1 is the last column).
using LabelColumn = std::variant<std::string, int>;

// Reads a comma-separated file. The first row is a header when it names the
// label column or when any of its feature cells is non-numeric.
Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label,
                 const std::string& positive_label);

// (x - mean) / stddev per column. Statistics come from `stats_from` when given,
// otherwise from `data`; they are stored on the result for reuse on test data.
Dataset standardize(const Dataset& data,
                    const Dataset* stats_from = nullptr);

// Applies previously computed statistics.
Dataset apply_standardization(const Dataset& data, const Standardization& stats);

Standardization compute_standardization(const Dataset& data);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  int fold_count = 4;
};

// Deterministic Fisher-Yates permutation of 0..n-1 driven by a 64-bit
// Mersenne twister. Identical on every platform.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Test size is round(test_fraction * n); both sides must be non-empty.
SplitIndices train_test_split_indices(std::size_t n, const SplitSpec& spec);

std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             const SplitSpec& spec);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// k folds partitioning the rows; sizes differ by at most one.
std::vector<Fold> kfolds(std::size_t n, int k, std::uint64_t seed);

inline std::vector<Fold> kfolds(const Dataset& data, int k,
                                std::uint64_t seed) {
  return kfolds(data.rows(), k, seed);
}

}  // namespace loct
