#include "loct/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "loct/error.hpp"

namespace loct {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) =
        features.row(static_cast<Eigen::Index>(indices[r]));
    out.labels.push_back(labels[indices[r]]);
  }
  out.feature_names = feature_names;
  out.standardization = standardization;
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label,
                 const std::string& positive_label) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("missing file: {}", path.string()));

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(split_line(line));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw DataError(fmt::format("empty file: {}", path.string()));

  const std::size_t width = rows.front().size();
  if (width < 2) {
    throw DataError("need at least one feature column and one label column");
  }

  bool has_header = false;
  std::size_t label_col = 0;
  if (const auto* name = std::get_if<std::string>(&label)) {
    const auto& first = rows.front();
    const auto it = std::find(first.begin(), first.end(), *name);
    if (it == first.end()) {
      throw DataError(fmt::format("label column '{}' not found in header", *name));
    }
    has_header = true;
    label_col = static_cast<std::size_t>(it - first.begin());
  } else {
    const int index = std::get<int>(label);
    const long resolved = index < 0 ? static_cast<long>(width) + index : index;
    if (resolved < 0 || resolved >= static_cast<long>(width)) {
      throw DataError(fmt::format("label column index {} out of range", index));
    }
    label_col = static_cast<std::size_t>(resolved);
    const auto& first = rows.front();
    for (std::size_t c = 0; c < first.size(); ++c) {
      if (c != label_col && !parse_number(first[c])) has_header = true;
    }
  }

  Dataset data;
  const std::size_t p = width - 1;
  const std::size_t begin = has_header ? 1 : 0;
  const std::size_t n = rows.size() - begin;
  if (n == 0) throw DataError("file has a header but no data rows");

  if (has_header) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c != label_col) data.feature_names.push_back(rows.front()[c]);
    }
  } else {
    for (std::size_t j = 0; j < p; ++j) data.feature_names.push_back(fmt::format("x{}", j));
  }

  data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<std::string> raw_labels;
  raw_labels.reserve(n);
  for (std::size_t r = begin; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const std::size_t row = r - begin;
    if (cells.size() != width) {
      throw DataError(fmt::format("row {} (line {}): expected {} cells, found {}",
                                  row, line_numbers[r], width, cells.size()));
    }
    std::size_t j = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (cells[c].empty()) {
        throw DataError(fmt::format("row {} (line {}): missing cell in column {}",
                                    row, line_numbers[r], c));
      }
      if (c == label_col) {
        raw_labels.push_back(cells[c]);
        continue;
      }
      const auto value = parse_number(cells[c]);
      if (!value || !std::isfinite(*value)) {
        throw DataError(fmt::format(
            "row {} (line {}), column {}: non-numeric feature cell '{}'", row,
            line_numbers[r], c, cells[c]));
      }
      data.features(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j++)) = *value;
    }
  }

  const std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
  if (distinct.size() > 2) {
    throw DataError(fmt::format("non-binary labels: {} distinct values in label column",
                                distinct.size()));
  }
  if (!distinct.contains(positive_label)) {
    throw DataError(fmt::format("positive label '{}' does not occur in label column",
                                positive_label));
  }
  data.labels.reserve(n);
  for (const auto& raw : raw_labels) data.labels.push_back(raw == positive_label ? 1 : -1);
  return data;
}

Standardization compute_standardization(const Dataset& data) {
  const auto n = static_cast<double>(data.rows());
  Standardization stats;
  stats.mean.resize(data.cols());
  stats.stddev.resize(data.cols());
  for (std::size_t j = 0; j < data.cols(); ++j) {
    const auto col = data.features.col(static_cast<Eigen::Index>(j));
    const double mean = n > 0 ? col.sum() / n : 0.0;
    const double var = n > 0 ? (col.array() - mean).square().sum() / n : 0.0;
    const double sd = std::sqrt(var);
    stats.mean[j] = mean;
    stats.stddev[j] = sd < kStddevFloor ? 1.0 : sd;
  }
  return stats;
}

Dataset apply_standardization(const Dataset& data, const Standardization& stats) {
  if (stats.mean.size() != data.cols()) {
    throw DataError(fmt::format("standardization has {} columns, data has {}",
                                stats.mean.size(), data.cols()));
  }
  Dataset out = data;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    auto col = out.features.col(static_cast<Eigen::Index>(j));
    col = (col.array() - stats.mean[j]) / stats.stddev[j];
  }
  out.standardization = stats;
  return out;
}

Dataset standardize(const Dataset& data, const Dataset* stats_from) {
  if (stats_from != nullptr && stats_from->cols() != data.cols()) {
    throw DataError("standardize: feature count mismatch");
  }
  return apply_standardization(
      data, compute_standardization(stats_from != nullptr ? *stats_from : data));
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

SplitIndices train_test_split_indices(std::size_t n, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw DataError("test fraction must lie in (0, 1)");
  }
  if (n < 2) throw DataError("need at least two rows to split");
  const auto test_size =
      static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
  if (test_size == 0 || test_size >= n) {
    throw DataError(fmt::format("degenerate split: {} test rows out of {}", test_size, n));
  }
  const auto perm = shuffled_indices(n, spec.seed);
  SplitIndices out;
  out.test.assign(perm.begin(), perm.begin() + static_cast<long>(test_size));
  out.train.assign(perm.begin() + static_cast<long>(test_size), perm.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, const SplitSpec& spec) {
  const auto split = train_test_split_indices(data.rows(), spec);
  return {data.subset(split.train), data.subset(split.test)};
}

std::vector<Fold> kfolds(std::size_t n, int k, std::uint64_t seed) {
  if (k <= 0) throw DataError("fold count must be positive");
  if (static_cast<std::size_t>(k) > n) {
    throw DataError(fmt::format("fold count {} exceeds row count {}", k, n));
  }
  const auto perm = shuffled_indices(n, seed);
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].validation.assign(perm.begin() + static_cast<long>(pos),
                               perm.begin() + static_cast<long>(pos + size));
    std::sort(folds[f].validation.begin(), folds[f].validation.end());
    pos += size;
  }
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g == f) continue;
      folds[f].train.insert(folds[f].train.end(), folds[g].validation.begin(),
                            folds[g].validation.end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

}  // namespace loct
