#pragma once

#include <cstdint>
#include <random>

#include "loct/dataset.hpp"

namespace testing_support {

// Four Gaussian clusters centred at (+-1, +-1) with equal shares of points.
// Points in the (+,+) and (-,-) quadrants are labelled +1, the others -1.
inline loct::Dataset xor_clusters(std::size_t n, std::uint64_t seed, double stddev = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, stddev);
  loct::Dataset data;
  data.features.resize(static_cast<Eigen::Index>(n), 2);
  data.feature_names = {"x1", "x2"};
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = (i % 2 == 0) ? 1.0 : -1.0;
    const double cy = ((i / 2) % 2 == 0) ? 1.0 : -1.0;
    const auto r = static_cast<Eigen::Index>(i);
    data.features(r, 0) = cx + noise(rng);
    data.features(r, 1) = cy + noise(rng);
    data.labels.push_back(cx * cy > 0 ? 1 : -1);
  }
  return data;
}

// Linearly separable cloud: label is the sign of x1 + x2 with a margin gap.
inline loct::Dataset separable_cloud(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  loct::Dataset data;
  data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) data.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < p; ++j) data.features(r, static_cast<Eigen::Index>(j)) = g(rng);
    const int label = (i % 2 == 0) ? 1 : -1;
    data.features(r, 0) += 1.5 * label;
    data.labels.push_back(label);
  }
  return data;
}

}  // namespace testing_support
