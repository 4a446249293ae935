#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "loct/dataset.hpp"

namespace loct {

// Bias returned for single-class inputs, signed like the class.
inline constexpr double kSingleClassBias = 10.0;

struct LinearFit {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double objective = 0.0;  // value of the fitted objective
  int iterations = 0;
};

struct FitOptions {
  double relative_tolerance = 1e-8;
  int max_iterations = 5000;
  // When set, only these feature columns may carry nonzero weights.
  std::vector<int> support;
  bool restrict_support = false;
};

// Minimizes C * sum_i log(1 + exp(-y_i (w.x_i + b))) + ||w||_1 over the given
// rows with accelerated proximal gradient and backtracking. The bias is not
// penalized.
LinearFit fit_l1_logistic(const RowMatrix& x, std::span<const int> labels,
                          std::span<const std::size_t> rows, double c,
                          const FitOptions& options = {});

// Same objective with the hinge loss max(0, 1 - y (w.x + b)), minimized by a
// proximal subgradient method that keeps the best iterate.
LinearFit fit_l1_hinge(const RowMatrix& x, std::span<const int> labels,
                       std::span<const std::size_t> rows, double c,
                       const FitOptions& options = {});

// Objectives evaluated exactly, for comparisons between fits.
double l1_logistic_objective(const RowMatrix& x, std::span<const int> labels,
                             std::span<const std::size_t> rows, double c,
                             const Eigen::VectorXd& w, double b);
double l1_hinge_objective(const RowMatrix& x, std::span<const int> labels,
                          std::span<const std::size_t> rows, double c,
                          const Eigen::VectorXd& w, double b);

}  // namespace loct
