#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "loct/error.hpp"
#include "loct/formulation.hpp"
#include "loct/logistic.hpp"
#include "oracles.hpp"

using namespace loct;

namespace {

struct Problem {
  RowMatrix x;
  std::vector<int> y;
  std::vector<std::size_t> rows;
};

// Overlapping Gaussian classes, so the l1-logistic optimum is finite.
Problem noisy(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Problem pr;
  pr.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = g(rng) > 0 ? 1 : -1;
    for (std::size_t j = 0; j < p; ++j) {
      pr.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g(rng) + (j == 0 ? 0.8 * label : 0.0);
    }
    pr.y.push_back(label);
  }
  pr.rows.resize(n);
  std::iota(pr.rows.begin(), pr.rows.end(), std::size_t{0});
  return pr;
}

// Gradient of C * sum log(1 + exp(-y (w.x + b))) with respect to (w, b).
std::pair<Eigen::VectorXd, double> smooth_gradient(const Problem& pr, double c, const Eigen::VectorXd& w, double b) {
  Eigen::VectorXd gw = Eigen::VectorXd::Zero(w.size());
  double gb = 0.0;
  for (const auto i : pr.rows) {
    const auto r = static_cast<Eigen::Index>(i);
    const double m = pr.y[i] * (pr.x.row(r).dot(w) + b);
    const double coef = -c * pr.y[i] / (1.0 + std::exp(m));
    gw += coef * pr.x.row(r).transpose();
    gb += coef;
  }
  return {gw, gb};
}

}  // namespace

TEST_CASE("l1-logistic fits satisfy the subgradient optimality conditions") {
  for (const double c : {0.1, 1.0, 10.0}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto pr = noisy(60, 5, seed);
      FitOptions tight;
      tight.relative_tolerance = 1e-15;
      tight.max_iterations = 200000;
      const auto fit = fit_l1_logistic(pr.x, pr.y, pr.rows, c, tight);
      const auto [gw, gb] = smooth_gradient(pr, c, fit.weights, fit.bias);
      CAPTURE(c);
      CAPTURE(seed);
      const double tol = 1e-5 * std::max(1.0, c);
      CHECK(std::abs(gb) < tol);
      for (Eigen::Index j = 0; j < gw.size(); ++j) {
        const double w = fit.weights[j];
        if (w != 0.0) {
          CHECK(std::abs(gw[j] + (w > 0 ? 1.0 : -1.0)) < tol);
        } else {
          CHECK(std::abs(gw[j]) <= 1.0 + tol);
        }
      }
      CHECK(fit.objective == doctest::Approx(l1_logistic_objective(pr.x, pr.y, pr.rows, c, fit.weights, fit.bias)));
    }
  }
}

TEST_CASE("default stopping rule lands close to the tight optimum") {
  const auto pr = noisy(60, 5, 1);
  FitOptions tight;
  tight.relative_tolerance = 1e-15;
  tight.max_iterations = 200000;
  const auto best = fit_l1_logistic(pr.x, pr.y, pr.rows, 1.0, tight);
  const auto fit = fit_l1_logistic(pr.x, pr.y, pr.rows, 1.0);
  CHECK(fit.objective >= best.objective - 1e-9);
  CHECK(fit.objective <= best.objective * (1.0 + 1e-6));
}

TEST_CASE("small C drives every weight to zero") {
  const auto pr = noisy(40, 3, 1);
  const auto fit = fit_l1_logistic(pr.x, pr.y, pr.rows, 1e-4);
  CHECK(fit.weights.isZero());
  // The bias is then the log-odds of the classes.
  const double pos = static_cast<double>(std::count(pr.y.begin(), pr.y.end(), 1));
  CHECK(fit.bias == doctest::Approx(std::log(pos / (40.0 - pos))).epsilon(1e-5));
}

TEST_CASE("flipping labels negates the logistic fit") {
  auto pr = noisy(50, 4, 7);
  const auto fit = fit_l1_logistic(pr.x, pr.y, pr.rows, 2.0);
  for (auto& y : pr.y) y = -y;
  const auto flipped = fit_l1_logistic(pr.x, pr.y, pr.rows, 2.0);
  CHECK((fit.weights + flipped.weights).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(std::abs(fit.bias + flipped.bias) < 1e-5);
  CHECK(fit.objective == doctest::Approx(flipped.objective).epsilon(1e-9));
}

TEST_CASE("single-class inputs give a constant classifier") {
  auto pr = noisy(10, 2, 3);
  std::fill(pr.y.begin(), pr.y.end(), -1);
  auto fit = fit_l1_logistic(pr.x, pr.y, pr.rows, 1.0);
  CHECK(fit.weights.isZero());
  CHECK(fit.bias == -kSingleClassBias);
  std::fill(pr.y.begin(), pr.y.end(), 1);
  fit = fit_l1_hinge(pr.x, pr.y, pr.rows, 1.0);
  CHECK(fit.weights.isZero());
  CHECK(fit.bias == kSingleClassBias);
}

TEST_CASE("support restriction keeps other weights at zero") {
  const auto pr = noisy(60, 4, 2);
  FitOptions options;
  options.restrict_support = true;
  options.support = {2};
  const auto fit = fit_l1_logistic(pr.x, pr.y, pr.rows, 5.0, options);
  CHECK(fit.weights[0] == 0.0);
  CHECK(fit.weights[1] == 0.0);
  CHECK(fit.weights[3] == 0.0);
  const auto hinge = fit_l1_hinge(pr.x, pr.y, pr.rows, 5.0, options);
  CHECK(hinge.weights[0] == 0.0);
  CHECK(hinge.weights[3] == 0.0);
}

TEST_CASE("row subsets are honoured") {
  const auto pr = noisy(60, 3, 9);
  std::vector<std::size_t> half(pr.rows.begin(), pr.rows.begin() + 30);
  const auto fit = fit_l1_logistic(pr.x, pr.y, half, 1.0);
  const auto sub_x = pr.x.topRows(30).eval();
  std::vector<int> sub_y(pr.y.begin(), pr.y.begin() + 30);
  const auto direct = fit_l1_logistic(sub_x, sub_y, half, 1.0);
  CHECK((fit.weights - direct.weights).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("l1-hinge fits approach the linear-programming optimum") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto pr = noisy(30, 3, 20 + seed);
    const double c = 1.0;
    const std::size_t p = 3;
    const std::size_t n = pr.rows.size();
    // Columns: wpos (p), wneg (p), b, xi (n).
    oracle::DenseLp lp;
    const std::size_t cols = 2 * p + 1 + n;
    lp.c.assign(cols, 0.0);
    lp.lower.assign(cols, 0.0);
    lp.upper.assign(cols, 50.0);
    for (std::size_t j = 0; j < 2 * p; ++j) lp.c[j] = 1.0;
    lp.lower[2 * p] = -50.0;
    for (std::size_t i = 0; i < n; ++i) {
      lp.c[2 * p + 1 + i] = c;
      lp.upper[2 * p + 1 + i] = 1e3;
      std::vector<double> row(cols, 0.0);
      for (std::size_t j = 0; j < p; ++j) {
        const double v = pr.y[i] * pr.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        row[j] = v;
        row[p + j] = -v;
      }
      row[2 * p] = pr.y[i];
      row[2 * p + 1 + i] = 1.0;
      lp.a.push_back(row);
      lp.sense.push_back(oracle::RowSense::ge);
      lp.rhs.push_back(1.0);
    }
    const auto best = oracle::tableau_simplex(lp);
    REQUIRE(best.feasible);
    const auto fit = fit_l1_hinge(pr.x, pr.y, pr.rows, c);
    const double value = l1_hinge_objective(pr.x, pr.y, pr.rows, c, fit.weights, fit.bias);
    CHECK(value >= best.objective - 1e-9);
    CHECK(value <= best.objective * 1.02 + 1e-6);
    // Never worse than the logistic starting point.
    const auto start = fit_l1_logistic(pr.x, pr.y, pr.rows, c);
    CHECK(value <= l1_hinge_objective(pr.x, pr.y, pr.rows, c, start.weights, start.bias) + 1e-12);
  }
}

TEST_CASE("invalid fit inputs are rejected") {
  const auto pr = noisy(10, 2, 3);
  CHECK_THROWS_AS(fit_l1_logistic(pr.x, pr.y, pr.rows, 0.0), TrainingError);
  CHECK_THROWS_AS(fit_l1_logistic(pr.x, pr.y, std::vector<std::size_t>{}, 1.0), TrainingError);
  CHECK_THROWS_AS(fit_l1_logistic(pr.x, pr.y, std::vector<std::size_t>{10}, 1.0), TrainingError);
  FitOptions bad;
  bad.restrict_support = true;
  bad.support = {5};
  CHECK_THROWS_AS(fit_l1_hinge(pr.x, pr.y, pr.rows, 1.0, bad), TrainingError);
}
