#include "loct/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "loct/error.hpp"
#include "loct/formulation.hpp"

namespace loct {
namespace {

struct Problem {
  Eigen::MatrixXd x;  // rows x p (restricted to the support when given)
  Eigen::VectorXd y;
  std::vector<int> columns;  // original feature index of each column
};

Problem gather(const RowMatrix& x, std::span<const int> labels,
               std::span<const std::size_t> rows, const FitOptions& options) {
  Problem p;
  if (options.restrict_support) {
    p.columns = options.support;
  } else {
    p.columns.resize(static_cast<std::size_t>(x.cols()));
    for (int j = 0; j < static_cast<int>(x.cols()); ++j) p.columns[static_cast<std::size_t>(j)] = j;
  }
  p.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.columns.size()));
  p.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(rows[r]);
    for (std::size_t k = 0; k < p.columns.size(); ++k) {
      p.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = x(i, p.columns[k]);
    }
    p.y[static_cast<Eigen::Index>(r)] = labels[rows[r]];
  }
  return p;
}

// Returns +1/-1 when every label agrees, 0 otherwise.
int single_class(std::span<const int> labels, std::span<const std::size_t> rows) {
  const int first = labels[rows.front()];
  for (const auto i : rows) {
    if (labels[i] != first) return 0;
  }
  return first;
}

LinearFit constant_fit(Eigen::Index p, double bias) {
  LinearFit fit;
  fit.weights = Eigen::VectorXd::Zero(p);
  fit.bias = bias;
  return fit;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

double smooth_logistic(const Problem& p, double c, const Eigen::VectorXd& w, double b) {
  const Eigen::VectorXd m = p.y.cwiseProduct(p.x * w + Eigen::VectorXd::Constant(p.y.size(), b));
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) s += logistic_loss(m[i]);
  return c * s;
}

LinearFit expand(const Problem& p, Eigen::Index full_p, const Eigen::VectorXd& w, double b) {
  LinearFit fit;
  fit.weights = Eigen::VectorXd::Zero(full_p);
  for (std::size_t k = 0; k < p.columns.size(); ++k) {
    fit.weights[p.columns[k]] = w[static_cast<Eigen::Index>(k)];
  }
  fit.bias = b;
  return fit;
}

void check_inputs(const RowMatrix& x, std::span<const int> labels,
                  std::span<const std::size_t> rows, double c, const FitOptions& options) {
  if (!(c > 0.0) || !std::isfinite(c)) throw TrainingError("fit coefficient C must be positive");
  if (labels.size() != static_cast<std::size_t>(x.rows())) {
    throw TrainingError("label count differs from row count");
  }
  for (const auto i : rows) {
    if (i >= labels.size()) throw TrainingError("row index out of range");
  }
  if (options.restrict_support) {
    for (const int j : options.support) {
      if (j < 0 || j >= x.cols()) throw TrainingError("support column out of range");
    }
  }
}

}  // namespace

double l1_logistic_objective(const RowMatrix& x, std::span<const int> labels,
                             std::span<const std::size_t> rows, double c,
                             const Eigen::VectorXd& w, double b) {
  double s = 0.0;
  for (const auto i : rows) {
    const double m = labels[i] * (x.row(static_cast<Eigen::Index>(i)).dot(w) + b);
    s += logistic_loss(m);
  }
  return c * s + w.lpNorm<1>();
}

double l1_hinge_objective(const RowMatrix& x, std::span<const int> labels,
                          std::span<const std::size_t> rows, double c,
                          const Eigen::VectorXd& w, double b) {
  double s = 0.0;
  for (const auto i : rows) {
    const double m = labels[i] * (x.row(static_cast<Eigen::Index>(i)).dot(w) + b);
    s += hinge_loss(m);
  }
  return c * s + w.lpNorm<1>();
}

LinearFit fit_l1_logistic(const RowMatrix& x, std::span<const int> labels,
                          std::span<const std::size_t> rows, double c,
                          const FitOptions& options) {
  check_inputs(x, labels, rows, c, options);
  if (rows.empty()) throw TrainingError("cannot fit a classifier on zero points");
  if (const int cls = single_class(labels, rows); cls != 0) {
    auto fit = constant_fit(x.cols(), cls * kSingleClassBias);
    fit.objective = l1_logistic_objective(x, labels, rows, c, fit.weights, fit.bias);
    return fit;
  }
  const Problem p = gather(x, labels, rows, options);
  const Eigen::Index dim = p.x.cols();
  const double n = static_cast<double>(rows.size());
  const double positives = (p.y.array() > 0).count();

  // Lipschitz constant of the smooth part: C * lambda_max([X 1]^T [X 1]) / 4.
  double lipschitz = 1.0;
  {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(dim + 1);
    double lambda = 0.0;
    for (int it = 0; it < 30; ++it) {
      const Eigen::VectorXd xv = p.x * v.head(dim) + Eigen::VectorXd::Constant(p.x.rows(), v[dim]);
      Eigen::VectorXd next(dim + 1);
      next.head(dim) = p.x.transpose() * xv;
      next[dim] = xv.sum();
      lambda = next.norm();
      if (lambda <= 0.0) break;
      v = next / lambda;
    }
    lipschitz = std::max(1e-12, c * lambda / 4.0);
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  double b = std::log(positives / (n - positives));
  double objective = smooth_logistic(p, c, w, b) + w.lpNorm<1>();
  Eigen::VectorXd yw = w;
  double yb = b;
  double t = 1.0;
  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    // Gradient at the extrapolated point.
    const Eigen::VectorXd m =
        p.y.cwiseProduct(p.x * yw + Eigen::VectorXd::Constant(p.y.size(), yb));
    Eigen::VectorXd coef(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) coef[i] = c * logistic_loss_derivative(m[i]) * p.y[i];
    const Eigen::VectorXd gw = p.x.transpose() * coef;
    const double gb = coef.sum();
    const double g_at_y = smooth_logistic(p, c, yw, yb);

    Eigen::VectorXd nw;
    double nb = 0.0;
    double g_new = 0.0;
    while (true) {
      nw = soft_threshold(yw - gw / lipschitz, 1.0 / lipschitz);
      nb = yb - gb / lipschitz;
      g_new = smooth_logistic(p, c, nw, nb);
      const Eigen::VectorXd dw = nw - yw;
      const double db = nb - yb;
      const double model = g_at_y + gw.dot(dw) + gb * db +
                           0.5 * lipschitz * (dw.squaredNorm() + db * db);
      if (g_new <= model + 1e-12 * std::abs(model)) break;
      lipschitz *= 2.0;
    }
    const double next_objective = g_new + nw.lpNorm<1>();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (next_objective > objective) {
      // Adaptive restart keeps the accepted iterates monotone.
      yw = w;
      yb = b;
      t = 1.0;
      continue;
    }
    const double change = (objective - next_objective) / std::max(1.0, std::abs(objective));
    yw = nw + ((t - 1.0) / t_next) * (nw - w);
    yb = nb + ((t - 1.0) / t_next) * (nb - b);
    w = nw;
    b = nb;
    t = t_next;
    objective = next_objective;
    if (change < options.relative_tolerance) {
      ++iteration;
      break;
    }
  }
  auto fit = expand(p, x.cols(), w, b);
  fit.objective = objective;
  fit.iterations = iteration;
  return fit;
}

LinearFit fit_l1_hinge(const RowMatrix& x, std::span<const int> labels,
                       std::span<const std::size_t> rows, double c,
                       const FitOptions& options) {
  check_inputs(x, labels, rows, c, options);
  if (rows.empty()) throw TrainingError("cannot fit a classifier on zero points");
  if (const int cls = single_class(labels, rows); cls != 0) {
    auto fit = constant_fit(x.cols(), cls * kSingleClassBias);
    fit.objective = l1_hinge_objective(x, labels, rows, c, fit.weights, fit.bias);
    return fit;
  }
  const Problem p = gather(x, labels, rows, options);
  const Eigen::Index dim = p.x.cols();

  auto hinge_objective = [&](const Eigen::VectorXd& w, double b) {
    const Eigen::VectorXd m = p.y.cwiseProduct(p.x * w + Eigen::VectorXd::Constant(p.y.size(), b));
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) s += hinge_loss(m[i]);
    return c * s + w.lpNorm<1>();
  };

  // Start from the logistic solution on the same support.
  const auto start = fit_l1_logistic(x, labels, rows, c, options);
  Eigen::VectorXd w(dim);
  for (std::size_t k = 0; k < p.columns.size(); ++k) {
    w[static_cast<Eigen::Index>(k)] = start.weights[p.columns[k]];
  }
  double b = start.bias;
  Eigen::VectorXd best_w = w;
  double best_b = b;
  double best = hinge_objective(w, b);

  const double row_norm = std::max(1.0, p.x.rowwise().norm().mean());
  const double step0 = 1.0 / (c * row_norm * std::sqrt(static_cast<double>(rows.size())));
  double window_best = best;
  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    const Eigen::VectorXd m = p.y.cwiseProduct(p.x * w + Eigen::VectorXd::Constant(p.y.size(), b));
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (m[i] < 1.0) coef[i] = -c * p.y[i];
    }
    const double step = step0 / std::sqrt(1.0 + iteration);
    w = soft_threshold(w - step * (p.x.transpose() * coef), step);
    b -= step * coef.sum();
    const double value = hinge_objective(w, b);
    if (value < best) {
      best = value;
      best_w = w;
      best_b = b;
    }
    if ((iteration + 1) % 100 == 0) {
      const double change = (window_best - best) / std::max(1.0, std::abs(window_best));
      if (change < options.relative_tolerance) {
        ++iteration;
        break;
      }
      window_best = best;
    }
  }
  auto fit = expand(p, x.cols(), best_w, best_b);
  fit.objective = best;
  fit.iterations = iteration;
  return fit;
}

}  // namespace loct
