#include "loct/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "loct/error.hpp"
#include "loct/metrics.hpp"

namespace loct {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kWeightTolerance = 1e-6;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::span<const double> row_of(const Dataset& data, std::size_t i) {
  return {data.features.data() + static_cast<std::ptrdiff_t>(i) * data.features.cols(),
          static_cast<std::size_t>(data.features.cols())};
}

double node_score(const Eigen::VectorXd& w, double b, const Dataset& data, std::size_t i) {
  return data.features.row(static_cast<Eigen::Index>(i)).dot(w) + b;
}

// Loss of margin v as used by the objective; `exact` picks the true logistic
// loss over its tangent-line surrogate.
struct LossEvaluator {
  LossKind kind;
  bool exact;
  std::vector<TangentLine> lines;

  // Loss of a point with label y and node score `score`. The misclassification
  // loss follows the prediction rule, so a score of exactly 0 predicts -1.
  double operator()(int y, double score) const {
    const double v = y * score;
    switch (kind) {
      case LossKind::logistic_pwl: return exact ? logistic_loss(v) : pwl_logistic(lines, v);
      case LossKind::hinge: return hinge_loss(v);
      case LossKind::misclassification: return (score > 0.0 ? 1 : -1) == y ? 0.0 : 1.0;
    }
    return 0.0;
  }
};

LossEvaluator make_loss(const LossSpec& loss, bool exact) {
  return {loss.kind, exact, loss.kind == LossKind::logistic_pwl ? tangent_lines(loss.tangents)
                                                                : std::vector<TangentLine>{}};
}

int count_nonzero(const Eigen::VectorXd& w) {
  return static_cast<int>((w.array().abs() > kWeightTolerance).count());
}

// Regularization terms of one node.
double node_penalty(const Eigen::VectorXd& w, int layer, const RegularizerSpec& reg) {
  double total = reg.has_l1() ? w.lpNorm<1>() : 0.0;
  if (reg.kind == RegKind::sfs) {
    total += reg.alpha * std::max<double>(count_nonzero(w),
                                          reg.layer_budget[static_cast<std::size_t>(layer)]);
  }
  return total;
}

double layer_c(const LossSpec& loss, int layer) {
  if (loss.kind == LossKind::misclassification) return loss.layer_c.front();
  return loss.layer_c[static_cast<std::size_t>(layer)];
}

double tree_objective(const TreeModel& model, const Dataset& data, const LossSpec& loss,
                      const RegularizerSpec& reg, bool exact) {
  const auto f = make_loss(loss, exact);
  const int depth = model.topology.depth();
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto x = row_of(data, i);
    const auto path = route(model, x);
    for (int h = 0; h < depth; ++h) {
      if (loss.kind == LossKind::misclassification && h + 1 < depth) continue;
      total += layer_c(loss, h) * f(data.labels[i], model.score(path[static_cast<std::size_t>(h)], x));
    }
  }
  for (int t = 0; t < model.topology.num_nodes(); ++t) {
    total += node_penalty(model.weights[static_cast<std::size_t>(t)], TreeTopology::layer_of(t), reg);
  }
  return total;
}

// Keeps the `budget` largest-magnitude weights.
void keep_top(Eigen::VectorXd& w, int budget) {
  if (count_nonzero(w) <= budget) return;
  std::vector<int> order(static_cast<std::size_t>(w.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(w[a]) > std::abs(w[b]); });
  for (std::size_t k = static_cast<std::size_t>(budget); k < order.size(); ++k) w[order[k]] = 0.0;
}

std::vector<int> support_of(const Eigen::VectorXd& w) {
  std::vector<int> s;
  for (int j = 0; j < w.size(); ++j) {
    if (w[j] != 0.0) s.push_back(j);
  }
  return s;
}

// Scales (w, b) so that no training score exceeds M/2 in magnitude.
void clamp_scores(Eigen::VectorXd& w, double& b, const Dataset& data, double big_m) {
  double largest = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    largest = std::max(largest, std::abs(node_score(w, b, data, i)));
  }
  const double limit = 0.5 * big_m;
  if (largest > limit) {
    const double factor = limit / largest;
    w *= factor;
    b *= factor;
  }
}

// Lowers b until no point in `rows` scores inside (0, epsilon).
void nudge_bias(const Eigen::VectorXd& w, double& b, const Dataset& data,
                std::span<const std::size_t> rows, double epsilon) {
  for (std::size_t guard = 0; guard <= rows.size(); ++guard) {
    double worst = -1.0;
    for (const auto i : rows) {
      const double s = node_score(w, b, data, i);
      if (s > 0.0 && s < epsilon) worst = std::max(worst, s);
    }
    if (worst < 0.0) return;
    b -= worst + 1e-9;
  }
}

void split_rows(const Eigen::VectorXd& w, double b, const Dataset& data,
                std::span<const std::size_t> rows, std::vector<std::size_t>& left,
                std::vector<std::size_t>& right) {
  left.clear();
  right.clear();
  for (const auto i : rows) {
    (node_score(w, b, data, i) <= 0.0 ? left : right).push_back(i);
  }
}

// Hyperplane fitted by the convex surrogate matching the loss.
LinearFit fit_for_loss(const Dataset& data, std::span<const std::size_t> rows, LossKind kind,
                       double c, const FitOptions& options) {
  if (kind == LossKind::hinge) return fit_l1_hinge(data.features, data.labels, rows, c, options);
  return fit_l1_logistic(data.features, data.labels, rows, c, options);
}

struct NodeParams {
  Eigen::VectorXd w;
  double b = 0.0;
};

class GreedyBuilder {
 public:
  GreedyBuilder(const Dataset& train, const MilpModel& milp, const TrainConfig& config)
      : train_(train), milp_(milp), config_(config), topology_(config.depth),
        exact_(make_loss(config.loss, true)) {}

  TreeModel build() {
    tree_ = TreeModel::zeros(config_.depth, train_.cols(), config_.epsilon, config_.loss.kind);
    tree_.standardization = train_.standardization;
    std::vector<std::size_t> all(train_.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(0, all, true);
    return tree_;
  }

 private:
  // Fits node t on `rows` and finalizes its parameters (budget, scaling, nudge).
  NodeParams fit_node(int t, std::span<const std::size_t> rows) {
    NodeParams node{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(train_.cols())), 0.0};
    if (rows.empty()) return node;
    const int layer = TreeTopology::layer_of(t);
    const double c = layer_c(config_.loss, layer);
    if (config_.loss.kind == LossKind::misclassification) {
      node = single_node_program(rows);
    } else {
      const auto fit = fit_for_loss(train_, rows, config_.loss.kind, c, config_.fit);
      node.w = fit.weights;
      node.b = fit.bias;
    }
    if (config_.reg.kind == RegKind::hfs && count_nonzero(node.w) > config_.reg.node_budget) {
      keep_top(node.w, config_.reg.node_budget);
      FitOptions restricted = config_.fit;
      restricted.restrict_support = true;
      restricted.support = support_of(node.w);
      const auto fit = fit_for_loss(train_, rows,
                                    config_.loss.kind == LossKind::hinge ? LossKind::hinge
                                                                         : LossKind::logistic_pwl,
                                    c, restricted);
      node.w = fit.weights;
      node.b = fit.bias;
    }
    finalize(t, node, rows);
    return node;
  }

  void finalize(int t, NodeParams& node, std::span<const std::size_t> rows) const {
    clamp_scores(node.w, node.b, train_, config_.big_m);
    if (!topology_.is_last(t)) nudge_bias(node.w, node.b, train_, rows, config_.epsilon);
  }

  // Depth-1 misclassification program on the node's points, warm-started
  // from a logistic fit.
  NodeParams single_node_program(std::span<const std::size_t> rows) {
    const Dataset local = train_.subset(rows);
    RegularizerSpec reg;
    reg.kind = config_.reg.has_l1() ? RegKind::l1 : RegKind::none;
    const double c = config_.loss.layer_c.front();
    const auto milp = build_oct_misclass(local, TreeTopology(1), config_.big_m, config_.epsilon,
                                         reg, c);
    std::vector<std::size_t> local_rows(local.rows());
    std::iota(local_rows.begin(), local_rows.end(), std::size_t{0});
    const auto fit = fit_l1_logistic(local.features, local.labels, local_rows, c, config_.fit);
    TreeModel start = TreeModel::zeros(1, local.cols(), config_.epsilon,
                                       LossKind::misclassification);
    start.weights[0] = fit.weights;
    start.bias[0] = fit.bias;
    const LossSpec loss{LossKind::misclassification, TangentSet::V0, {c}};
    auto assembled = assemble_assignment(milp, local, start, loss, reg);
    SolverConfig solver = config_.solver;
    solver.time_limit_seconds = config_.node_time_limit_seconds;
    solver.warm_start = assembled.values;
    solver.log_interval_seconds = 1e9;
    const auto sol = solve_mip(milp, solver);
    NodeParams node{assembled.tree.weights[0], assembled.tree.bias[0]};
    if (sol.has_incumbent()) {
      const auto& L = milp.layout;
      for (int j = 0; j < L.p; ++j) node.w[j] = sol.values[static_cast<std::size_t>(L.w_col(0, j))];
      node.b = sol.values[static_cast<std::size_t>(L.b_col(0))];
    }
    return node;
  }

  // Exact objective contribution of the subtree rooted at t over `rows` when
  // every node below t is fitted greedily without candidate search.
  double complete_subtree(int t, const NodeParams& node, std::span<const std::size_t> rows,
                          TreeModel& scratch) {
    const int layer = TreeTopology::layer_of(t);
    double total = node_penalty(node.w, layer, config_.reg);
    const double c = layer_c(config_.loss, layer);
    for (const auto i : rows) {
      total += c * exact_(train_.labels[i], node_score(node.w, node.b, train_, i));
    }
    scratch.weights[static_cast<std::size_t>(t)] = node.w;
    scratch.bias[static_cast<std::size_t>(t)] = node.b;
    if (topology_.is_last(t)) return total;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    split_rows(node.w, node.b, train_, rows, left, right);
    for (const auto& [child, part] : {std::pair{TreeTopology::left(t), &left},
                                      std::pair{TreeTopology::right(t), &right}}) {
      total += complete_subtree(child, fit_node(child, *part), *part, scratch);
    }
    return total;
  }

  void grow(int t, const std::vector<std::size_t>& rows, bool search) {
    NodeParams chosen = fit_node(t, rows);
    if (search && !topology_.is_last(t) && !rows.empty() &&
        config_.loss.kind != LossKind::misclassification) {
      // Alternative splits: each feature thresholded at its median over the
      // node's points. The subtree with the lowest exact objective wins.
      TreeModel scratch = tree_;
      double best = complete_subtree(t, chosen, rows, scratch);
      const auto p = static_cast<Eigen::Index>(train_.cols());
      for (Eigen::Index j = 0; j < p; ++j) {
        std::vector<double> column;
        column.reserve(rows.size());
        for (const auto i : rows) column.push_back(train_.features(static_cast<Eigen::Index>(i), j));
        std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(column.size() / 2),
                         column.end());
        NodeParams candidate{Eigen::VectorXd::Zero(p), -column[column.size() / 2]};
        candidate.w[j] = 1.0;
        finalize(t, candidate, rows);
        const double value = complete_subtree(t, candidate, rows, scratch);
        if (value < best - 1e-12 * std::max(1.0, std::abs(best))) {
          best = value;
          chosen = candidate;
        }
      }
    }
    tree_.weights[static_cast<std::size_t>(t)] = chosen.w;
    tree_.bias[static_cast<std::size_t>(t)] = chosen.b;
    if (topology_.is_last(t)) return;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    split_rows(chosen.w, chosen.b, train_, rows, left, right);
    grow(TreeTopology::left(t), left, search);
    grow(TreeTopology::right(t), right, search);
  }

  const Dataset& train_;
  const MilpModel& milp_;
  const TrainConfig& config_;
  TreeTopology topology_;
  LossEvaluator exact_;
  TreeModel tree_;
};

// Candidate assignments built from the weights of an LP relaxation.
class TreeHeuristic {
 public:
  TreeHeuristic(const MilpModel& milp, const Dataset& train, const TrainConfig& config)
      : milp_(milp), train_(train), config_(config) {}

  std::optional<std::vector<double>> operator()(const std::vector<double>& lp) const {
    const auto& L = milp_.layout;
    TreeModel tree = TreeModel::zeros(config_.depth, train_.cols(), config_.epsilon,
                                      config_.loss.kind);
    for (int t = 0; t < L.num_nodes(); ++t) {
      for (int j = 0; j < L.p; ++j) {
        tree.weights[static_cast<std::size_t>(t)][j] = lp[static_cast<std::size_t>(L.w_col(t, j))];
      }
      tree.bias[static_cast<std::size_t>(t)] = lp[static_cast<std::size_t>(L.b_col(t))];
    }
    std::optional<std::vector<double>> best;
    double best_value = kInf;
    const auto consider = [&](const TreeModel& candidate) {
      try {
        auto assembled = assemble_assignment(milp_, train_, candidate, config_.loss, config_.reg);
        if (!validate_assignment(milp_, assembled.values).empty()) return;
        const double value = milp_.evaluate_objective(assembled.values);
        if (value < best_value) {
          best_value = value;
          best = std::move(assembled.values);
        }
      } catch (const Error&) {
      }
    };
    consider(tree);
    // Same upper layers with the last layer refitted on the routed points.
    TreeModel refit = tree;
    if (config_.reg.kind == RegKind::hfs) {
      for (auto& w : refit.weights) keep_top(w, config_.reg.node_budget);
    }
    refine_last_layer(refit, train_, config_);
    consider(refit);
    return best;
  }

 private:
  const MilpModel& milp_;
  const Dataset& train_;
  const TrainConfig& config_;
};

nlohmann::json config_json(const TrainConfig& c) {
  nlohmann::json j;
  j["depth"] = c.depth;
  j["loss"] = to_string(c.loss.kind);
  if (c.loss.kind == LossKind::logistic_pwl) j["tangents"] = to_string(c.loss.tangents);
  j["C"] = c.loss.layer_c;
  j["reg"] = to_string(c.reg.kind);
  if (c.reg.kind == RegKind::sfs) {
    j["alpha"] = c.reg.alpha;
    j["layer_budget"] = c.reg.layer_budget;
  }
  if (c.reg.kind == RegKind::hfs) j["budget"] = c.reg.node_budget;
  j["big_m"] = c.big_m;
  j["epsilon"] = c.epsilon;
  j["time_limit_s"] = c.solver.time_limit_seconds;
  j["integrality_tolerance"] = c.solver.integrality_tolerance;
  j["gap_tolerance"] = c.solver.relative_gap_tolerance;
  j["refine"] = c.refine;
  j["seed"] = c.seed;
  return j;
}

double finite_or_null_guard(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace

std::vector<double> broadcast_c(double c, int depth) {
  return std::vector<double>(static_cast<std::size_t>(depth), c);
}

void TrainConfig::validate(std::size_t p) const {
  const TreeTopology topology(depth);
  validate_specs(topology, p, loss, reg);
  if (!(big_m > 0.0)) throw TrainingError("big-M must be positive");
  if (!(epsilon > 0.0) || epsilon >= big_m) throw TrainingError("epsilon must lie in (0, M)");
  if (!(node_time_limit_seconds > 0.0)) throw TrainingError("node time limit must be positive");
  solver.validate();
}

double exact_objective(const TreeModel& model, const Dataset& data, const LossSpec& loss,
                       const RegularizerSpec& reg) {
  return tree_objective(model, data, loss, reg, true);
}

double surrogate_objective(const TreeModel& model, const Dataset& data, const LossSpec& loss,
                           const RegularizerSpec& reg) {
  return tree_objective(model, data, loss, reg, false);
}

Assignment assemble_assignment(const MilpModel& milp, const Dataset& train, TreeModel tree,
                               const LossSpec& loss, const RegularizerSpec& reg) {
  const auto& L = milp.layout;
  if (L.n != static_cast<int>(train.rows()) || L.p != static_cast<int>(train.cols()) ||
      L.depth != tree.topology.depth()) {
    throw TrainingError("tree, data and formulation shapes differ");
  }
  const TreeTopology& topo = tree.topology;
  const int nodes = topo.num_nodes();
  for (int t = 0; t < nodes; ++t) {
    auto& w = tree.weights[static_cast<std::size_t>(t)];
    auto& b = tree.bias[static_cast<std::size_t>(t)];
    if (!w.allFinite() || !std::isfinite(b)) {
      w.setZero();
      b = 0.0;
    }
    if (reg.kind == RegKind::hfs) keep_top(w, reg.node_budget);
    clamp_scores(w, b, train, milp.big_m);
  }

  // Top-down bias adjustment on the points each node receives.
  std::vector<std::vector<std::size_t>> reach(static_cast<std::size_t>(nodes));
  reach[0].resize(train.rows());
  std::iota(reach[0].begin(), reach[0].end(), std::size_t{0});
  for (int t = 0; t < nodes; ++t) {
    if (topo.is_last(t)) continue;
    auto& w = tree.weights[static_cast<std::size_t>(t)];
    auto& b = tree.bias[static_cast<std::size_t>(t)];
    nudge_bias(w, b, train, reach[static_cast<std::size_t>(t)], milp.epsilon);
    split_rows(w, b, train, reach[static_cast<std::size_t>(t)],
               reach[static_cast<std::size_t>(TreeTopology::left(t))],
               reach[static_cast<std::size_t>(TreeTopology::right(t))]);
  }

  Assignment out;
  out.values.assign(static_cast<std::size_t>(milp.num_vars()), 0.0);
  auto& v = out.values;
  const auto set = [&](int col, double value) { v[static_cast<std::size_t>(col)] = value; };
  const auto lines = loss.kind == LossKind::logistic_pwl ? tangent_lines(loss.tangents)
                                                         : std::vector<TangentLine>{};
  out.paths.resize(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto x = row_of(train, i);
    out.paths[i] = route(tree, x);
    const auto& path = out.paths[i];
    const int last = path.back();
    set(L.z_col(static_cast<int>(i), last), 1.0);
    const double y = train.labels[i];
    if (L.xi >= 0) {
      for (int h = 0; h < L.depth; ++h) {
        const double m = y * tree.score(path[static_cast<std::size_t>(h)], x);
        const double value = loss.kind == LossKind::hinge ? hinge_loss(m)
                                                          : std::max(0.0, pwl_logistic(lines, m));
        set(L.xi_col(static_cast<int>(i), h), value);
      }
    }
    if (L.yhat >= 0) set(L.yhat_col(static_cast<int>(i)), tree.score(last, x) > 0.0 ? 1.0 : 0.0);
  }
  for (int t = 0; t < nodes; ++t) {
    const auto& w = tree.weights[static_cast<std::size_t>(t)];
    int nnz = 0;
    for (int j = 0; j < L.p; ++j) {
      set(L.w_col(t, j), w[j]);
      if (L.wpos >= 0) {
        set(L.wpos_col(t, j), std::max(0.0, w[j]));
        set(L.wneg_col(t, j), std::max(0.0, -w[j]));
      }
      if (L.delta >= 0) {
        set(L.delta_col(t, j), w[j] != 0.0 ? 1.0 : 0.0);
        nnz += w[j] != 0.0 ? 1 : 0;
      }
    }
    set(L.b_col(t), tree.bias[static_cast<std::size_t>(t)]);
    if (L.u >= 0) {
      set(L.u_col(t), std::max<double>(nnz, reg.layer_budget[static_cast<std::size_t>(
                                                TreeTopology::layer_of(t))]));
    }
  }
  out.tree = std::move(tree);
  return out;
}

WarmStart greedy_warm_start(const Dataset& train, const MilpModel& milp, const TrainConfig& config) {
  GreedyBuilder builder(train, milp, config);
  TreeModel tree = builder.build();
  auto assembled = assemble_assignment(milp, train, std::move(tree), config.loss, config.reg);
  const auto violations = validate_assignment(milp, assembled.values);
  if (!violations.empty()) {
    throw TrainingError("warm start assignment is infeasible: " + describe(violations));
  }
  return {std::move(assembled.tree), std::move(assembled.values)};
}

DecodeResult decode(const MilpModel& milp, const Dataset& train, const std::vector<double>& values,
                    const TrainConfig& config) {
  const auto& L = milp.layout;
  if (values.size() != static_cast<std::size_t>(milp.num_vars())) {
    throw TrainingError("incumbent length differs from the formulation");
  }
  DecodeResult out;
  out.tree = TreeModel::zeros(config.depth, train.cols(), config.epsilon, config.loss.kind);
  out.tree.standardization = train.standardization;
  auto& tree = out.tree;
  const TreeTopology& topo = tree.topology;
  for (int t = 0; t < topo.num_nodes(); ++t) {
    for (int j = 0; j < L.p; ++j) {
      const double w = values[static_cast<std::size_t>(L.w_col(t, j))];
      tree.weights[static_cast<std::size_t>(t)][j] = std::abs(w) <= 1e-12 ? 0.0 : w;
    }
    tree.bias[static_cast<std::size_t>(t)] = values[static_cast<std::size_t>(L.b_col(t))];
  }

  // Last-layer node assigned to each point.
  const auto last = topo.last_layer();
  std::vector<int> assigned(train.rows(), -1);
  for (int i = 0; i < L.n; ++i) {
    for (int s = last.begin; s < last.end; ++s) {
      const double z = values[static_cast<std::size_t>(L.z_col(i, s))];
      if (std::abs(z - std::round(z)) > 1e-6) {
        throw TrainingError(fmt::format("decode failure: z[{}][{}] = {} is not integral", i, s, z));
      }
      if (z > 0.5) {
        if (assigned[static_cast<std::size_t>(i)] >= 0) {
          throw TrainingError(fmt::format("decode failure: point {} routed twice", i));
        }
        assigned[static_cast<std::size_t>(i)] = s;
      }
    }
    if (assigned[static_cast<std::size_t>(i)] < 0) {
      throw TrainingError(fmt::format("decode failure: point {} is not routed", i));
    }
  }

  // Points assigned to the left subtree of t may score up to the feasibility
  // tolerance above zero; shift b_t so that they route left.
  for (int t = 0; t < topo.num_nodes(); ++t) {
    if (topo.is_last(t)) continue;
    const auto left = topo.last_left(t);
    const auto right = topo.last_right(t);
    double max_left = -kInf;
    double min_right = kInf;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      const int s = assigned[i];
      const double score = tree.score(t, row_of(train, i));
      if (left.contains(s)) max_left = std::max(max_left, score);
      if (right.contains(s)) min_right = std::min(min_right, score);
    }
    if (max_left > 0.0) {
      const double shift = max_left + 1e-12;
      if (min_right - shift > 0.0) tree.bias[static_cast<std::size_t>(t)] -= shift;
    }
  }
  for (std::size_t i = 0; i < train.rows(); ++i) {
    if (route(tree, row_of(train, i)).back() != assigned[i]) ++out.mismatches;
  }
  return out;
}

int refine_last_layer(TreeModel& tree, const Dataset& train, const TrainConfig& config) {
  const TreeTopology& topo = tree.topology;
  const auto last = topo.last_layer();
  const int layer = topo.depth() - 1;
  const double c = layer_c(config.loss, layer);
  const auto exact = make_loss(config.loss, true);

  std::vector<std::vector<std::size_t>> rows(static_cast<std::size_t>(topo.num_nodes()));
  for (std::size_t i = 0; i < train.rows(); ++i) {
    rows[static_cast<std::size_t>(route(tree, row_of(train, i)).back())].push_back(i);
  }
  const auto node_objective = [&](const Eigen::VectorXd& w, double b,
                                  const std::vector<std::size_t>& part) {
    double total = node_penalty(w, layer, config.reg);
    for (const auto i : part) total += c * exact(train.labels[i], node_score(w, b, train, i));
    return total;
  };

  int kept = 0;
  for (int s = last.begin; s < last.end; ++s) {
    const auto& part = rows[static_cast<std::size_t>(s)];
    if (part.empty()) continue;
    auto& w = tree.weights[static_cast<std::size_t>(s)];
    auto& b = tree.bias[static_cast<std::size_t>(s)];
    const double current = node_objective(w, b, part);

    FitOptions options = config.fit;
    if (config.reg.kind == RegKind::hfs) {
      options.restrict_support = true;
      options.support = support_of(w);
      if (options.support.empty()) {
        Eigen::VectorXd free_fit =
            fit_for_loss(train, part, config.loss.kind, c, config.fit).weights;
        keep_top(free_fit, config.reg.node_budget);
        options.support = support_of(free_fit);
      }
    }
    const auto fit = fit_for_loss(train, part, config.loss.kind, c, options);
    Eigen::VectorXd candidate = fit.weights;
    if (config.reg.kind == RegKind::hfs) keep_top(candidate, config.reg.node_budget);
    const double value = node_objective(candidate, fit.bias, part);
    if (value < current - 1e-12 * std::max(1.0, std::abs(current))) {
      w = candidate;
      b = fit.bias;
      ++kept;
    }
  }
  return kept;
}

TrainReport train(const Dataset& data, const TrainConfig& config) {
  const auto start = Clock::now();
  config.validate(data.cols());
  if (data.rows() == 0) throw TrainingError("training set is empty");

  TrainReport report;
  report.config = config;
  const TreeTopology topology(config.depth);
  const MilpModel milp = build_model(data, topology, config.loss, config.reg, config.big_m,
                                     config.epsilon);
  spdlog::info("formulation: {} columns, {} rows (n={}, p={}, depth={})", milp.num_vars(),
               milp.num_rows(), data.rows(), data.cols(), config.depth);

  const auto warm = greedy_warm_start(data, milp, config);
  report.warm_start_exact = exact_objective(warm.tree, data, config.loss, config.reg);
  report.warm_start_surrogate = milp.evaluate_objective(warm.values);
  spdlog::info("warm start: exact={:.10g} surrogate={:.10g}", report.warm_start_exact,
               report.warm_start_surrogate);

  SolverConfig solver = config.solver;
  solver.warm_start = warm.values;
  const TreeHeuristic heuristic(milp, data, config);
  const auto sol = solve_mip(milp, solver, [&](const std::vector<double>& lp) { return heuristic(lp); });
  report.mip = {sol.status, sol.objective, sol.bound, sol.gap, sol.nodes, sol.lp_iterations,
                sol.elapsed_seconds};
  if (!sol.has_incumbent()) {
    throw TrainingError(fmt::format("solver returned no incumbent (status {})", to_string(sol.status)));
  }

  auto decoded = decode(milp, data, sol.values, config);
  report.routing_mismatches = decoded.mismatches;
  report.post_solve_surrogate = sol.objective;
  report.post_solve_exact = exact_objective(decoded.tree, data, config.loss, config.reg);

  TreeModel model = std::move(decoded.tree);
  if (config.refine) {
    report.refined_nodes = refine_last_layer(model, data, config);
    report.post_refine_exact = exact_objective(model, data, config.loss, config.reg);
  } else {
    report.post_refine_exact = report.post_solve_exact;
  }
  spdlog::info("post-solve exact={:.10g} post-refine exact={:.10g} status={}",
               report.post_solve_exact, report.post_refine_exact, to_string(sol.status));
  report.model = std::move(model);
  report.seconds = seconds_since(start);
  return report;
}

std::string TrainReport::to_json() const {
  nlohmann::json j;
  j["config"] = config_json(config);
  j["objectives"] = {{"warm_start_exact", warm_start_exact},
                     {"warm_start_surrogate", warm_start_surrogate},
                     {"post_solve_exact", post_solve_exact},
                     {"post_solve_surrogate", post_solve_surrogate},
                     {"post_refine_exact", post_refine_exact}};
  j["refined_nodes"] = refined_nodes;
  j["routing_mismatches"] = routing_mismatches;
  j["solver"] = {{"status", to_string(mip.status)},
                 {"objective", finite_or_null_guard(mip.objective)},
                 {"bound", finite_or_null_guard(mip.bound)},
                 {"gap", finite_or_null_guard(mip.gap)},
                 {"nodes", mip.nodes},
                 {"lp_iterations", mip.lp_iterations},
                 {"seconds", mip.seconds}};
  j["seconds"] = seconds;
  return j.dump(2);
}

std::vector<GridPoint> expand_grid(const GridSpec& grid, const TrainConfig& base) {
  const bool misclass = base.loss.kind == LossKind::misclassification;
  const int layers = misclass ? 1 : base.depth;
  std::vector<std::vector<double>> c_combos;
  if (grid.c_values.empty()) {
    c_combos.push_back(base.loss.layer_c);
  } else {
    c_combos.emplace_back();
    for (int h = 0; h < layers; ++h) {
      std::vector<std::vector<double>> next;
      for (const auto& prefix : c_combos) {
        for (const double c : grid.c_values) {
          auto combo = prefix;
          combo.push_back(c);
          next.push_back(std::move(combo));
        }
      }
      c_combos = std::move(next);
    }
  }
  std::vector<double> alphas{base.reg.alpha};
  if (base.reg.kind == RegKind::sfs && !grid.alpha_values.empty()) alphas = grid.alpha_values;
  std::vector<std::optional<double>> budgets{std::nullopt};
  if ((base.reg.kind == RegKind::sfs || base.reg.kind == RegKind::hfs) &&
      !grid.budget_values.empty()) {
    budgets.assign(grid.budget_values.begin(), grid.budget_values.end());
  }
  std::vector<GridPoint> points;
  for (const auto& c : c_combos) {
    for (const double a : alphas) {
      for (const auto& b : budgets) points.push_back({c, a, b});
    }
  }
  return points;
}

TrainConfig apply_grid_point(const TrainConfig& base, const GridPoint& point) {
  TrainConfig config = base;
  config.loss.layer_c = point.layer_c;
  config.reg.alpha = point.alpha;
  if (point.budget) {
    if (config.reg.kind == RegKind::hfs) config.reg.node_budget = static_cast<int>(*point.budget);
    if (config.reg.kind == RegKind::sfs) {
      config.reg.layer_budget.assign(static_cast<std::size_t>(config.depth), *point.budget);
    }
  }
  return config;
}

CvResult cross_validate(const Dataset& data, const TrainConfig& base, const GridSpec& grid,
                        int folds, int jobs) {
  if (folds < 2) throw TrainingError("cross validation needs at least 2 folds");
  if (data.rows() < static_cast<std::size_t>(folds)) {
    throw TrainingError("fewer points than folds");
  }
  CvResult out;
  out.grid = expand_grid(grid, base);
  if (out.grid.empty()) throw TrainingError("hyperparameter grid is empty");
  for (const auto& point : out.grid) apply_grid_point(base, point).validate(data.cols());
  const auto splits = kfolds(data, folds, base.seed);
  spdlog::info("cross validation: {} configurations x {} folds", out.grid.size(), folds);

  const std::size_t tasks = out.grid.size() * static_cast<std::size_t>(folds);
  out.folds.resize(tasks);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  const auto worker = [&] {
    while (true) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks) return;
      const std::size_t g = task / static_cast<std::size_t>(folds);
      const int f = static_cast<int>(task % static_cast<std::size_t>(folds));
      try {
        const auto config = apply_grid_point(base, out.grid[g]);
        const auto& split = splits[static_cast<std::size_t>(f)];
        const Dataset fit_part = data.subset(split.train);
        const Dataset held_out = data.subset(split.validation);
        const auto start = Clock::now();
        const auto report = train(fit_part, config);
        std::vector<int> predicted;
        predicted.reserve(held_out.rows());
        for (std::size_t i = 0; i < held_out.rows(); ++i) {
          predicted.push_back(predict(report.model, row_of(held_out, i)));
        }
        const auto bacc = balanced_accuracy(confusion(held_out.labels, predicted)).value;
        out.folds[task] = {g, f, bacc, seconds_since(start), report.mip.status};
        spdlog::info("cv config {} fold {}: bacc={:.4f} status={}", g, f, bacc,
                     to_string(report.mip.status));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  out.mean_bacc.assign(out.grid.size(), 0.0);
  for (const auto& r : out.folds) out.mean_bacc[r.grid_index] += r.bacc / folds;
  std::size_t best = 0;
  for (std::size_t g = 1; g < out.grid.size(); ++g) {
    const double a = out.mean_bacc[g];
    const double b = out.mean_bacc[best];
    if (a > b + 1e-12) {
      best = g;
    } else if (std::abs(a - b) <= 1e-12) {
      const double sum_a = std::accumulate(out.grid[g].layer_c.begin(), out.grid[g].layer_c.end(), 0.0);
      const double sum_b =
          std::accumulate(out.grid[best].layer_c.begin(), out.grid[best].layer_c.end(), 0.0);
      if (sum_a < sum_b) best = g;
    }
  }
  out.best_index = best;
  out.best_config = apply_grid_point(base, out.grid[best]);
  return out;
}

std::string CvResult::fold_table_csv() const {
  std::ostringstream out;
  out << "grid_index,C,alpha,budget,fold,bacc,seconds,status\n";
  for (const auto& r : folds) {
    const auto& point = grid[r.grid_index];
    std::string c;
    for (std::size_t h = 0; h < point.layer_c.size(); ++h) {
      c += (h ? ";" : "") + format_number(point.layer_c[h]);
    }
    out << r.grid_index << ',' << c << ',' << format_number(point.alpha) << ','
        << (point.budget ? format_number(*point.budget) : "") << ',' << r.fold << ','
        << format_number(r.bacc) << ',' << format_number(r.seconds) << ',' << to_string(r.status)
        << '\n';
  }
  return out.str();
}

std::string CvResult::best_json() const {
  nlohmann::json j;
  j["best_index"] = best_index;
  j["mean_bacc"] = mean_bacc;
  j["configurations"] = grid.size();
  j["config"] = config_json(best_config);
  return j.dump(2);
}

}  // namespace loct
