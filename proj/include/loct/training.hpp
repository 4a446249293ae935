#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loct/dataset.hpp"
#include "loct/formulation.hpp"
#include "loct/logistic.hpp"
#include "loct/mip_solver.hpp"
#include "loct/tree.hpp"

namespace loct {

struct TrainConfig {
  int depth = 2;
  LossSpec loss{LossKind::logistic_pwl, TangentSet::V0, {1.0, 1.0}};
  RegularizerSpec reg;
  double big_m = kDefaultBigM;
  double epsilon = kDefaultEpsilon;
  SolverConfig solver;
  bool refine = true;
  std::uint64_t seed = 0;
  // Time limit of each single-node program in the misclassification warm start.
  double node_time_limit_seconds = 30.0;
  FitOptions fit;

  void validate(std::size_t p) const;
};

// Per-layer C vector of `depth` copies of `c`.
std::vector<double> broadcast_c(double c, int depth);

struct MipSummary {
  MipStatus status = MipStatus::unknown_time_limit;
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;
  long nodes = 0;
  long lp_iterations = 0;
  double seconds = 0.0;
};

struct TrainReport {
  double warm_start_exact = 0.0;
  double warm_start_surrogate = 0.0;   // formulation objective of the warm start
  double post_solve_exact = 0.0;
  double post_solve_surrogate = 0.0;   // formulation objective of the incumbent
  double post_refine_exact = 0.0;
  int refined_nodes = 0;               // last-layer nodes whose refit was kept
  std::size_t routing_mismatches = 0;  // incumbent z versus deterministic routing
  MipSummary mip;
  double seconds = 0.0;
  TrainConfig config;
  TreeModel model;

  std::string to_json() const;
};

// Tree objective with the true loss: per-layer C times the summed loss of
// each point at the node it visits in that layer (only the last layer for the
// misclassification loss), plus the l1 norm when the regularizer carries it,
// plus alpha * max(nnz, B_h) per node for sfs.
double exact_objective(const TreeModel& model, const Dataset& data, const LossSpec& loss,
                       const RegularizerSpec& reg);

// Same accounting with the loss the formulation uses (tangent-line maximum
// for the logistic loss).
double surrogate_objective(const TreeModel& model, const Dataset& data, const LossSpec& loss,
                           const RegularizerSpec& reg);

struct Assignment {
  TreeModel tree;               // after scaling and the epsilon adjustment
  std::vector<double> values;   // one value per formulation column
  std::vector<std::vector<int>> paths;
};

// Turns a tree into a full formulation assignment: scales nodes whose scores
// exceed M/2 in magnitude, lowers biases until no routed point has a score in
// (0, epsilon), then fills every column block from the resulting routing.
Assignment assemble_assignment(const MilpModel& milp, const Dataset& train, TreeModel tree,
                               const LossSpec& loss, const RegularizerSpec& reg);

struct WarmStart {
  TreeModel tree;
  std::vector<double> values;
};

// Top-down greedy construction, one convex fit per node on the points that
// reach it. Throws TrainingError if the assembled assignment is infeasible.
WarmStart greedy_warm_start(const Dataset& train, const MilpModel& milp, const TrainConfig& config);

struct DecodeResult {
  TreeModel tree;
  std::size_t mismatches = 0;
};

// Reads weights and biases from an incumbent, shifting a bias down by at most
// the feasibility tolerance when points assigned left score slightly above 0.
DecodeResult decode(const MilpModel& milp, const Dataset& train, const std::vector<double>& values,
                    const TrainConfig& config);

// Refits every last-layer node on the points routed to it and keeps a refit
// only when the node's share of the exact objective does not increase.
// Returns the number of kept refits.
int refine_last_layer(TreeModel& tree, const Dataset& train, const TrainConfig& config);

TrainReport train(const Dataset& train, const TrainConfig& config);

struct GridSpec {
  std::vector<double> c_values;        // Cartesian product over layers
  std::vector<double> alpha_values;    // sfs only
  std::vector<double> budget_values;   // hfs node budget or sfs per-layer floor
};

struct GridPoint {
  std::vector<double> layer_c;
  double alpha = 0.0;
  std::optional<double> budget;  // empty keeps the base configuration's budget
};

std::vector<GridPoint> expand_grid(const GridSpec& grid, const TrainConfig& base);
TrainConfig apply_grid_point(const TrainConfig& base, const GridPoint& point);

struct FoldResult {
  std::size_t grid_index = 0;
  int fold = 0;
  double bacc = 0.0;
  double seconds = 0.0;
  MipStatus status = MipStatus::unknown_time_limit;
};

struct CvResult {
  std::vector<GridPoint> grid;
  std::vector<FoldResult> folds;  // grid-major, then fold
  std::vector<double> mean_bacc;  // per grid point
  std::size_t best_index = 0;
  TrainConfig best_config;

  std::string fold_table_csv() const;
  std::string best_json() const;
};

// k-fold cross validation; picks the highest mean validation balanced
// accuracy, ties going to the smaller sum of C and then to grid order.
CvResult cross_validate(const Dataset& train, const TrainConfig& base, const GridSpec& grid,
                        int folds, int jobs = 1);

}  // namespace loct
