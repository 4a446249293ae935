#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loct/milp.hpp"

namespace loct {

enum class BranchingRule { most_fractional };
enum class NodeSelection { best_bound_with_depth_first_plunge };

struct SolverConfig {
  double time_limit_seconds = 300.0;
  double integrality_tolerance = 1e-6;
  double relative_gap_tolerance = 1e-6;
  BranchingRule branching = BranchingRule::most_fractional;
  NodeSelection node_selection = NodeSelection::best_bound_with_depth_first_plunge;
  int plunge_depth = 10;
  // The primal heuristic runs at the root and then every this many nodes.
  int heuristic_interval = 10;
  double log_interval_seconds = 5.0;
  long node_limit = 0;  // 0 means unlimited
  std::optional<std::vector<double>> warm_start;

  void validate() const;
};

enum class MipStatus {
  optimal,
  feasible_time_limit,
  infeasible,
  // The time or node limit expired before any feasible assignment was found,
  // so infeasibility is not proven either.
  unknown_time_limit,
};

std::string_view to_string(MipStatus status);

struct ProgressPoint {
  long node = 0;
  double incumbent = 0.0;  // +inf while none
  double bound = 0.0;
  double seconds = 0.0;
};

struct Violation {
  int row = -1;        // constraint id, or -1 for a column issue
  int column = -1;     // column id for bound/integrality issues
  std::string name;    // row or column name
  std::string what;    // "row", "bound" or "integrality"
  double amount = 0.0; // size of the violation
};

struct MipSolution {
  MipStatus status = MipStatus::unknown_time_limit;
  std::vector<double> values;  // empty unless an incumbent exists
  double objective = kInf;     // includes the model's constant offset
  double bound = -kInf;
  double gap = kInf;
  long nodes = 0;
  long lp_iterations = 0;
  double elapsed_seconds = 0.0;
  bool warm_start_accepted = false;
  std::vector<Violation> warm_start_violations;
  std::vector<ProgressPoint> trace;  // one entry per incumbent or bound change

  bool has_incumbent() const { return !values.empty(); }
};

// (obj - bound) / max(1e-10, |obj|), clamped at 0.
double relative_gap(double objective, double bound);

// Row-by-row feasibility check with an absolute tolerance; also reports
// bound violations and non-integral binaries. Empty means feasible.
std::vector<Violation> validate_assignment(const MilpModel& model,
                                           const std::vector<double>& values,
                                           double tolerance = 1e-7,
                                           double integrality_tolerance = 1e-6);

std::string describe(const std::vector<Violation>& violations, std::size_t limit = 5);

// Receives the LP relaxation values of a node and may return a full candidate
// assignment. Candidates are validated before use; their binaries are also
// fixed and the continuous part re-optimized.
using PrimalHeuristic =
    std::function<std::optional<std::vector<double>>(const std::vector<double>& lp_values)>;

// LP-based branch and bound over the binary columns.
MipSolution solve_mip(const MilpModel& model, const SolverConfig& config,
                      const PrimalHeuristic& heuristic = {});

}  // namespace loct
