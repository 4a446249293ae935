#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "loct/milp.hpp"

namespace loct {

// min obj.x  s.t.  row_lower <= A x <= row_upper,  col_lower <= x <= col_upper.
struct LpProblem {
  Eigen::SparseMatrix<double> a;  // rows x cols, column major
  std::vector<double> obj;
  std::vector<double> col_lower;
  std::vector<double> col_upper;
  std::vector<double> row_lower;
  std::vector<double> row_upper;

  int rows() const { return static_cast<int>(a.rows()); }
  int cols() const { return static_cast<int>(a.cols()); }
};

// Continuous relaxation of a model: binaries become [0, 1] columns.
LpProblem relax(const MilpModel& model);

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, time_limit };

std::string_view to_string(LpStatus status);

enum class VarStatus : std::uint8_t { basic, at_lower, at_upper, at_zero };

// Simplex basis over the cols() structural and rows() logical variables
// (logical i carries the activity of row i).
struct LpBasis {
  std::vector<int> basic;            // rows() entries
  std::vector<VarStatus> status;     // cols() + rows() entries
};

struct LpOptions {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  int refactor_interval = 100;
  int stall_threshold = 200;          // degenerate pivots before Bland's rule
  long max_iterations = 0;            // 0 picks a size-based limit
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;   // structural values
  double objective = 0.0;  // obj.x without any model offset
  long iterations = 0;
  LpBasis basis;
};

// Bounded-variable primal simplex. A warm basis of matching shape is used as
// the starting point whatever its feasibility; otherwise the slack basis is.
// Throws SolverError when repeated refactorizations cannot recover from a
// singular basis.
LpSolution solve_lp(const LpProblem& problem, const LpBasis* warm = nullptr,
                    const LpOptions& options = {});

// Relaxation of `model` with the column bounds replaced by the given ones.
LpSolution solve_lp(const MilpModel& model, const std::vector<double>& col_lower,
                    const std::vector<double>& col_upper,
                    const LpOptions& options = {});

}  // namespace loct
