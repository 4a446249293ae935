#pragma once

#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace loct {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };
enum class Sense { le, ge, eq };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lower = 0.0;
  double upper = kInf;
};

// Sparse row: sum_k coef[k] * x[index[k]] (sense) rhs.
struct Constraint {
  std::string name;
  std::vector<int> index;
  std::vector<double> coef;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

// Column offsets of the structured variable blocks of a tree model; -1 marks
// an absent block. All blocks are dense row-major over their index sets.
struct TreeLayout {
  int n = 0;
  int p = 0;
  int depth = 0;
  int z = -1;     // z[i][s], s over last-layer nodes
  int w = -1;     // w[t][j]
  int wpos = -1;  // wpos[t][j]
  int wneg = -1;  // wneg[t][j]
  int b = -1;     // b[t]
  int xi = -1;    // xi[i][h], h over layers
  int delta = -1; // delta[t][j]
  int yhat = -1;  // yhat[i]
  int u = -1;     // u[t]

  int num_nodes() const { return (1 << depth) - 1; }
  int num_last() const { return 1 << (depth - 1); }
  int first_last() const { return num_last() - 1; }

  int z_col(int i, int s) const { return z + i * num_last() + (s - first_last()); }
  int w_col(int t, int j) const { return w + t * p + j; }
  int wpos_col(int t, int j) const { return wpos + t * p + j; }
  int wneg_col(int t, int j) const { return wneg + t * p + j; }
  int b_col(int t) const { return b + t; }
  int xi_col(int i, int h) const { return xi + i * depth + h; }
  int delta_col(int t, int j) const { return delta + t * p + j; }
  int yhat_col(int i) const { return yhat + i; }
  int u_col(int t) const { return u + t; }
};

// Minimization MILP: objective . x + objective_offset.
struct MilpModel {
  std::vector<Variable> variables;
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<Constraint> constraints;
  std::unordered_map<std::string, int> var_index;
  double big_m = 100.0;
  double epsilon = 1e-5;
  TreeLayout layout;

  int num_vars() const { return static_cast<int>(variables.size()); }
  int num_rows() const { return static_cast<int>(constraints.size()); }

  int add_variable(std::string name, VarKind kind, double lower, double upper,
                   double cost = 0.0);
  int add_constraint(Constraint row);

  double evaluate_objective(const std::vector<double>& x) const;
  double row_activity(const Constraint& row, const std::vector<double>& x) const;
  void rebuild_index();
};

}  // namespace loct
