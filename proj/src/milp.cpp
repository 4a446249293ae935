#include "loct/milp.hpp"

#include <fmt/format.h>

#include "loct/error.hpp"

namespace loct {

int MilpModel::add_variable(std::string name, VarKind kind, double lower, double upper,
                            double cost) {
  if (lower > upper) {
    throw FormulationError(fmt::format("variable {} has lower bound {} above upper bound {}",
                                       name, lower, upper));
  }
  const int id = num_vars();
  var_index[name] = id;
  variables.push_back({std::move(name), kind, lower, upper});
  objective.push_back(cost);
  return id;
}

int MilpModel::add_constraint(Constraint row) {
  if (row.index.size() != row.coef.size()) {
    throw FormulationError(fmt::format("constraint {} has mismatched index/coef lengths", row.name));
  }
  for (const int j : row.index) {
    if (j < 0 || j >= num_vars()) {
      throw FormulationError(fmt::format("constraint {} references unknown column {}", row.name, j));
    }
  }
  constraints.push_back(std::move(row));
  return num_rows() - 1;
}

double MilpModel::evaluate_objective(const std::vector<double>& x) const {
  double total = objective_offset;
  for (std::size_t j = 0; j < objective.size(); ++j) total += objective[j] * x[j];
  return total;
}

double MilpModel::row_activity(const Constraint& row, const std::vector<double>& x) const {
  double total = 0.0;
  for (std::size_t k = 0; k < row.index.size(); ++k) {
    total += row.coef[k] * x[static_cast<std::size_t>(row.index[k])];
  }
  return total;
}

void MilpModel::rebuild_index() {
  var_index.clear();
  var_index.reserve(variables.size());
  for (int j = 0; j < num_vars(); ++j) var_index[variables[static_cast<std::size_t>(j)].name] = j;
}

}  // namespace loct
