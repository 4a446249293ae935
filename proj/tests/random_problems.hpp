#pragma once

#include <random>
#include <string>

#include "loct/milp.hpp"
#include "oracles.hpp"

namespace testing_support {

struct RandomMilp {
  loct::MilpModel model;
  oracle::DenseLp dense;
  std::vector<int> binaries;
};

struct RandomMilpShape {
  int max_binaries = 12;
  int max_continuous = 20;
  int max_rows = 25;
};

// Random mixed-binary program. Most instances are feasible by construction
// (rows are built around a hidden point); about one in ten gets a pair of
// contradictory rows so that infeasibility is also exercised.
inline RandomMilp random_milp(std::uint64_t seed, const RandomMilpShape& shape = {}) {
  std::mt19937_64 rng(seed);
  auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const int nb = uniform_int(1, shape.max_binaries);
  const int nc = uniform_int(1, shape.max_continuous);
  const int rows = uniform_int(1, shape.max_rows);
  const int n = nb + nc;

  RandomMilp out;
  std::vector<double> hidden(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const bool binary = j < nb;
    const double lo = binary ? 0.0 : (uniform_int(0, 1) ? -5.0 : 0.0);
    const double hi = binary ? 1.0 : lo + 10.0;
    const double cost = std::round(uniform(-5.0, 5.0) * 4.0) / 4.0;
    out.model.add_variable((binary ? "y" : "x") + std::to_string(j),
                           binary ? loct::VarKind::binary : loct::VarKind::continuous, lo, hi,
                           cost);
    out.dense.c.push_back(cost);
    out.dense.lower.push_back(lo);
    out.dense.upper.push_back(hi);
    hidden[static_cast<std::size_t>(j)] = binary ? uniform_int(0, 1) : uniform(lo, hi);
    if (binary) out.binaries.push_back(j);
  }
  const bool make_infeasible = uniform_int(0, 9) == 0;
  for (int i = 0; i < rows - (make_infeasible ? 1 : 0); ++i) {
    loct::Constraint row;
    row.name = "r" + std::to_string(i);
    std::vector<double> dense_row(static_cast<std::size_t>(n), 0.0);
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (uniform(0.0, 1.0) > 0.5) continue;
      const double a = uniform_int(-5, 5);
      if (a == 0.0) continue;
      row.index.push_back(j);
      row.coef.push_back(a);
      dense_row[static_cast<std::size_t>(j)] = a;
      act += a * hidden[static_cast<std::size_t>(j)];
    }
    const int kind = uniform_int(0, 9);
    if (kind < 5) {
      row.sense = loct::Sense::le;
      row.rhs = act + uniform(0.0, 3.0);
    } else if (kind < 9) {
      row.sense = loct::Sense::ge;
      row.rhs = act - uniform(0.0, 3.0);
    } else {
      row.sense = loct::Sense::eq;
      row.rhs = act;
    }
    out.dense.a.push_back(dense_row);
    out.dense.rhs.push_back(row.rhs);
    out.dense.sense.push_back(row.sense == loct::Sense::le   ? oracle::RowSense::le
                              : row.sense == loct::Sense::ge ? oracle::RowSense::ge
                                                             : oracle::RowSense::eq);
    out.model.add_constraint(std::move(row));
  }
  if (make_infeasible) {
    // The sum of all columns cannot exceed the sum of their upper bounds.
    loct::Constraint row;
    row.name = "contradiction";
    std::vector<double> dense_row(static_cast<std::size_t>(n), 1.0);
    double max_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      row.index.push_back(j);
      row.coef.push_back(1.0);
      max_sum += out.dense.upper[static_cast<std::size_t>(j)];
    }
    row.sense = loct::Sense::ge;
    row.rhs = max_sum + 1.0;
    out.dense.a.push_back(dense_row);
    out.dense.rhs.push_back(row.rhs);
    out.dense.sense.push_back(oracle::RowSense::ge);
    out.model.add_constraint(std::move(row));
  }
  return out;
}

}  // namespace testing_support
