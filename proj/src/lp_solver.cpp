#include "loct/lp_solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "loct/error.hpp"

namespace loct {
namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Eta {
  int pivot_row = 0;
  double pivot = 1.0;
  std::vector<int> index;  // rows other than pivot_row with nonzero entries
  std::vector<double> value;
};

// Working state of one simplex run. Variables 0..n-1 are structural, n..n+m-1
// are logicals with r = A x, so the system is [A  -I] (x, r) = 0.
class Simplex {
 public:
  Simplex(const LpProblem& problem, const LpOptions& options)
      : p_(problem), opt_(options), m_(problem.rows()), n_(problem.cols()) {
    lower_.resize(static_cast<std::size_t>(n_ + m_));
    upper_.resize(static_cast<std::size_t>(n_ + m_));
    for (int j = 0; j < n_; ++j) {
      lower_[j] = p_.col_lower[j];
      upper_[j] = p_.col_upper[j];
    }
    for (int i = 0; i < m_; ++i) {
      lower_[n_ + i] = p_.row_lower[i];
      upper_[n_ + i] = p_.row_upper[i];
    }
    for (int j = 0; j < n_ + m_; ++j) {
      if (lower_[j] > upper_[j]) trivially_infeasible_ = true;
    }
    cost_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
    for (int j = 0; j < n_; ++j) cost_[j] = p_.obj[j];
    x_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
    max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations
                                               : std::max<long>(20000, 30L * (n_ + m_));
  }

  LpSolution run(const LpBasis* warm) {
    LpSolution out;
    if (trivially_infeasible_) {
      out.status = LpStatus::infeasible;
      return out;
    }
    if (warm != nullptr && warm->basic.size() == static_cast<std::size_t>(m_) &&
        warm->status.size() == static_cast<std::size_t>(n_ + m_)) {
      basic_ = warm->basic;
      status_ = warm->status;
    } else {
      slack_basis();
    }
    normalize_nonbasic();
    if (!refactor()) {
      slack_basis();
      normalize_nonbasic();
      if (!refactor()) throw SolverError("slack basis failed to factorize");
    }
    out.status = iterate();
    out.iterations = iterations_;
    out.x.assign(x_.begin(), x_.begin() + n_);
    out.objective = 0.0;
    for (int j = 0; j < n_; ++j) out.objective += p_.obj[j] * out.x[j];
    out.basis.basic = basic_;
    out.basis.status = status_;
    return out;
  }

 private:
  double tol() const { return opt_.primal_tolerance; }

  void slack_basis() {
    basic_.resize(static_cast<std::size_t>(m_));
    status_.assign(static_cast<std::size_t>(n_ + m_), VarStatus::at_lower);
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      status_[n_ + i] = VarStatus::basic;
    }
  }

  // Places every nonbasic variable on a finite bound (or zero when free),
  // fixing statuses that no longer match the current bounds.
  void normalize_nonbasic() {
    for (int j = 0; j < n_ + m_; ++j) {
      auto& s = status_[j];
      if (s == VarStatus::basic) continue;
      const bool lo = std::isfinite(lower_[j]);
      const bool hi = std::isfinite(upper_[j]);
      if (s == VarStatus::at_upper && !hi) s = lo ? VarStatus::at_lower : VarStatus::at_zero;
      if (s == VarStatus::at_lower && !lo) s = hi ? VarStatus::at_upper : VarStatus::at_zero;
      if (s == VarStatus::at_zero && (lo || hi)) s = lo ? VarStatus::at_lower : VarStatus::at_upper;
      switch (s) {
        case VarStatus::at_lower: x_[j] = lower_[j]; break;
        case VarStatus::at_upper: x_[j] = upper_[j]; break;
        case VarStatus::at_zero: x_[j] = 0.0; break;
        case VarStatus::basic: break;
      }
    }
  }

  // Column j of [A -I] added into `out` scaled by `scale`.
  void add_column(int j, double scale, Eigen::VectorXd& out) const {
    if (j < n_) {
      for (SparseMatrix::InnerIterator it(p_.a, j); it; ++it) out[it.row()] += scale * it.value();
    } else {
      out[j - n_] -= scale;
    }
  }

  double column_dot(int j, const Eigen::VectorXd& y) const {
    if (j < n_) {
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(p_.a, j); it; ++it) s += it.value() * y[it.row()];
      return s;
    }
    return -y[j - n_];
  }

  bool refactor() {
    etas_.clear();
    std::vector<Eigen::Triplet<double>> triplets;
    for (int k = 0; k < m_; ++k) {
      const int j = basic_[k];
      if (j < n_) {
        for (SparseMatrix::InnerIterator it(p_.a, j); it; ++it) {
          triplets.emplace_back(static_cast<int>(it.row()), k, it.value());
        }
      } else {
        triplets.emplace_back(j - n_, k, -1.0);
      }
    }
    SparseMatrix basis(m_, m_);
    basis.setFromTriplets(triplets.begin(), triplets.end());
    basis.makeCompressed();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    if (lu_.info() != Eigen::Success) return false;
    for (int k = 0; k < m_; ++k) status_[basic_[k]] = VarStatus::basic;
    recompute_basic_values();
    // A numerically singular factorization shows up as non-finite values.
    for (int k = 0; k < m_; ++k) {
      if (!std::isfinite(x_[basic_[k]])) return false;
    }
    return true;
  }

  void recompute_basic_values() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] != VarStatus::basic && x_[j] != 0.0) add_column(j, -x_[j], rhs);
    }
    const Eigen::VectorXd xb = ftran(rhs);
    for (int k = 0; k < m_; ++k) x_[basic_[k]] = xb[k];
  }

  Eigen::VectorXd ftran(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd v = lu_.solve(rhs);
    for (const auto& eta : etas_) {
      const double vr = v[eta.pivot_row] / eta.pivot;
      v[eta.pivot_row] = vr;
      if (vr == 0.0) continue;
      for (std::size_t k = 0; k < eta.index.size(); ++k) v[eta.index[k]] -= eta.value[k] * vr;
    }
    return v;
  }

  Eigen::VectorXd btran(Eigen::VectorXd c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c[it->pivot_row];
      for (std::size_t k = 0; k < it->index.size(); ++k) s -= it->value[k] * c[it->index[k]];
      c[it->pivot_row] = s / it->pivot;
    }
    return lu_.transpose().solve(c);
  }

  // Sum of bound violations of basic variables; fills the phase-one costs.
  double infeasibility(Eigen::VectorXd& cb) const {
    double total = 0.0;
    for (int k = 0; k < m_; ++k) {
      const int j = basic_[k];
      if (x_[j] < lower_[j] - tol()) {
        cb[k] = -1.0;
        total += lower_[j] - x_[j];
      } else if (x_[j] > upper_[j] + tol()) {
        cb[k] = 1.0;
        total += x_[j] - upper_[j];
      } else {
        cb[k] = 0.0;
      }
    }
    return total;
  }

  double phase_two_objective() const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += cost_[j] * x_[j];
    return s;
  }

  LpStatus iterate() {
    int degenerate = 0;
    bool bland = false;
    double best_progress = kInf;
    int failures = 0;
    bool verified = false;
    bool ray_checked = false;
    bool was_phase_one = true;

    while (true) {
      if (iterations_ >= max_iterations_) return LpStatus::iteration_limit;
      if (opt_.deadline && (iterations_ & 15) == 0 &&
          std::chrono::steady_clock::now() > *opt_.deadline) {
        return LpStatus::time_limit;
      }
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        if (!recover()) return numerical_failure(failures);
      }

      Eigen::VectorXd cb(m_);
      const double infeas = infeasibility(cb);
      const bool phase_one = infeas > 0.0;
      if (!phase_one) {
        for (int k = 0; k < m_; ++k) cb[k] = cost_[basic_[k]];
      }
      if (phase_one != was_phase_one) {
        was_phase_one = phase_one;
        best_progress = kInf;
      }
      const double progress = phase_one ? infeas : phase_two_objective();
      if (progress < best_progress - 1e-12 * std::max(1.0, std::abs(progress))) {
        best_progress = progress;
        degenerate = 0;
        bland = false;
      }

      const Eigen::VectorXd y = btran(cb);
      // Entering variable.
      int entering = -1;
      double entering_d = 0.0;
      double best_score = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        const auto s = status_[j];
        if (s == VarStatus::basic) continue;
        if (lower_[j] == upper_[j]) continue;
        const double cj = phase_one ? 0.0 : cost_[j];
        const double d = cj - column_dot(j, y);
        bool eligible = false;
        switch (s) {
          case VarStatus::at_lower: eligible = d < -opt_.dual_tolerance; break;
          case VarStatus::at_upper: eligible = d > opt_.dual_tolerance; break;
          case VarStatus::at_zero: eligible = std::abs(d) > opt_.dual_tolerance; break;
          case VarStatus::basic: break;
        }
        if (!eligible) continue;
        if (bland) {
          entering = j;
          entering_d = d;
          break;
        }
        if (std::abs(d) > best_score) {
          best_score = std::abs(d);
          entering = j;
          entering_d = d;
        }
      }

      if (entering < 0) {
        // Confirm on a fresh factorization before concluding.
        if (!verified && !etas_.empty()) {
          verified = true;
          if (!recover()) return numerical_failure(failures);
          continue;
        }
        if (phase_one) return LpStatus::infeasible;
        return LpStatus::optimal;
      }
      verified = false;

      const double dir = entering_d < 0 ? 1.0 : -1.0;
      Eigen::VectorXd column = Eigen::VectorXd::Zero(m_);
      add_column(entering, 1.0, column);
      const Eigen::VectorXd alpha = ftran(column);

      // Basic k changes by -theta * dir * alpha[k].
      const double range = upper_[entering] - lower_[entering];
      int leave = -1;
      double theta = kInf;
      double leave_value = 0.0;
      {
        // Harris pass one: largest step keeping relaxed bounds.
        double theta_max = kInf;
        for (int k = 0; k < m_; ++k) {
          const double g = -dir * alpha[k];
          if (std::abs(g) <= opt_.pivot_tolerance) continue;
          const int j = basic_[k];
          const double v = x_[j];
          double limit = kInf;
          if (v < lower_[j] - tol()) {
            if (g > 0) limit = (lower_[j] - v) / g;
          } else if (v > upper_[j] + tol()) {
            if (g < 0) limit = (v - upper_[j]) / -g;
          } else if (g < 0) {
            if (std::isfinite(lower_[j])) limit = (v - lower_[j] + tol()) / -g;
          } else {
            if (std::isfinite(upper_[j])) limit = (upper_[j] - v + tol()) / g;
          }
          theta_max = std::min(theta_max, limit);
        }
        // Pass two: among rows whose exact ratio fits, the largest pivot.
        double best_pivot = 0.0;
        for (int k = 0; k < m_; ++k) {
          const double g = -dir * alpha[k];
          if (std::abs(g) <= opt_.pivot_tolerance) continue;
          const int j = basic_[k];
          const double v = x_[j];
          double ratio = kInf;
          double bound = 0.0;
          if (v < lower_[j] - tol()) {
            if (g > 0) { ratio = (lower_[j] - v) / g; bound = lower_[j]; }
          } else if (v > upper_[j] + tol()) {
            if (g < 0) { ratio = (v - upper_[j]) / -g; bound = upper_[j]; }
          } else if (g < 0) {
            if (std::isfinite(lower_[j])) { ratio = (v - lower_[j]) / -g; bound = lower_[j]; }
          } else {
            if (std::isfinite(upper_[j])) { ratio = (upper_[j] - v) / g; bound = upper_[j]; }
          }
          if (!(ratio <= theta_max)) continue;
          const bool better = bland ? (leave < 0 || ratio < theta ||
                                       (ratio == theta && j < basic_[leave]))
                                    : std::abs(g) > best_pivot;
          if (better) {
            best_pivot = std::abs(g);
            leave = k;
            theta = std::max(0.0, ratio);
            leave_value = bound;
          }
        }
        if (range <= theta_max && range <= theta) {
          leave = -1;
          theta = range;
        }
      }

      if (!std::isfinite(theta)) {
        // In phase one this cannot happen in exact arithmetic, and in phase
        // two it may be drift as well: confirm on a fresh factorization.
        if (phase_one || !ray_checked) {
          ray_checked = true;
          if (!recover()) return numerical_failure(failures);
          continue;
        }
        double filtered = 0.0;
        for (int k = 0; k < m_; ++k) filtered = std::max(filtered, std::abs(alpha[k]));
        spdlog::debug("simplex: no blocking row for column {} (d={:.3g}, bounds [{}, {}], largest |alpha| {:.3g}, "
                      "{} etas)", entering, entering_d, lower_[entering], upper_[entering], filtered, etas_.size());
        return LpStatus::unbounded;
      }

      ++iterations_;
      ray_checked = false;
      if (theta <= 1e-12) {
        if (++degenerate >= opt_.stall_threshold) bland = true;
      }

      // Apply the step.
      x_[entering] += dir * theta;
      for (int k = 0; k < m_; ++k) {
        if (alpha[k] != 0.0) x_[basic_[k]] -= theta * dir * alpha[k];
      }

      if (leave < 0) {
        status_[entering] = dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
        x_[entering] = dir > 0 ? upper_[entering] : lower_[entering];
        continue;
      }

      const int leaving = basic_[leave];
      x_[leaving] = leave_value;
      status_[leaving] = leave_value == lower_[leaving] ? VarStatus::at_lower : VarStatus::at_upper;
      basic_[leave] = entering;
      status_[entering] = VarStatus::basic;

      Eta eta;
      eta.pivot_row = leave;
      eta.pivot = alpha[leave];
      for (int k = 0; k < m_; ++k) {
        if (k != leave && alpha[k] != 0.0) {
          eta.index.push_back(k);
          eta.value.push_back(alpha[k]);
        }
      }
      etas_.push_back(std::move(eta));
      if (std::abs(alpha[leave]) < 1e-7) {
        // Small pivot: refactor right away to keep the eta file accurate.
        if (!recover()) return numerical_failure(failures);
      }
    }
  }

  // Refactor; on a singular basis fall back to the slack basis.
  bool recover() {
    if (refactor()) return true;
    ++resets_;
    if (resets_ > 3) return false;
    slack_basis();
    normalize_nonbasic();
    return refactor();
  }

  [[noreturn]] LpStatus numerical_failure(int) const {
    throw SolverError(fmt::format(
        "LP numerical failure: basis stayed singular after {} refactorization retries "
        "({} rows, {} columns, {} iterations)",
        resets_, m_, n_, iterations_));
  }

  const LpProblem& p_;
  const LpOptions& opt_;
  int m_;
  int n_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> x_;
  std::vector<int> basic_;
  std::vector<VarStatus> status_;
  std::vector<Eta> etas_;
  mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  long iterations_ = 0;
  long max_iterations_ = 0;
  int resets_ = 0;
  bool trivially_infeasible_ = false;
};

}  // namespace

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
    case LpStatus::time_limit: return "time_limit";
  }
  return "unknown";
}

LpProblem relax(const MilpModel& model) {
  LpProblem lp;
  const int n = model.num_vars();
  const int m = model.num_rows();
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < m; ++i) {
    const auto& row = model.constraints[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      if (row.coef[k] != 0.0) triplets.emplace_back(i, row.index[k], row.coef[k]);
    }
    switch (row.sense) {
      case Sense::le:
        lp.row_lower.push_back(-kInf);
        lp.row_upper.push_back(row.rhs);
        break;
      case Sense::ge:
        lp.row_lower.push_back(row.rhs);
        lp.row_upper.push_back(kInf);
        break;
      case Sense::eq:
        lp.row_lower.push_back(row.rhs);
        lp.row_upper.push_back(row.rhs);
        break;
    }
  }
  lp.a.resize(m, n);
  lp.a.setFromTriplets(triplets.begin(), triplets.end());
  lp.a.makeCompressed();
  lp.obj = model.objective;
  for (const auto& var : model.variables) {
    lp.col_lower.push_back(var.kind == VarKind::binary ? std::max(0.0, var.lower) : var.lower);
    lp.col_upper.push_back(var.kind == VarKind::binary ? std::min(1.0, var.upper) : var.upper);
  }
  return lp;
}

LpSolution solve_lp(const LpProblem& problem, const LpBasis* warm, const LpOptions& options) {
  if (static_cast<int>(problem.obj.size()) != problem.cols() ||
      static_cast<int>(problem.col_lower.size()) != problem.cols() ||
      static_cast<int>(problem.col_upper.size()) != problem.cols() ||
      static_cast<int>(problem.row_lower.size()) != problem.rows() ||
      static_cast<int>(problem.row_upper.size()) != problem.rows()) {
    throw SolverError("LP problem vectors do not match the matrix shape");
  }
  Simplex simplex(problem, options);
  return simplex.run(warm);
}

LpSolution solve_lp(const MilpModel& model, const std::vector<double>& col_lower,
                    const std::vector<double>& col_upper, const LpOptions& options) {
  LpProblem lp = relax(model);
  if (col_lower.size() != lp.col_lower.size() || col_upper.size() != lp.col_upper.size()) {
    throw SolverError("bound vectors do not match the model columns");
  }
  lp.col_lower = col_lower;
  lp.col_upper = col_upper;
  return solve_lp(lp, nullptr, options);
}

}  // namespace loct
