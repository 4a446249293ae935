#include "loct/mip_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "loct/error.hpp"
#include "loct/lp_solver.hpp"

namespace loct {
namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  double bound = -kInf;  // parent relaxation value
  int depth = 0;
  long seq = 0;
  std::vector<signed char> fix;  // per binary: -1 free, 0 or 1 fixed
  std::shared_ptr<const LpBasis> basis;
};

struct NodeOrder {
  // std::priority_queue pops the "largest"; we want lowest bound, then deeper,
  // then earlier insertion.
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const SolverConfig& config,
                 const PrimalHeuristic& heuristic)
      : model_(model), config_(config), heuristic_(heuristic), lp_(relax(model)),
        start_(Clock::now()),
        deadline_(start_ + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(config.time_limit_seconds))) {
    for (int j = 0; j < model.num_vars(); ++j) {
      if (model.variables[static_cast<std::size_t>(j)].kind == VarKind::binary) {
        binaries_.push_back(j);
      }
    }
    lp_options_.deadline = deadline_;
  }

  MipSolution run() {
    spdlog::info(
        "branch and bound: {} columns ({} binary), {} rows, time_limit={}s int_tol={} "
        "gap_tol={} plunge_depth={}",
        model_.num_vars(), binaries_.size(), model_.num_rows(), config_.time_limit_seconds,
        config_.integrality_tolerance, config_.relative_gap_tolerance, config_.plunge_depth);

    if (config_.warm_start) {
      auto violations = validate_assignment(model_, *config_.warm_start, 1e-7,
                                            config_.integrality_tolerance);
      if (violations.empty()) {
        out_.warm_start_accepted = true;
        set_incumbent(*config_.warm_start, model_.evaluate_objective(*config_.warm_start));
      } else {
        spdlog::warn("warm start rejected: {}", describe(violations));
        out_.warm_start_violations = std::move(violations);
      }
    }

    Node root;
    root.fix.assign(binaries_.size(), -1);
    root.seq = seq_++;
    heap_.push(std::move(root));

    bool interrupted = false;
    while (!heap_.empty()) {
      if (limits_reached()) {
        interrupted = true;
        break;
      }
      Node node = heap_.top();
      heap_.pop();
      if (node.bound >= prune_threshold()) continue;
      update_bound(std::min(node.bound, heap_.empty() ? kInf : heap_.top().bound));
      if (gap_closed()) {
        heap_ = {};
        break;
      }

      // Depth-first plunge from the selected node.
      for (int step = 0;; ++step) {
        auto result = process(node);
        if (result.interrupted) {
          interrupted = true;
          break;
        }
        if (!result.child) break;
        if (step + 1 >= config_.plunge_depth || limits_reached()) {
          heap_.push(std::move(*result.child));
          break;
        }
        node = std::move(*result.child);
      }
      if (interrupted) break;
      maybe_log(false);
    }

    double remaining = kInf;
    while (!heap_.empty() && heap_.top().bound >= prune_threshold()) heap_.pop();
    if (!heap_.empty()) remaining = heap_.top().bound;
    const bool exhausted = heap_.empty();

    out_.elapsed_seconds = seconds();
    out_.nodes = nodes_;
    out_.lp_iterations = lp_iterations_;
    if (out_.has_incumbent()) {
      if (exhausted || remaining >= prune_threshold()) {
        update_bound(out_.objective);
      } else {
        update_bound(std::min(remaining, out_.objective));
      }
      out_.bound = std::min(out_.bound, out_.objective);
      out_.gap = relative_gap(out_.objective, out_.bound);
      out_.status = (exhausted || out_.gap <= config_.relative_gap_tolerance)
                        ? MipStatus::optimal
                        : MipStatus::feasible_time_limit;
      if (out_.status == MipStatus::optimal && out_.gap > config_.relative_gap_tolerance) {
        out_.gap = 0.0;
      }
    } else if (exhausted) {
      out_.status = MipStatus::infeasible;
      out_.bound = kInf;
    } else {
      out_.status = MipStatus::unknown_time_limit;
      if (std::isfinite(remaining)) update_bound(remaining);
    }
    maybe_log(true);
    return std::move(out_);
  }

 private:
  struct StepResult {
    std::optional<Node> child;
    bool interrupted = false;
  };

  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  bool limits_reached() const {
    if (Clock::now() >= deadline_) return true;
    return config_.node_limit > 0 && nodes_ >= config_.node_limit;
  }

  double prune_threshold() const {
    if (!out_.has_incumbent()) return kInf;
    const double inc = out_.objective;
    return inc - config_.relative_gap_tolerance * std::max(1e-10, std::abs(inc));
  }

  bool gap_closed() const {
    return out_.has_incumbent() &&
           relative_gap(out_.objective, out_.bound) <= config_.relative_gap_tolerance;
  }

  void record() {
    out_.trace.push_back({nodes_, out_.objective, out_.bound, seconds()});
  }

  void update_bound(double bound) {
    if (bound > out_.bound) {
      out_.bound = bound;
      record();
    }
  }

  void set_incumbent(const std::vector<double>& values, double objective) {
    out_.values = values;
    out_.objective = objective;
    record();
    spdlog::debug("new incumbent {:.10g} at node {}", objective, nodes_);
  }

  void maybe_log(bool force) {
    const double now = seconds();
    if (!force && now - last_log_ < config_.log_interval_seconds) return;
    last_log_ = now;
    spdlog::info("node={} incumbent={:.10g} bound={:.10g} gap={:.6g} time={:.2f}", nodes_,
                 out_.objective, out_.bound, relative_gap(out_.objective, out_.bound), now);
  }

  void apply_fixings(const std::vector<signed char>& fix, LpProblem& lp) const {
    for (std::size_t k = 0; k < binaries_.size(); ++k) {
      const int j = binaries_[k];
      if (fix[k] >= 0) {
        lp.col_lower[static_cast<std::size_t>(j)] = fix[k];
        lp.col_upper[static_cast<std::size_t>(j)] = fix[k];
      } else {
        lp.col_lower[static_cast<std::size_t>(j)] = lp_.col_lower[static_cast<std::size_t>(j)];
        lp.col_upper[static_cast<std::size_t>(j)] = lp_.col_upper[static_cast<std::size_t>(j)];
      }
    }
  }

  LpSolution solve_relaxation(const std::vector<signed char>& fix, const LpBasis* basis) {
    apply_fixings(fix, work_);
    auto sol = solve_lp(work_, basis, lp_options_);
    lp_iterations_ += sol.iterations;
    return sol;
  }

  // Fixes the binaries of `values` and re-optimizes the continuous columns;
  // the result becomes the incumbent when feasible and better.
  void try_candidate(const std::vector<double>& values, const LpBasis* basis) {
    if (values.size() != static_cast<std::size_t>(model_.num_vars())) return;
    if (validate_assignment(model_, values, 1e-7, config_.integrality_tolerance).empty()) {
      const double obj = model_.evaluate_objective(values);
      if (obj < prune_threshold()) set_incumbent(values, obj);
    }
    std::vector<signed char> fix(binaries_.size());
    for (std::size_t k = 0; k < binaries_.size(); ++k) {
      fix[k] = values[static_cast<std::size_t>(binaries_[k])] > 0.5 ? 1 : 0;
    }
    if (!polished_.insert(fix).second) return;
    const auto sol = solve_relaxation(fix, basis);
    if (sol.status != LpStatus::optimal) return;
    auto polished = sol.x;
    for (std::size_t k = 0; k < binaries_.size(); ++k) {
      polished[static_cast<std::size_t>(binaries_[k])] = fix[k];
    }
    if (!validate_assignment(model_, polished, 1e-7, config_.integrality_tolerance).empty()) {
      return;
    }
    const double obj = model_.evaluate_objective(polished);
    if (obj < prune_threshold()) set_incumbent(polished, obj);
  }

  StepResult process(Node& node) {
    StepResult result;
    auto sol = solve_relaxation(node.fix, node.basis.get());
    if (sol.status == LpStatus::time_limit) {
      heap_.push(node);
      result.interrupted = true;
      return result;
    }
    ++nodes_;
    if (sol.status == LpStatus::iteration_limit || sol.status == LpStatus::unbounded) {
      // Retry once from the slack basis before giving up on the node. The
      // relaxation of a bounded program reporting a ray is a numerical issue
      // of the warm basis.
      sol = solve_relaxation(node.fix, nullptr);
      if (sol.status == LpStatus::time_limit) {
        --nodes_;
        heap_.push(node);
        result.interrupted = true;
        return result;
      }
      if (sol.status == LpStatus::iteration_limit) {
        throw SolverError(fmt::format("LP iteration limit at node {}", nodes_));
      }
    }
    if (sol.status == LpStatus::infeasible) return result;
    if (sol.status == LpStatus::unbounded) {
      throw SolverError("LP relaxation is unbounded");
    }
    const double obj = sol.objective + model_.objective_offset;
    if (obj >= prune_threshold()) return result;

    const auto basis = std::make_shared<const LpBasis>(std::move(sol.basis));

    if (heuristic_ && (nodes_ == 1 || nodes_ % std::max(1, config_.heuristic_interval) == 0)) {
      if (auto candidate = heuristic_(sol.x)) try_candidate(*candidate, basis.get());
      if (obj >= prune_threshold()) return result;
    }

    int branch = -1;
    double best_frac = config_.integrality_tolerance;
    for (std::size_t k = 0; k < binaries_.size(); ++k) {
      if (node.fix[k] >= 0) continue;
      const double v = sol.x[static_cast<std::size_t>(binaries_[k])];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > best_frac) {
        best_frac = frac;
        branch = static_cast<int>(k);
      }
    }

    if (branch < 0) {
      auto rounded = sol.x;
      for (const int j : binaries_) {
        rounded[static_cast<std::size_t>(j)] = std::round(rounded[static_cast<std::size_t>(j)]);
      }
      try_candidate(rounded, basis.get());
      return result;
    }

    const double v = sol.x[static_cast<std::size_t>(binaries_[static_cast<std::size_t>(branch)])];
    Node down;
    down.bound = obj;
    down.depth = node.depth + 1;
    down.fix = node.fix;
    down.fix[static_cast<std::size_t>(branch)] = 0;
    down.basis = basis;
    down.seq = seq_++;
    Node up = down;
    up.fix[static_cast<std::size_t>(branch)] = 1;
    up.seq = seq_++;
    if (v >= 0.5) {
      heap_.push(std::move(down));
      result.child = std::move(up);
    } else {
      heap_.push(std::move(up));
      result.child = std::move(down);
    }
    return result;
  }

  const MilpModel& model_;
  const SolverConfig& config_;
  const PrimalHeuristic& heuristic_;
  const LpProblem lp_;
  LpProblem work_ = lp_;
  LpOptions lp_options_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  std::vector<int> binaries_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> heap_;
  std::set<std::vector<signed char>> polished_;
  MipSolution out_;
  long nodes_ = 0;
  long lp_iterations_ = 0;
  long seq_ = 0;
  double last_log_ = 0.0;
};

}  // namespace

void SolverConfig::validate() const {
  if (!(time_limit_seconds > 0.0)) throw SolverError("time limit must be positive");
  if (!(integrality_tolerance > 0.0) || integrality_tolerance >= 0.5) {
    throw SolverError("integrality tolerance must lie in (0, 0.5)");
  }
  if (!(relative_gap_tolerance > 0.0)) throw SolverError("gap tolerance must be positive");
  if (plunge_depth < 1) throw SolverError("plunge depth must be at least 1");
}

std::string_view to_string(MipStatus status) {
  switch (status) {
    case MipStatus::optimal: return "optimal";
    case MipStatus::feasible_time_limit: return "feasible_time_limit";
    case MipStatus::infeasible: return "infeasible";
    case MipStatus::unknown_time_limit: return "unknown_time_limit";
  }
  return "unknown";
}

double relative_gap(double objective, double bound) {
  if (!std::isfinite(objective) || !std::isfinite(bound)) return kInf;
  return std::max(0.0, (objective - bound) / std::max(1e-10, std::abs(objective)));
}

std::vector<Violation> validate_assignment(const MilpModel& model,
                                           const std::vector<double>& values,
                                           double tolerance, double integrality_tolerance) {
  std::vector<Violation> out;
  if (values.size() != static_cast<std::size_t>(model.num_vars())) {
    out.push_back({-1, -1, "<assignment>", "length",
                   std::abs(static_cast<double>(values.size()) - model.num_vars())});
    return out;
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& var = model.variables[static_cast<std::size_t>(j)];
    const double v = values[static_cast<std::size_t>(j)];
    if (!std::isfinite(v)) {
      out.push_back({-1, j, var.name, "bound", kInf});
      continue;
    }
    const double below = var.lower - v;
    const double above = v - var.upper;
    if (below > tolerance || above > tolerance) {
      out.push_back({-1, j, var.name, "bound", std::max(below, above)});
    }
    if (var.kind == VarKind::binary) {
      const double frac = std::abs(v - std::round(v));
      if (frac > integrality_tolerance) out.push_back({-1, j, var.name, "integrality", frac});
    }
  }
  for (int i = 0; i < model.num_rows(); ++i) {
    const auto& row = model.constraints[static_cast<std::size_t>(i)];
    const double act = model.row_activity(row, values);
    double violation = 0.0;
    switch (row.sense) {
      case Sense::le: violation = act - row.rhs; break;
      case Sense::ge: violation = row.rhs - act; break;
      case Sense::eq: violation = std::abs(act - row.rhs); break;
    }
    if (violation > tolerance || !std::isfinite(act)) {
      out.push_back({i, -1, row.name, "row", violation});
    }
  }
  return out;
}

std::string describe(const std::vector<Violation>& violations, std::size_t limit) {
  std::string text = fmt::format("{} violation(s)", violations.size());
  for (std::size_t k = 0; k < std::min(limit, violations.size()); ++k) {
    const auto& v = violations[k];
    text += fmt::format("; {} {} by {:.3g}", v.what, v.name, v.amount);
  }
  if (violations.size() > limit) text += "; ...";
  return text;
}

MipSolution solve_mip(const MilpModel& model, const SolverConfig& config,
                      const PrimalHeuristic& heuristic) {
  config.validate();
  BranchAndBound bb(model, config, heuristic);
  return bb.run();
}

}  // namespace loct
