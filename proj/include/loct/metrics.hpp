#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loct/tree.hpp"

namespace loct {

struct ConfusionCounts {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;

  long total() const { return tp + tn + fp + fn; }
};

// Labels are +1 (positive) and -1 (negative).
ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted);

struct BalancedAccuracy {
  double value = 0.0;
  // Set when one class has no true members; its recall then counts as 0.
  bool missing_class = false;
};

// (TP/(TP+FN) + TN/(TN+FP)) / 2.
BalancedAccuracy balanced_accuracy(const ConfusionCounts& counts);

// Mean number of weights with magnitude above `tolerance` per branch node.
double sparsity(const TreeModel& model, double tolerance = 1e-6);

struct ProfileStep {
  double tau = 1.0;
  double rho = 0.0;
};

// Right-continuous step function: rho(tau) is the value of the last step with
// step.tau <= tau (0 before the first step).
struct ProfileCurve {
  std::string solver;
  std::vector<ProfileStep> steps;

  double rho(double tau) const;
};

struct ProfileSet {
  std::vector<ProfileCurve> curves;
  double eta_max = 1.0;                       // ratio assigned to failures
  std::vector<std::vector<double>> ratios;    // problems x solvers
};

// costs[problem][solver]; std::nullopt marks a failure. Finite costs must be
// positive and every problem needs at least one success. Failures get the
// ratio 2 * (largest finite ratio).
ProfileSet performance_profiles(const std::vector<std::string>& solvers,
                                const std::vector<std::vector<std::optional<double>>>& costs);

// Fraction of problems whose gap from the per-problem best value is <= t, as
// a right-continuous step function of t. values[problem][model] with larger
// values better; std::nullopt marks a failed run, which never counts.
std::vector<ProfileCurve> gap_curve(const std::vector<std::string>& models,
                                    const std::vector<std::vector<std::optional<double>>>& values);

struct RunRecord {
  std::string problem;
  std::uint64_t seed = 0;
  std::string model;
  int depth = 0;
  double bacc = 0.0;
  double time_s = 0.0;
  double gap = 0.0;
  double sparsity = 0.0;
  bool failed = false;  // no incumbent or an error; excluded from profiles
};

struct ReportFiles {
  std::filesystem::path results;
  std::filesystem::path time_profile;
  std::filesystem::path gap_curve;
};

// Writes results.csv (problem,seed,model,depth,bacc,time_s,gap,sparsity),
// time_profile.csv (solver,tau,rho) and bacc_gap_curve.csv (model,t,fraction).
// A problem is one (dataset, seed) pair.
ReportFiles emit_report(const std::vector<RunRecord>& runs, const std::filesystem::path& out_dir);

std::string format_number(double value);

}  // namespace loct
