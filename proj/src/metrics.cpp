#include "loct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "loct/error.hpp"
#include "loct/milp.hpp"

namespace loct {
namespace {

std::vector<ProfileStep> cumulative_steps(std::vector<double> values, double first,
                                          std::size_t denominator) {
  std::sort(values.begin(), values.end());
  std::vector<ProfileStep> steps;
  const auto count_upto = [&](double t) {
    return static_cast<double>(std::upper_bound(values.begin(), values.end(), t) - values.begin()) /
           static_cast<double>(denominator);
  };
  steps.push_back({first, count_upto(first)});
  for (const double v : values) {
    if (!std::isfinite(v) || v <= steps.back().tau) continue;
    steps.push_back({v, count_upto(v)});
  }
  return steps;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EvaluationError(fmt::format("cannot open {} for writing", path.string()));
  return out;
}

}  // namespace

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw EvaluationError(fmt::format("{} labels but {} predictions", truth.size(), predicted.size()));
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pos = truth[i] > 0;
    const bool pred = predicted[i] > 0;
    if (pos && pred) ++c.tp;
    else if (pos) ++c.fn;
    else if (pred) ++c.fp;
    else ++c.tn;
  }
  return c;
}

BalancedAccuracy balanced_accuracy(const ConfusionCounts& counts) {
  BalancedAccuracy out;
  double sensitivity = 0.0;
  double specificity = 0.0;
  if (counts.tp + counts.fn > 0) {
    sensitivity = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
  } else {
    out.missing_class = true;
  }
  if (counts.tn + counts.fp > 0) {
    specificity = static_cast<double>(counts.tn) / static_cast<double>(counts.tn + counts.fp);
  } else {
    out.missing_class = true;
  }
  out.value = 0.5 * (sensitivity + specificity);
  return out;
}

double sparsity(const TreeModel& model, double tolerance) {
  if (tolerance < 0.0) throw EvaluationError("zero tolerance must be non-negative");
  if (model.weights.empty()) return 0.0;
  double total = 0.0;
  for (const auto& w : model.weights) {
    total += static_cast<double>((w.array().abs() > tolerance).count());
  }
  return total / static_cast<double>(model.weights.size());
}

double ProfileCurve::rho(double tau) const {
  double value = 0.0;
  for (const auto& step : steps) {
    if (step.tau <= tau) value = step.rho;
  }
  return value;
}

ProfileSet performance_profiles(const std::vector<std::string>& solvers,
                                const std::vector<std::vector<std::optional<double>>>& costs) {
  if (solvers.empty()) throw EvaluationError("performance profiles need at least one solver");
  if (costs.empty()) throw EvaluationError("performance profiles need at least one problem");
  ProfileSet out;
  double max_ratio = 1.0;
  for (std::size_t p = 0; p < costs.size(); ++p) {
    const auto& row = costs[p];
    if (row.size() != solvers.size()) {
      throw EvaluationError(fmt::format("problem {} has {} costs for {} solvers", p, row.size(),
                                        solvers.size()));
    }
    double best = kInf;
    for (const auto& c : row) {
      if (!c) continue;
      if (!(*c > 0.0) || !std::isfinite(*c)) {
        throw EvaluationError(fmt::format("problem {} has a non-positive or non-finite cost", p));
      }
      best = std::min(best, *c);
    }
    if (!std::isfinite(best)) {
      throw EvaluationError(fmt::format("every solver failed on problem {}", p));
    }
    std::vector<double> ratios;
    for (const auto& c : row) {
      ratios.push_back(c ? *c / best : kInf);
      if (c) max_ratio = std::max(max_ratio, *c / best);
    }
    out.ratios.push_back(std::move(ratios));
  }
  out.eta_max = 2.0 * max_ratio;
  for (auto& row : out.ratios) {
    for (auto& r : row) {
      if (!std::isfinite(r)) r = out.eta_max;
    }
  }
  for (std::size_t s = 0; s < solvers.size(); ++s) {
    std::vector<double> column;
    for (const auto& row : out.ratios) column.push_back(row[s]);
    out.curves.push_back({solvers[s], cumulative_steps(column, 1.0, costs.size())});
  }
  return out;
}

std::vector<ProfileCurve> gap_curve(const std::vector<std::string>& models,
                                    const std::vector<std::vector<std::optional<double>>>& values) {
  if (models.empty() || values.empty()) throw EvaluationError("gap curve needs non-empty input");
  std::vector<std::vector<double>> gaps(models.size());
  for (std::size_t p = 0; p < values.size(); ++p) {
    if (values[p].size() != models.size()) {
      throw EvaluationError(fmt::format("problem {} has {} values for {} models", p,
                                        values[p].size(), models.size()));
    }
    double best = -kInf;
    for (const auto& v : values[p]) {
      if (v) best = std::max(best, *v);
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
      gaps[m].push_back(values[p][m] ? best - *values[p][m] : kInf);
    }
  }
  std::vector<ProfileCurve> curves;
  for (std::size_t m = 0; m < models.size(); ++m) {
    curves.push_back({models[m], cumulative_steps(gaps[m], 0.0, values.size())});
  }
  return curves;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

ReportFiles emit_report(const std::vector<RunRecord>& runs, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw EvaluationError(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
  ReportFiles files{out_dir / "results.csv", out_dir / "time_profile.csv",
                    out_dir / "bacc_gap_curve.csv"};

  {
    auto out = open_output(files.results);
    out << "problem,seed,model,depth,bacc,time_s,gap,sparsity\n";
    for (const auto& r : runs) {
      out << r.problem << ',' << r.seed << ',' << r.model << ',' << r.depth << ','
          << (r.failed ? "nan" : format_number(r.bacc)) << ',' << format_number(r.time_s) << ','
          << (r.failed ? "nan" : format_number(r.gap)) << ','
          << (r.failed ? "nan" : format_number(r.sparsity)) << '\n';
    }
    if (!out) throw EvaluationError("failed writing results.csv");
  }

  // Problems are (dataset, seed) pairs; models keep first-appearance order.
  std::vector<std::string> models;
  std::vector<std::pair<std::string, std::uint64_t>> problems;
  std::map<std::pair<std::string, std::uint64_t>, std::map<std::string, const RunRecord*>> table;
  for (const auto& r : runs) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    const auto key = std::make_pair(r.problem, r.seed);
    if (std::find(problems.begin(), problems.end(), key) == problems.end()) problems.push_back(key);
    table[key].emplace(r.model, &r);
  }
  std::vector<std::vector<std::optional<double>>> times;
  std::vector<std::vector<std::optional<double>>> baccs;
  for (const auto& key : problems) {
    std::vector<std::optional<double>> t_row;
    std::vector<std::optional<double>> b_row;
    bool any = false;
    for (const auto& m : models) {
      const auto it = table[key].find(m);
      if (it == table[key].end() || it->second->failed) {
        t_row.emplace_back();
        b_row.emplace_back();
        continue;
      }
      any = true;
      t_row.emplace_back(std::max(it->second->time_s, 1e-9));
      b_row.emplace_back(it->second->bacc);
    }
    if (!any) continue;  // a problem nobody solved carries no information
    times.push_back(std::move(t_row));
    baccs.push_back(std::move(b_row));
  }

  {
    auto out = open_output(files.time_profile);
    out << "solver,tau,rho\n";
    if (!times.empty()) {
      const auto profiles = performance_profiles(models, times);
      for (const auto& curve : profiles.curves) {
        for (const auto& step : curve.steps) {
          out << curve.solver << ',' << format_number(step.tau) << ',' << format_number(step.rho)
              << '\n';
        }
        if (curve.steps.back().tau < profiles.eta_max) {
          out << curve.solver << ',' << format_number(profiles.eta_max) << ','
              << format_number(curve.rho(profiles.eta_max)) << '\n';
        }
      }
    }
    if (!out) throw EvaluationError("failed writing time_profile.csv");
  }
  {
    auto out = open_output(files.gap_curve);
    out << "model,t,fraction\n";
    if (!baccs.empty()) {
      for (const auto& curve : gap_curve(models, baccs)) {
        for (const auto& step : curve.steps) {
          out << curve.solver << ',' << format_number(step.tau) << ',' << format_number(step.rho)
              << '\n';
        }
      }
    }
    if (!out) throw EvaluationError("failed writing bacc_gap_curve.csv");
  }
  return files;
}

}  // namespace loct
