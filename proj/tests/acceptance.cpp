// Acceptance runner. `acceptance N` checks criterion N, `acceptance` checks
// all of them. Each criterion prints one line:
//   criterion N: PASS|FAIL [name] <detail> (seconds)
// The exit code is nonzero when any requested criterion fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "loct/dataset.hpp"
#include "loct/formulation.hpp"
#include "loct/logistic.hpp"
#include "loct/metrics.hpp"
#include "loct/mip_solver.hpp"
#include "loct/training.hpp"
#include "lp_roundtrip.hpp"
#include "random_problems.hpp"
#include "synthetic.hpp"

using namespace loct;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail };

struct Outcome {
  Verdict verdict = Verdict::fail;
  std::string detail;
};

Outcome pass(std::string detail) { return {Verdict::pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Verdict::fail, std::move(detail)}; }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::span<const double> row_of(const Dataset& data, std::size_t i) {
  return {data.features.data() + static_cast<std::ptrdiff_t>(i) * data.features.cols(), data.cols()};
}

double bacc_of(const TreeModel& model, const Dataset& data) {
  std::vector<int> predicted;
  for (std::size_t i = 0; i < data.rows(); ++i) predicted.push_back(predict(model, row_of(data, i)));
  return balanced_accuracy(confusion(data.labels, predicted)).value;
}

TrainConfig base_config(int depth, double time_limit) {
  TrainConfig config;
  config.depth = depth;
  config.loss = {LossKind::logistic_pwl, TangentSet::V0, broadcast_c(1.0, depth)};
  config.reg.kind = RegKind::l1;
  config.solver.time_limit_seconds = time_limit;
  config.solver.log_interval_seconds = 1e9;
  config.node_time_limit_seconds = std::min(5.0, time_limit);
  return config;
}

// Standardized train/test pair from an 80/20 split.
std::pair<Dataset, Dataset> split_standardized(const Dataset& raw, std::uint64_t seed) {
  SplitSpec spec;
  spec.seed = seed;
  const auto [train_raw, test_raw] = train_test_split(raw, spec);
  const auto train = standardize(train_raw);
  return {train, apply_standardization(test_raw, *train.standardization)};
}

fs::path data_dir() { return fs::path(LOCT_DATA_DIR); }

// ---- 1: tangent-line underestimator -----------------------------------------

long double f_ref(long double v) { return v > 0 ? std::log1p(std::exp(-v)) : -v + std::log1p(std::exp(v)); }

Outcome tangent_suite() {
  const auto start = Clock::now();
  const std::array sets{TangentSet::V0, TangentSet::V1, TangentSet::V2, TangentSet::V3};
  std::array<std::vector<TangentLine>, 4> lines;
  for (std::size_t k = 0; k < sets.size(); ++k) lines[k] = tangent_lines(sets[k]);

  const int samples = 100000;
  double worst_excess = -kInf;
  long order_violations = 0;
  for (int i = 0; i < samples; ++i) {
    const double v = -50.0 + 100.0 * i / (samples - 1);
    const double f = static_cast<double>(f_ref(v));
    double prev = -kInf;
    for (const auto& set : lines) {
      const double g = pwl_logistic(set, v);
      worst_excess = std::max(worst_excess, g - f);
      if (g < prev) ++order_violations;
      prev = g;
    }
  }
  double worst_tangency = 0.0;
  int finite_points = 0;
  for (const auto& set : lines) {
    for (const auto& line : set) {
      if (!std::isfinite(line.origin)) continue;
      ++finite_points;
      worst_tangency = std::max(worst_tangency, std::abs(pwl_logistic(set, line.origin) -
                                                         static_cast<double>(f_ref(line.origin))));
    }
  }
  const double elapsed = seconds_since(start);
  const bool counts = lines[0].size() == 3 && lines[1].size() == 5 && lines[2].size() == 9 && lines[3].size() == 17;
  const bool ok = counts && worst_excess <= 1e-12 && worst_tangency <= 1e-9 && order_violations == 0 && elapsed < 5.0;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt::format("{} points, max(g - f) = {:.3g}, tangency error {:.3g} over {} points, {} order "
                      "violations, {:.2f} s",
                      samples, worst_excess, worst_tangency, finite_points, order_violations, elapsed)};
}

// ---- 2: solver against enumeration ------------------------------------------

Outcome solver_oracle() {
  const auto start = Clock::now();
  SolverConfig config;
  config.time_limit_seconds = 60.0;
  config.log_interval_seconds = 1e9;
  int matched = 0;
  int infeasible = 0;
  double solver_seconds = 0.0;
  std::string first_miss;
  const int instances = 200;
  for (int k = 0; k < instances; ++k) {
    const auto problem = testing_support::random_milp(static_cast<std::uint64_t>(5000 + k));
    const auto expected = oracle::enumerate_binaries(problem.dense, problem.binaries);
    const auto t0 = Clock::now();
    const auto sol = solve_mip(problem.model, config);
    solver_seconds += seconds_since(t0);
    bool ok = false;
    if (!expected.feasible) {
      ok = sol.status == MipStatus::infeasible;
      infeasible += ok ? 1 : 0;
    } else {
      ok = sol.status == MipStatus::optimal && std::abs(sol.objective - expected.objective) <= 1e-6;
    }
    if (ok) {
      ++matched;
    } else if (first_miss.empty()) {
      first_miss = fmt::format(" first miss: instance {} status {} objective {} oracle {}", k,
                               to_string(sol.status), sol.objective, expected.objective);
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = matched == instances && elapsed < 120.0;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt::format("{}/{} match ({} infeasible), solver {:.2f} s, total {:.2f} s{}", matched, instances,
                      infeasible, solver_seconds, elapsed, first_miss)};
}

// ---- 3: census ----------------------------------------------------------------

Dataset gaussian(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) d.features(i, j) = g(rng);
    d.labels.push_back(i % 2 == 0 ? 1 : -1);
  }
  return d;
}

Outcome census() {
  int checked = 0;
  std::string misses;
  for (const auto& [n, p, d] : {std::tuple{4, 2, 2}, {10, 3, 2}, {6, 2, 3}}) {
    const auto data = gaussian(static_cast<std::size_t>(n), static_cast<std::size_t>(p), 17);
    const long nodes = (1L << d) - 1;
    const long last = 1L << (d - 1);
    for (const auto set : {TangentSet::V0, TangentSet::V1, TangentSet::V2, TangentSet::V3}) {
      const LossSpec loss{LossKind::logistic_pwl, set, broadcast_c(1.0, d)};
      const auto lines = static_cast<long>(tangent_lines(set).size());
      for (const auto kind : {RegKind::none, RegKind::l1}) {
        RegularizerSpec reg;
        reg.kind = kind;
        const auto model = build_model(data, TreeTopology(d), loss, reg);
        const auto counted = count_census(model);
        const auto closed = closed_form_census(n, p, d, loss, reg);
        // Totals written out directly as a second check on the closed forms.
        const long split = kind == RegKind::l1 ? p * nodes : 0;
        const long vars = n * last + p * nodes + 2 * split + nodes + n * d;
        const long rows = n + 2L * n * (last - 1) + n * nodes * (lines - 1) + n * d + split;
        ++checked;
        if (!(counted == closed) || closed.variables() != vars || closed.constraints() != rows ||
            model.num_vars() != vars || model.num_rows() != rows) {
          misses += fmt::format(" ({},{},{},{},{}): vars {} vs {}, rows {} vs {};", n, p, d, to_string(set),
                                to_string(kind), model.num_vars(), vars, model.num_rows(), rows);
        }
      }
    }
  }
  return {misses.empty() ? Verdict::pass : Verdict::fail,
          fmt::format("{} models match their closed-form counts{}", checked, misses)};
}

// ---- 4: XOR -------------------------------------------------------------------

// Exhaustive search over small integer splits: does some depth-2 tree
// separate the sample?
bool xor_separable(const Dataset& data) {
  std::vector<std::pair<Eigen::Vector2d, double>> splits;
  for (int a = -1; a <= 1; ++a) {
    for (int c = -1; c <= 1; ++c) {
      for (const double b : {-0.5, 0.0, 0.5}) splits.push_back({Eigen::Vector2d(a, c), b});
    }
  }
  TreeModel tree = TreeModel::zeros(2, 2, 1e-5, LossKind::logistic_pwl);
  for (const auto& r : splits) {
    for (const auto& l : splits) {
      for (const auto& q : splits) {
        tree.weights = {r.first, l.first, q.first};
        tree.bias = {r.second, l.second, q.second};
        if (bacc_of(tree, data) == 1.0) return true;
      }
    }
  }
  return false;
}

Outcome xor_separability() {
  std::string detail;
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto train_data = testing_support::xor_clusters(40, seed);
    const auto test_data = testing_support::xor_clusters(200, 1000 + seed);
    const bool oracle = xor_separable(train_data);
    const auto report = train(train_data, base_config(2, 60.0));
    const double train_bacc = bacc_of(report.model, train_data);
    const double test_bacc = bacc_of(report.model, test_data);
    ok = ok && oracle && train_bacc == 1.0 && test_bacc >= 0.95;
    detail += fmt::format(" seed {}: train {:.4f} test {:.4f} ({}, {:.1f} s);", seed, train_bacc, test_bacc,
                          to_string(report.mip.status), report.seconds);
  }
  return {ok ? Verdict::pass : Verdict::fail, "n=40, depth 2, V0, C=1:" + detail};
}

// ---- 5: refinement monotonicity and routing --------------------------------

Outcome monotonicity() {
  struct Case {
    std::string name;
    TrainConfig config;
  };
  std::vector<Case> cases;
  for (const int depth : {1, 2, 3}) {
    cases.push_back({fmt::format("logistic-v0-d{}", depth), base_config(depth, 10.0)});
  }
  auto v2 = base_config(2, 10.0);
  v2.loss.tangents = TangentSet::V2;
  cases.push_back({"logistic-v2-d2", v2});
  auto hinge = base_config(2, 10.0);
  hinge.loss.kind = LossKind::hinge;
  cases.push_back({"hinge-d2", hinge});
  auto mis = base_config(2, 10.0);
  mis.loss.kind = LossKind::misclassification;
  mis.loss.layer_c = {1.0};
  cases.push_back({"misclass-d2", mis});
  auto none = base_config(2, 10.0);
  none.reg.kind = RegKind::none;
  cases.push_back({"noreg-d2", none});
  auto sfs = base_config(2, 10.0);
  sfs.reg.kind = RegKind::sfs;
  sfs.reg.alpha = 0.5;
  sfs.reg.layer_budget = {1.0, 1.0};
  cases.push_back({"sfs-d2", sfs});
  auto hfs = base_config(2, 10.0);
  hfs.reg.kind = RegKind::hfs;
  hfs.reg.node_budget = 1;
  cases.push_back({"hfs-d2", hfs});

  const auto haberman = load_csv(data_dir() / "haberman.csv", std::string("status"), "died");
  std::vector<std::pair<std::string, Dataset>> datasets{
      {"xor", testing_support::xor_clusters(40, 3)},
      {"cloud", standardize(testing_support::separable_cloud(30, 3, 5))},
      {"haberman60", standardize(haberman.subset(train_test_split_indices(haberman.rows(), {0.2, 2, 4}).test))},
  };
  int runs = 0;
  std::size_t points = 0;
  std::string misses;
  for (const auto& [dname, data] : datasets) {
    for (const auto& c : cases) {
      const auto report = train(data, c.config);
      ++runs;
      points += data.rows();
      if (report.post_refine_exact > report.post_solve_exact + 1e-9 || report.routing_mismatches != 0) {
        misses += fmt::format(" {}/{}: before {} after {} mismatches {};", dname, c.name, report.post_solve_exact,
                              report.post_refine_exact, report.routing_mismatches);
      }
    }
  }
  return {misses.empty() ? Verdict::pass : Verdict::fail,
          fmt::format("{} runs, {} routed points, refinement never increased the exact objective and every "
                      "decoded z matched routing{}",
                      runs, points, misses)};
}

// ---- 6: stage ordering --------------------------------------------------------

Outcome stage_ordering() {
  std::string detail;
  std::vector<std::string> missing;
  bool ok = true;
  int runs = 0;
  struct Source {
    std::string name;
    std::string file;
    std::string label;
    std::string positive;
  };
  for (const auto& s : {Source{"parkinsons", "parkinsons.csv", "status", "1"},
                        Source{"haberman", "haberman.csv", "status", "died"},
                        Source{"wholesale", "wholesale.csv", "Channel", "1"}}) {
    const auto path = data_dir() / s.file;
    if (!fs::exists(path)) {
      missing.push_back(s.name);
      continue;
    }
    const auto raw = load_csv(path, s.label, s.positive);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto [train_data, test_data] = split_standardized(raw, seed);
      const auto report = train(train_data, base_config(2, 120.0));
      ++runs;
      const bool refine_ok = report.post_refine_exact <= report.post_solve_exact + 1e-9;
      const bool dominance = report.post_solve_surrogate <=
                             report.warm_start_surrogate + 1e-6 * std::max(1.0, std::abs(report.warm_start_surrogate));
      ok = ok && refine_ok && dominance;
      detail += fmt::format(" {} seed {}: exact warm {:.4f} solve {:.4f} refine {:.4f}, surrogate warm {:.4f} "
                            "solve {:.4f} ({}, test {:.3f});",
                            s.name, seed, report.warm_start_exact, report.post_solve_exact, report.post_refine_exact,
                            report.warm_start_surrogate, report.post_solve_surrogate, to_string(report.mip.status),
                            bacc_of(report.model, test_data));
    }
  }
  if (runs == 0) return {Verdict::fail, "no dataset available"};
  if (!missing.empty()) detail += fmt::format(" not bundled: {}", fmt::join(missing, ", "));
  return {ok ? Verdict::pass : Verdict::fail, fmt::format("{} runs:{}", runs, detail)};
}

// ---- 7: breast sanity band ---------------------------------------------------

Outcome breast_band() {
  const auto raw = load_csv(data_dir() / "breast.csv", std::string("diagnosis"), "M");
  const double cv_limit = 10.0;
  int oracle_ok = 0;
  int tree_ok = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto [train_data, test_data] = split_standardized(raw, seed);

    // Single-node reference first.
    std::vector<std::size_t> rows(train_data.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto node = fit_l1_logistic(train_data.features, train_data.labels, rows, 1.0);
    std::vector<int> node_pred;
    for (std::size_t i = 0; i < test_data.rows(); ++i) {
      const auto x = row_of(test_data, i);
      const double s = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()))
                           .dot(node.weights) + node.bias;
      node_pred.push_back(s > 0 ? 1 : -1);
    }
    const double node_bacc = balanced_accuracy(confusion(test_data.labels, node_pred)).value;
    oracle_ok += node_bacc >= 0.90 ? 1 : 0;

    auto cv_base = base_config(2, cv_limit);
    GridSpec grid;
    grid.c_values = {0.01, 1.0, 100.0};
    const auto cv = cross_validate(train_data, cv_base, grid, 4);
    auto final_config = cv.best_config;
    final_config.solver.time_limit_seconds = 300.0;
    const auto report = train(train_data, final_config);
    const double test_bacc = bacc_of(report.model, test_data);
    tree_ok += test_bacc >= 0.90 ? 1 : 0;
    detail += fmt::format(" seed {}: node {:.4f}, C=({}) tree {:.4f} ({}, gap {:.3g});", seed, node_bacc,
                          fmt::join(final_config.loss.layer_c, ","), test_bacc, to_string(report.mip.status),
                          report.mip.gap);
  }
  const bool ok = oracle_ok >= 4 && tree_ok >= 4;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt::format("{} rows; single l1-logistic node >= 0.90 on {}/5 seeds, tree >= 0.90 on {}/5 seeds "
                      "(CV fits {} s each):{}",
                      raw.rows(), oracle_ok, tree_ok, cv_limit, detail)};
}

// ---- 8: metrics examples ----------------------------------------------------

Outcome metrics_examples() {
  std::vector<std::string> failed;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) failed.emplace_back(what);
  };
  const ConfusionCounts counts{4, 3, 2, 1};
  expect(std::abs(balanced_accuracy(counts).value - 0.7) < 1e-15, "0.5*(0.8+0.6) = 0.7");
  expect(balanced_accuracy({6, 4, 0, 0}).value == 1.0, "perfect classifier");
  const std::vector<int> truth{1, -1, 1, -1, 1, -1, 1, -1};
  expect(balanced_accuracy(confusion(truth, std::vector<int>(8, 1))).value == 0.5, "constant +1 on balanced data");
  expect(balanced_accuracy(confusion(truth, std::vector<int>(8, -1))).value == 0.5, "constant -1 on balanced data");
  expect(balanced_accuracy({3, 4, 1, 2}).value == balanced_accuracy(counts).value, "class symmetry");

  auto model = TreeModel::zeros(2, 5, 1e-5, LossKind::logistic_pwl);
  expect(sparsity(model) == 0.0, "all-zero sparsity");
  for (auto& w : model.weights) w.setOnes();
  expect(sparsity(model) == 5.0, "dense d=2 p=5 sparsity");
  for (auto& w : model.weights) {
    w.setZero();
    w[2] = -0.7;
  }
  expect(sparsity(model) <= 1.0, "univariate sparsity");

  const auto profile = performance_profiles({"A", "B"}, {{1.0, 2.0}, {4.0, 2.0}});
  expect(profile.ratios[0] == std::vector<double>{1.0, 2.0} && profile.ratios[1] == std::vector<double>{2.0, 1.0},
         "profile ratios");
  expect(profile.curves[0].rho(1.0) == 0.5 && profile.curves[0].rho(2.0) == 1.0, "rho_A(1)=0.5, rho_A(2)=1");
  const auto single = performance_profiles({"only"}, {{2.0}, {9.0}});
  expect(single.curves[0].rho(1.0) == 1.0 && single.curves[0].rho(7.5) == 1.0, "single solver");
  const auto failing = performance_profiles({"A", "B"}, {{1.0, 3.0}, {std::nullopt, 2.0}});
  expect(failing.ratios[1][0] == failing.eta_max && failing.curves[0].rho(failing.eta_max - 1e-9) < 1.0 &&
             failing.curves[0].rho(failing.eta_max) == 1.0,
         "failure sentinel");

  auto same = gap_curve({"A", "B"}, {{0.8, 0.8}, {0.6, 0.6}});
  expect(same[0].rho(0.0) == 1.0 && same[1].rho(0.0) == 1.0, "identical models step to 1 at 0");
  // Gaps (0, 0.05): the second problem's gap is 0.5 - 0.45.
  const auto gaps = gap_curve({"A", "B"}, {{0.9, 0.8}, {0.45, 0.5}});
  expect(gaps[0].rho(0.0) == 0.5 && gaps[0].rho(0.05) == 1.0 && gaps[0].rho(0.049) == 0.5, "gaps (0, 0.05)");
  const auto wins = gap_curve({"A", "B", "C"}, {{0.9, 0.8, 0.9}, {0.7, 0.75, 0.6}, {0.5, 0.6, 0.6}});
  expect(std::abs(wins[0].rho(0.0) - 1.0 / 3.0) < 1e-15 && std::abs(wins[1].rho(0.0) - 2.0 / 3.0) < 1e-15,
         "curve at 0 is the win fraction");
  return {failed.empty() ? Verdict::pass : Verdict::fail,
          failed.empty() ? "every example reproduced" : fmt::format("failed: {}", fmt::join(failed, "; "))};
}

// ---- 9: hfs univariate ------------------------------------------------------

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult shell(const std::string& command) {
  CommandResult r;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 512> buffer{};
  while (std::fgets(buffer.data(), static_cast<int>(buffer.size()), pipe)) r.output += buffer.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

long max_nonzeros(const TreeModel& model) {
  long worst = 0;
  for (const auto& w : model.weights) worst = std::max(worst, static_cast<long>((w.array().abs() > 1e-6).count()));
  return worst;
}

Outcome hfs_univariate() {
  const auto haberman = load_csv(data_dir() / "haberman.csv", std::string("status"), "died");
  std::vector<std::pair<std::string, Dataset>> datasets{
      {"xor", testing_support::xor_clusters(40, 8)},
      {"cloud", standardize(testing_support::separable_cloud(40, 5, 9))},
      {"haberman60", standardize(haberman.subset(train_test_split_indices(haberman.rows(), {0.2, 5, 4}).test))},
  };
  int runs = 0;
  std::string misses;
  for (const auto& [name, data] : datasets) {
    for (const int depth : {1, 2}) {
      auto config = base_config(depth, 15.0);
      config.reg.kind = RegKind::hfs;
      config.reg.node_budget = 1;
      for (const auto loss : {LossKind::logistic_pwl, LossKind::hinge}) {
        config.loss.kind = loss;
        const auto report = train(data, config);
        ++runs;
        const long nnz = max_nonzeros(report.model);
        if (nnz > 1) misses += fmt::format(" {} d{} {}: {} nonzeros;", name, depth, to_string(loss), nnz);
      }
    }
  }

  // The same through the command line.
  const auto dir = fs::temp_directory_path() / "loct_acceptance_hfs";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto cmd = fmt::format("LOCT_LOG=error '{}' train --data '{}' --label status --positive died --depth 2 "
                               "--reg hfs --budget 1 --time-limit 30 --out '{}' 2>&1",
                               LOCT_CLI_PATH, (data_dir() / "haberman.csv").string(), dir.string());
  const auto cli = shell(cmd);
  if (cli.exit_code != 0) {
    misses += " command line run failed: " + cli.output;
  } else {
    std::ifstream in(dir / "model.json");
    std::stringstream text;
    text << in.rdbuf();
    const long nnz = max_nonzeros(tree_from_json(text.str()));
    if (nnz > 1) misses += fmt::format(" command line run: {} nonzeros;", nnz);
  }
  ++runs;
  return {misses.empty() ? Verdict::pass : Verdict::fail,
          fmt::format("{} runs with --reg hfs --budget 1, every node has at most one weight above 1e-6{}", runs,
                      misses)};
}

// ---- 10: LP round trip ------------------------------------------------------

Outcome lp_round_trip() {
  Dataset four;
  four.features.resize(4, 2);
  four.features << 1.0, 2.0, -1.0, 0.5, 0.3, -1.0, 2.0, -2.0;
  four.labels = {1, -1, 1, -1};
  const LossSpec loss{LossKind::logistic_pwl, TangentSet::V0, broadcast_c(1.0, 2)};
  const auto model = build_model(four, TreeTopology(2), loss, RegularizerSpec{});
  const auto path = fs::temp_directory_path() / "loct_acceptance_n4.lp";
  export_lp(model, path);
  std::ifstream in(path);
  const auto parsed = oracle::read_lp(in);
  const auto diffs = oracle::lp_differences(model, parsed);
  if (!diffs.empty()) return fail(fmt::format("{} differences, first: {}", diffs.size(), diffs.front()));
  std::string detail = fmt::format("{} rows and {} columns re-read identically", model.num_rows(), model.num_vars());

  SolverConfig config;
  config.time_limit_seconds = 60.0;
  config.log_interval_seconds = 1e9;
  const auto ours = solve_mip(model, config);
  const auto external = shell(fmt::format("python3 '{}' '{}' 2>&1", LOCT_LP_OBJECTIVE_SCRIPT, path.string()));
  if (external.exit_code == 3 || external.exit_code == 127) {
    return pass(detail + "; external solver unavailable, comparison skipped");
  }
  double theirs = kInf;
  if (external.exit_code != 0 || std::sscanf(external.output.c_str(), "optimal %lf", &theirs) != 1) {
    return fail(detail + "; external solver failed: " + external.output);
  }
  const bool ok = ours.status == MipStatus::optimal && std::abs(ours.objective - theirs) <= 1e-6;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt::format("{}; built-in optimum {:.12g}, HiGHS {:.12g}", detail, ours.objective, theirs)};
}

const std::array<std::pair<const char*, std::function<Outcome()>>, 10> kCriteria{{
    {"tangent-line underestimator", tangent_suite},
    {"branch and bound against enumeration", solver_oracle},
    {"formulation census", census},
    {"XOR separability", xor_separability},
    {"refinement monotonicity and routing", monotonicity},
    {"stage ordering", stage_ordering},
    {"breast sanity band", breast_band},
    {"metrics examples", metrics_examples},
    {"hfs univariate nodes", hfs_univariate},
    {"LP export round trip", lp_round_trip},
}};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty()) {
    for (int k = 1; k <= static_cast<int>(kCriteria.size()); ++k) which.push_back(k);
  }
  bool all_ok = true;
  for (const int k : which) {
    if (k < 1 || k > static_cast<int>(kCriteria.size())) {
      std::cerr << "unknown criterion " << k << "\n";
      return 2;
    }
    const auto& [name, run] = kCriteria[static_cast<std::size_t>(k - 1)];
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const char* word = outcome.verdict == Verdict::pass ? "PASS" : "FAIL";
    std::cout << fmt::format("criterion {}: {} [{}] {} ({:.1f} s)", k, word, name, outcome.detail,
                             seconds_since(start))
              << std::endl;
    all_ok = all_ok && outcome.verdict == Verdict::pass;
  }
  return all_ok ? 0 : 1;
}
