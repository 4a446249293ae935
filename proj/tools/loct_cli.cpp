#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "loct/dataset.hpp"
#include "loct/error.hpp"
#include "loct/formulation.hpp"
#include "loct/metrics.hpp"
#include "loct/training.hpp"
#include "loct/tree.hpp"

namespace fs = std::filesystem;
using namespace loct;

namespace {

// Invalid flag values or combinations detected before any computation.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataFlags {
  std::string path;
  std::string label = "-1";
  std::string positive = "1";
};

struct ModelFlags {
  int depth = 2;
  std::string loss = "logistic";
  std::optional<std::string> tangents;
  std::string c = "1";
  std::string reg = "l1";
  double alpha = 0.0;
  std::optional<std::string> budget;
  double big_m = kDefaultBigM;
  double epsilon = kDefaultEpsilon;
  double time_limit = 300.0;
  double node_time_limit = 30.0;
  std::uint64_t seed = 0;
  bool no_refine = false;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw UsageError(fmt::format("{}: empty list entry", flag));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError(fmt::format("{}: '{}' is not a number", flag, item));
    out.push_back(v);
  }
  return out;
}

LabelColumn parse_label(const std::string& text) {
  try {
    std::size_t used = 0;
    const int position = std::stoi(text, &used);
    if (used == text.size()) return position;
  } catch (const std::exception&) {
  }
  return text;
}

Dataset load(const DataFlags& flags) {
  return load_csv(flags.path, parse_label(flags.label), flags.positive);
}

void add_data_flags(CLI::App& cmd, DataFlags& flags) {
  cmd.add_option("--data", flags.path, "CSV file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--label", flags.label, "label column name or position (negative counts from the end)")
      ->capture_default_str();
  cmd.add_option("--positive", flags.positive, "label value mapped to +1")->capture_default_str();
}

void add_model_flags(CLI::App& cmd, ModelFlags& flags) {
  cmd.add_option("--depth", flags.depth, "tree depth")->capture_default_str();
  cmd.add_option("--loss", flags.loss, "logistic | hinge | misclass")->capture_default_str();
  cmd.add_option("--tangents", flags.tangents, "v0 | v1 | v2 | v3 (logistic loss only)");
  cmd.add_option("--C", flags.c, "per-layer loss weights, comma separated; one value broadcasts")
      ->capture_default_str();
  cmd.add_option("--reg", flags.reg, "none | l1 | sfs | hfs")->capture_default_str();
  cmd.add_option("--alpha", flags.alpha, "sfs penalty")->capture_default_str();
  cmd.add_option("--budget", flags.budget, "hfs node budget, or sfs per-layer floors");
  cmd.add_option("--big-m", flags.big_m, "big-M constant")->capture_default_str();
  cmd.add_option("--epsilon", flags.epsilon, "right-branch margin")->capture_default_str();
  cmd.add_option("--time-limit", flags.time_limit, "solver time limit in seconds")->capture_default_str();
  cmd.add_option("--node-time-limit", flags.node_time_limit,
                 "per-node time limit of the misclassification warm start")
      ->capture_default_str();
  cmd.add_option("--seed", flags.seed, "seed for data splitting")->capture_default_str();
  cmd.add_flag("--no-refine", flags.no_refine, "skip last-layer refinement");
}

TrainConfig make_config(const ModelFlags& flags) {
  if (flags.depth < 1) throw UsageError("--depth must be at least 1");
  TrainConfig config;
  config.depth = flags.depth;
  try {
    config.loss.kind = parse_loss_kind(flags.loss);
    config.reg.kind = parse_reg_kind(flags.reg);
    if (flags.tangents) {
      if (config.loss.kind != LossKind::logistic_pwl) {
        throw UsageError("--tangents applies only to the logistic loss");
      }
      config.loss.tangents = parse_tangent_set(*flags.tangents);
    }
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto c = parse_list(flags.c, "--C");
  const std::size_t layers =
      config.loss.kind == LossKind::misclassification ? 1 : static_cast<std::size_t>(flags.depth);
  if (c.size() == 1) {
    config.loss.layer_c.assign(layers, c.front());
  } else if (c.size() == layers) {
    config.loss.layer_c = c;
  } else {
    throw UsageError(fmt::format("--C needs 1 or {} values, got {}", layers, c.size()));
  }
  config.reg.alpha = flags.alpha;
  if (config.reg.kind == RegKind::hfs) {
    if (!flags.budget) throw UsageError("--reg hfs needs --budget");
    const auto b = parse_list(*flags.budget, "--budget");
    if (b.size() != 1 || b.front() != std::floor(b.front())) {
      throw UsageError("--budget for hfs is a single integer");
    }
    config.reg.node_budget = static_cast<int>(b.front());
  } else if (config.reg.kind == RegKind::sfs) {
    const auto b = flags.budget ? parse_list(*flags.budget, "--budget") : std::vector<double>{0.0};
    if (b.size() == 1) {
      config.reg.layer_budget.assign(static_cast<std::size_t>(flags.depth), b.front());
    } else if (b.size() == static_cast<std::size_t>(flags.depth)) {
      config.reg.layer_budget = b;
    } else {
      throw UsageError(fmt::format("--budget needs 1 or {} values for sfs", flags.depth));
    }
  } else if (flags.budget) {
    throw UsageError("--budget applies only to --reg hfs or sfs");
  }
  if (config.reg.kind != RegKind::sfs && flags.alpha != 0.0) {
    throw UsageError("--alpha applies only to --reg sfs");
  }
  config.big_m = flags.big_m;
  config.epsilon = flags.epsilon;
  config.solver.time_limit_seconds = flags.time_limit;
  config.node_time_limit_seconds = flags.node_time_limit;
  config.seed = flags.seed;
  config.refine = !flags.no_refine;
  return config;
}

// Validates the configuration against the data width; library validation
// failures on user input are reported as usage errors.
void check_config(const TrainConfig& config, std::size_t p) {
  try {
    config.validate(p);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EvaluationError(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw EvaluationError(fmt::format("failed writing {}", path.string()));
}

// Writes to `path`, or to standard output when the path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

TreeModel read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(fmt::format("cannot read model file {}", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return tree_from_json(buffer.str());
}

// Data in the feature space the model was trained in.
Dataset model_space(const TreeModel& model, const Dataset& raw) {
  if (raw.cols() != model.num_features()) {
    throw DataError(fmt::format("dimension mismatch: model has {} features, data has {}",
                                model.num_features(), raw.cols()));
  }
  return model.standardization ? apply_standardization(raw, *model.standardization) : raw;
}

std::span<const double> row_of(const Dataset& data, std::size_t i) {
  return {data.features.data() + static_cast<std::ptrdiff_t>(i) * data.features.cols(),
          data.cols()};
}

std::vector<int> predict_all(const TreeModel& model, const Dataset& data) {
  std::vector<int> out;
  out.reserve(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) out.push_back(predict(model, row_of(data, i)));
  return out;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  DataFlags data;
  ModelFlags model;
  std::string out = ".";
};

int run_train(const TrainArgs& args) {
  auto config = make_config(args.model);
  const Dataset raw = load(args.data);
  check_config(config, raw.cols());
  const Dataset data = standardize(raw);
  const auto report = train(data, config);
  const fs::path out(args.out);
  write_file(out / "model.json", to_json(report.model) + "\n");
  write_file(out / "report.json", report.to_json() + "\n");
  spdlog::info("wrote {} and {}", (out / "model.json").string(), (out / "report.json").string());
  return 0;
}

// ---- predict / evaluate ----------------------------------------------------

struct ApplyArgs {
  DataFlags data;
  std::string model;
  std::string out;
};

int run_predict(const ApplyArgs& args) {
  const TreeModel model = read_model(args.model);
  const Dataset data = model_space(model, load(args.data));
  std::string text = "row,label,probability,path";
  for (int h = 0; h < model.topology.depth(); ++h) text += fmt::format(",confidence_{}", h);
  text += "\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto p = predict_proba(model, row_of(data, i));
    text += fmt::format("{},{},{},{}", i, p.label, format_number(p.probability),
                        fmt::join(p.path, ";"));
    for (const double c : p.confidences) text += "," + format_number(c);
    text += "\n";
  }
  emit(args.out, text);
  return 0;
}

int run_evaluate(const ApplyArgs& args) {
  const TreeModel model = read_model(args.model);
  const Dataset data = model_space(model, load(args.data));
  const auto counts = confusion(data.labels, predict_all(model, data));
  const auto bacc = balanced_accuracy(counts);
  if (bacc.missing_class) spdlog::warn("one class is absent from the evaluation labels");
  nlohmann::json j;
  j["bacc"] = bacc.value;
  j["missing_class"] = bacc.missing_class;
  j["tp"] = counts.tp;
  j["tn"] = counts.tn;
  j["fp"] = counts.fp;
  j["fn"] = counts.fn;
  j["n"] = counts.total();
  j["sparsity"] = sparsity(model);
  emit(args.out, j.dump(2) + "\n");
  return 0;
}

// ---- cv ---------------------------------------------------------------------

struct CvArgs {
  DataFlags data;
  ModelFlags model;
  std::optional<std::string> grid_c;
  std::optional<std::string> grid_alpha;
  std::optional<std::string> grid_budget;
  int folds = 4;
  int jobs = 1;
  std::string out = ".";
};

GridSpec make_grid(const std::optional<std::string>& c, const std::optional<std::string>& alpha,
                   const std::optional<std::string>& budget) {
  GridSpec grid;
  if (!c || c->empty()) throw UsageError("--grid-c must list at least one value");
  grid.c_values = parse_list(*c, "--grid-c");
  if (alpha) {
    grid.alpha_values = parse_list(*alpha, "--grid-alpha");
    if (grid.alpha_values.empty()) throw UsageError("--grid-alpha is empty");
  }
  if (budget) {
    grid.budget_values = parse_list(*budget, "--grid-budget");
    if (grid.budget_values.empty()) throw UsageError("--grid-budget is empty");
  }
  return grid;
}

int run_cv(const CvArgs& args) {
  const auto base = make_config(args.model);
  const auto grid = make_grid(args.grid_c, args.grid_alpha, args.grid_budget);
  if (args.folds < 2) throw UsageError("--folds must be at least 2");
  if (args.jobs < 1) throw UsageError("--jobs must be at least 1");
  const Dataset raw = load(args.data);
  check_config(base, raw.cols());
  const auto points = expand_grid(grid, base);
  for (const auto& point : points) check_config(apply_grid_point(base, point), raw.cols());
  spdlog::info("{} combinations", points.size());
  const auto result = cross_validate(standardize(raw), base, grid, args.folds, args.jobs);
  const fs::path out(args.out);
  write_file(out / "cv_best.json", result.best_json() + "\n");
  write_file(out / "cv_folds.csv", result.fold_table_csv());
  spdlog::info("best configuration {} with mean bacc {}", result.best_index,
               result.mean_bacc[result.best_index]);
  return 0;
}

// ---- export-lp --------------------------------------------------------------

struct ExportArgs {
  DataFlags data;
  ModelFlags model;
  std::string out;
};

int run_export(const ExportArgs& args) {
  const auto config = make_config(args.model);
  const Dataset raw = load(args.data);
  check_config(config, raw.cols());
  const auto milp = build_model(standardize(raw), TreeTopology(config.depth), config.loss,
                                config.reg, config.big_m, config.epsilon);
  emit(args.out, to_lp_string(milp));
  return 0;
}

// ---- benchmark --------------------------------------------------------------

struct BenchmarkArgs {
  std::string datasets;
  std::string configs;
  std::string seeds = "0";
  double test_fraction = 0.2;
  int jobs = 1;
  std::string out = ".";
};

struct BenchDataset {
  std::string name;
  DataFlags flags;
};

struct BenchConfig {
  std::string name;
  TrainConfig config;
  std::optional<GridSpec> grid;
  int folds = 4;
};

// One dataset per line: name,path[,label[,positive]]. Lines starting with '#'
// and blank lines are ignored; relative paths resolve against the list file.
std::vector<BenchDataset> read_dataset_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read dataset list {}", path.string()));
  std::vector<BenchDataset> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2 || cells.size() > 4) {
      throw DataError(fmt::format("dataset list line '{}' needs name,path[,label[,positive]]", line));
    }
    BenchDataset d;
    d.name = cells[0];
    fs::path data_path(cells[1]);
    if (data_path.is_relative()) data_path = path.parent_path() / data_path;
    d.flags.path = data_path.string();
    if (cells.size() > 2) d.flags.label = cells[2];
    if (cells.size() > 3) d.flags.positive = cells[3];
    out.push_back(std::move(d));
  }
  if (out.empty()) throw UsageError("dataset list is empty");
  return out;
}

// JSON array of objects. Keys mirror the train flags (depth, loss, tangents,
// C, reg, alpha, budget, big_m, epsilon, time_limit, node_time_limit, refine)
// plus an optional cross-validation grid (grid_c, grid_alpha, grid_budget,
// folds).
std::vector<BenchConfig> read_config_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read config list {}", path.string()));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("config list {}: {}", path.string(), e.what()));
  }
  if (!doc.is_array() || doc.empty()) throw UsageError("config list must be a non-empty JSON array");
  const auto text = [](const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : ",") + fmt::format("{}", x.get<double>());
      return s;
    }
    return fmt::format("{}", v.get<double>());
  };
  std::vector<BenchConfig> out;
  for (const auto& item : doc) {
    try {
      ModelFlags flags;
      BenchConfig bc;
      bc.name = item.value("name", fmt::format("config{}", out.size()));
      flags.depth = item.value("depth", flags.depth);
      flags.loss = item.value("loss", flags.loss);
      if (item.contains("tangents")) flags.tangents = item["tangents"].get<std::string>();
      if (item.contains("C")) flags.c = text(item["C"]);
      flags.reg = item.value("reg", flags.reg);
      flags.alpha = item.value("alpha", flags.alpha);
      if (item.contains("budget")) flags.budget = text(item["budget"]);
      flags.big_m = item.value("big_m", flags.big_m);
      flags.epsilon = item.value("epsilon", flags.epsilon);
      flags.time_limit = item.value("time_limit", flags.time_limit);
      flags.node_time_limit = item.value("node_time_limit", flags.node_time_limit);
      flags.no_refine = !item.value("refine", true);
      bc.config = make_config(flags);
      if (item.contains("grid_c")) {
        std::optional<std::string> alpha;
        std::optional<std::string> budget;
        if (item.contains("grid_alpha")) alpha = text(item["grid_alpha"]);
        if (item.contains("grid_budget")) budget = text(item["grid_budget"]);
        bc.grid = make_grid(text(item["grid_c"]), alpha, budget);
        bc.folds = item.value("folds", 4);
      }
      out.push_back(std::move(bc));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(fmt::format("config list entry {}: {}", out.size(), e.what()));
    }
  }
  return out;
}

RunRecord run_one(const BenchDataset& dataset, const Dataset& raw, std::uint64_t seed,
                  const BenchConfig& bc, double test_fraction) {
  RunRecord record;
  record.problem = dataset.name;
  record.seed = seed;
  record.model = bc.name;
  record.depth = bc.config.depth;
  const auto start = std::chrono::steady_clock::now();
  try {
    SplitSpec split;
    split.test_fraction = test_fraction;
    split.seed = seed;
    const auto [train_raw, test_raw] = train_test_split(raw, split);
    const Dataset train_set = standardize(train_raw);
    const Dataset test_set = apply_standardization(test_raw, *train_set.standardization);
    TrainConfig config = bc.config;
    config.seed = seed;
    if (bc.grid) config = cross_validate(train_set, config, *bc.grid, bc.folds).best_config;
    const auto report = train(train_set, config);
    record.bacc = balanced_accuracy(confusion(test_set.labels, predict_all(report.model, test_set))).value;
    record.gap = report.mip.gap;
    record.sparsity = sparsity(report.model);
  } catch (const Error& e) {
    spdlog::warn("run {}/{}/{} failed: {}: {}", dataset.name, seed, bc.name, e.kind(), e.what());
    record.failed = true;
  }
  record.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

int run_benchmark(const BenchmarkArgs& args) {
  if (args.jobs < 1) throw UsageError("--jobs must be at least 1");
  if (!(args.test_fraction > 0.0 && args.test_fraction < 1.0)) {
    throw UsageError("--test-fraction must lie in (0, 1)");
  }
  const auto datasets = read_dataset_list(args.datasets);
  const auto configs = read_config_list(args.configs);
  std::vector<std::uint64_t> seeds;
  for (const double s : parse_list(args.seeds, "--seeds")) {
    if (s < 0 || s != std::floor(s)) throw UsageError("--seeds must list non-negative integers");
    seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (seeds.empty()) throw UsageError("--seeds is empty");

  std::vector<Dataset> loaded;
  for (const auto& d : datasets) loaded.push_back(load(d.flags));
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (const auto& bc : configs) check_config(bc.config, loaded[d].cols());
  }

  const std::size_t per_dataset = seeds.size() * configs.size();
  const std::size_t total = datasets.size() * per_dataset;
  std::vector<RunRecord> records(total);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      const std::size_t d = k / per_dataset;
      const std::size_t s = (k % per_dataset) / configs.size();
      const std::size_t c = k % configs.size();
      records[k] = run_one(datasets[d], loaded[d], seeds[s], configs[c], args.test_fraction);
      spdlog::info("run {}/{}: {} seed {} {} bacc={} time={:.2f}s{}", k + 1, total,
                   records[k].problem, records[k].seed, records[k].model, records[k].bacc,
                   records[k].time_s, records[k].failed ? " (failed)" : "");
    }
  };
  const int threads = std::min<int>(args.jobs, static_cast<int>(total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  const auto files = emit_report(records, args.out);
  spdlog::info("wrote {}, {}, {}", files.results.string(), files.time_profile.string(),
               files.gap_curve.string());
  return 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_logger_mt("loct");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("LOCT_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::info);
    spdlog::warn("LOCT_LOG={} not recognised, using info", level);
  }
}

int fail(const std::string& kind, const std::string& message) {
  std::string flat = message;
  for (auto& ch : flat) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::cerr << "loct: error: " << kind << ": " << flat << "\n";
  return kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Optimal oblique classification trees trained by mixed-integer programming", "loct"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a tree and write model.json and report.json");
  add_data_flags(*train_cmd, train_args.data);
  add_model_flags(*train_cmd, train_args.model);
  train_cmd->add_option("--out", train_args.out, "output directory")->capture_default_str();

  ApplyArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "write per-row predictions as CSV");
  add_data_flags(*predict_cmd, predict_args.data);
  predict_cmd->add_option("--model", predict_args.model, "model JSON")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", predict_args.out, "output CSV (default stdout)");

  ApplyArgs evaluate_args;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "write balanced accuracy, confusion counts and sparsity");
  add_data_flags(*evaluate_cmd, evaluate_args.data);
  evaluate_cmd->add_option("--model", evaluate_args.model, "model JSON")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", evaluate_args.out, "output JSON (default stdout)");

  CvArgs cv_args;
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross validation over a hyperparameter grid");
  add_data_flags(*cv_cmd, cv_args.data);
  add_model_flags(*cv_cmd, cv_args.model);
  cv_cmd->add_option("--grid-c", cv_args.grid_c, "C values; the grid is their product over layers");
  cv_cmd->add_option("--grid-alpha", cv_args.grid_alpha, "sfs alpha values");
  cv_cmd->add_option("--grid-budget", cv_args.grid_budget, "hfs or sfs budget values");
  cv_cmd->add_option("--folds", cv_args.folds, "number of folds")->capture_default_str();
  cv_cmd->add_option("--jobs", cv_args.jobs, "worker threads")->capture_default_str();
  cv_cmd->add_option("--out", cv_args.out, "output directory")->capture_default_str();

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export-lp", "write the training formulation in LP format");
  add_data_flags(*export_cmd, export_args.data);
  add_model_flags(*export_cmd, export_args.model);
  export_cmd->add_option("--out", export_args.out, "output LP file (default stdout)");

  BenchmarkArgs bench_args;
  auto* bench_cmd = app.add_subcommand("benchmark", "run datasets x seeds x configurations and write reports");
  bench_cmd->add_option("--datasets", bench_args.datasets, "dataset list (name,path[,label[,positive]])")
      ->required()
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--configs", bench_args.configs, "JSON array of model configurations")
      ->required()
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--seeds", bench_args.seeds, "comma separated split seeds")->capture_default_str();
  bench_cmd->add_option("--test-fraction", bench_args.test_fraction, "held-out fraction")->capture_default_str();
  bench_cmd->add_option("--jobs", bench_args.jobs, "worker threads")->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*train_cmd) return run_train(train_args);
    if (*predict_cmd) return run_predict(predict_args);
    if (*evaluate_cmd) return run_evaluate(evaluate_args);
    if (*cv_cmd) return run_cv(cv_args);
    if (*export_cmd) return run_export(export_args);
    if (*bench_cmd) return run_benchmark(bench_args);
  } catch (const UsageError& e) {
    return fail("usage", e.what());
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
