#include "loct/tree.hpp"

#include <bit>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "loct/error.hpp"

namespace loct {
namespace {

constexpr std::string_view kModelVersion = "loct-tree/1";
constexpr int kMaxDepth = 16;

std::span<const double> row_span(const RowMatrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::logistic_pwl: return "logistic";
    case LossKind::hinge: return "hinge";
    case LossKind::misclassification: return "misclass";
  }
  return "logistic";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "logistic" || text == "logistic_pwl") return LossKind::logistic_pwl;
  if (text == "hinge") return LossKind::hinge;
  if (text == "misclass" || text == "misclassification") return LossKind::misclassification;
  throw ModelError(fmt::format("unknown loss kind '{}'", text));
}

TreeTopology::TreeTopology(int depth) : depth_(depth) {
  if (depth < 1 || depth > kMaxDepth) {
    throw ModelError(fmt::format("tree depth must be in [1, {}], got {}", kMaxDepth, depth));
  }
}

int TreeTopology::layer_of(int t) {
  return std::bit_width(static_cast<unsigned>(t + 1)) - 1;
}

NodeRange TreeTopology::last_descendants(int t) const {
  const int span = 1 << (depth_ - 1 - layer_of(t));
  const int first = (t + 1) * span - 1;
  return {first, first + span};
}

NodeRange TreeTopology::last_left(int t) const {
  const auto all = last_descendants(t);
  return {all.begin, all.begin + all.size() / 2};
}

NodeRange TreeTopology::last_right(int t) const {
  const auto all = last_descendants(t);
  return {all.begin + all.size() / 2, all.end};
}

TreeModel TreeModel::zeros(int depth, std::size_t p, double epsilon, LossKind kind) {
  TreeModel model;
  model.topology = TreeTopology(depth);
  model.weights.assign(static_cast<std::size_t>(model.topology.num_nodes()),
                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)));
  model.bias.assign(static_cast<std::size_t>(model.topology.num_nodes()), 0.0);
  model.epsilon = epsilon;
  model.loss_kind = kind;
  return model;
}

double TreeModel::score(int t, std::span<const double> x) const {
  const auto& w = weights[static_cast<std::size_t>(t)];
  if (static_cast<std::size_t>(w.size()) != x.size()) {
    throw ModelError(fmt::format("dimension mismatch: model has {} features, point has {}",
                                 w.size(), x.size()));
  }
  double s = bias[static_cast<std::size_t>(t)];
  for (std::size_t j = 0; j < x.size(); ++j) s += w[static_cast<Eigen::Index>(j)] * x[j];
  return s;
}

double TreeModel::score(int t, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return score(t, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

void TreeModel::validate() const {
  const auto nodes = static_cast<std::size_t>(topology.num_nodes());
  if (weights.size() != nodes || bias.size() != nodes) {
    throw ModelError(fmt::format("expected {} branch nodes, found {} weight vectors and {} biases",
                                 nodes, weights.size(), bias.size()));
  }
  const auto p = num_features();
  for (const auto& w : weights) {
    if (static_cast<std::size_t>(w.size()) != p) {
      throw ModelError("weight vectors differ in length");
    }
  }
  if (standardization && standardization->mean.size() != p) {
    throw ModelError("standardization length differs from weight length");
  }
}

std::vector<int> route(const TreeModel& model, std::span<const double> x) {
  std::vector<int> path;
  path.reserve(static_cast<std::size_t>(model.topology.depth()));
  int t = 0;
  for (int layer = 0; layer < model.topology.depth(); ++layer) {
    path.push_back(t);
    t = model.score(t, x) <= 0.0 ? TreeTopology::left(t) : TreeTopology::right(t);
  }
  return path;
}

int predict(const TreeModel& model, std::span<const double> x) {
  const auto path = route(model, x);
  return model.score(path.back(), x) > 0.0 ? 1 : -1;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Prediction predict_proba(const TreeModel& model, std::span<const double> x) {
  Prediction out;
  out.path = route(model, x);
  out.confidences.reserve(out.path.size());
  double last = 0.0;
  for (const int t : out.path) {
    last = model.score(t, x);
    out.confidences.push_back(sigmoid(last));
  }
  out.label = last > 0.0 ? 1 : -1;
  out.probability = out.confidences.back();
  out.calibrated = model.loss_kind == LossKind::logistic_pwl;
  return out;
}

InfluenceTable feature_influence(const TreeModel& model, const Dataset& train) {
  const auto p = model.num_features();
  if (train.cols() != p) {
    throw ModelError(fmt::format("dimension mismatch: model has {} features, data has {}", p,
                                 train.cols()));
  }
  const int nodes = model.topology.num_nodes();
  std::vector<std::vector<std::size_t>> reached(static_cast<std::size_t>(nodes));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(train.rows()); ++i) {
    for (const int t : route(model, row_span(train.features, i))) {
      reached[static_cast<std::size_t>(t)].push_back(static_cast<std::size_t>(i));
    }
  }

  InfluenceTable table;
  for (int t = 0; t < nodes; ++t) {
    NodeInfluence node;
    node.node = t;
    const auto& rows = reached[static_cast<std::size_t>(t)];
    node.reached = rows.size();
    node.mean.assign(p, 0.0);
    node.stddev.assign(p, 0.0);
    node.influence.assign(p, 0.0);
    if (!rows.empty()) {
      const auto count = static_cast<double>(rows.size());
      for (std::size_t j = 0; j < p; ++j) {
        double sum = 0.0;
        for (const auto i : rows) sum += train.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double mean = sum / count;
        double sq = 0.0;
        for (const auto i : rows) {
          const double d = train.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - mean;
          sq += d * d;
        }
        node.mean[j] = mean;
        node.stddev[j] = std::sqrt(sq / count);
        node.influence[j] = model.weights[static_cast<std::size_t>(t)][static_cast<Eigen::Index>(j)] * node.stddev[j];
      }
    }
    table.nodes.push_back(std::move(node));
  }
  return table;
}

std::string to_json(const TreeModel& model) {
  model.validate();
  nlohmann::json doc;
  doc["version"] = kModelVersion;
  doc["depth"] = model.topology.depth();
  doc["epsilon"] = model.epsilon;
  doc["loss_kind"] = to_string(model.loss_kind);
  auto& nodes = doc["nodes"] = nlohmann::json::array();
  for (int t = 0; t < model.topology.num_nodes(); ++t) {
    const auto& w = model.weights[static_cast<std::size_t>(t)];
    nodes.push_back({{"id", t},
                     {"weights", std::vector<double>(w.data(), w.data() + w.size())},
                     {"bias", model.bias[static_cast<std::size_t>(t)]}});
  }
  if (model.standardization) {
    doc["standardization"] = {{"mean", model.standardization->mean},
                              {"stddev", model.standardization->stddev}};
  }
  return doc.dump(2);
}

TreeModel tree_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(fmt::format("malformed model document: {}", e.what()));
  }
  try {
    if (doc.at("version").get<std::string>() != kModelVersion) {
      throw ModelError(fmt::format("unsupported model version '{}'",
                                   doc.at("version").get<std::string>()));
    }
    TreeModel model;
    model.topology = TreeTopology(doc.at("depth").get<int>());
    model.epsilon = doc.at("epsilon").get<double>();
    model.loss_kind = parse_loss_kind(doc.at("loss_kind").get<std::string>());
    const auto& nodes = doc.at("nodes");
    const auto count = static_cast<std::size_t>(model.topology.num_nodes());
    if (nodes.size() != count) {
      throw ModelError(fmt::format("expected {} nodes, found {}", count, nodes.size()));
    }
    model.weights.resize(count);
    model.bias.resize(count);
    std::vector<bool> seen(count, false);
    for (const auto& node : nodes) {
      const auto id = node.at("id").get<int>();
      if (id < 0 || static_cast<std::size_t>(id) >= count || seen[static_cast<std::size_t>(id)]) {
        throw ModelError(fmt::format("invalid or duplicate node id {}", id));
      }
      seen[static_cast<std::size_t>(id)] = true;
      const auto w = node.at("weights").get<std::vector<double>>();
      model.weights[static_cast<std::size_t>(id)] =
          Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      model.bias[static_cast<std::size_t>(id)] = node.at("bias").get<double>();
    }
    if (doc.contains("standardization")) {
      Standardization s;
      s.mean = doc["standardization"].at("mean").get<std::vector<double>>();
      s.stddev = doc["standardization"].at("stddev").get<std::vector<double>>();
      model.standardization = std::move(s);
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(fmt::format("malformed model document: {}", e.what()));
  }
}

}  // namespace loct
