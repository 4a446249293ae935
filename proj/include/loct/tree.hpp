#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "loct/dataset.hpp"

namespace loct {

enum class LossKind { logistic_pwl, hinge, misclassification };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view text);

// Half-open range of branch-node ids.
struct NodeRange {
  int begin = 0;
  int end = 0;

  int size() const { return end - begin; }
  bool contains(int t) const { return t >= begin && t < end; }
};

// Complete binary tree of branch nodes in heap order: the root is 0 and the
// children of t are 2t+1 (left) and 2t+2 (right). Layers are 0-based here;
// layer 0 holds the root and layer depth-1 is the last branching layer, whose
// nodes make the final prediction.
class TreeTopology {
 public:
  explicit TreeTopology(int depth);

  int depth() const { return depth_; }
  int num_nodes() const { return (1 << depth_) - 1; }
  int num_last() const { return 1 << (depth_ - 1); }

  NodeRange layer_nodes(int layer) const {
    return {(1 << layer) - 1, (1 << (layer + 1)) - 1};
  }
  NodeRange last_layer() const { return layer_nodes(depth_ - 1); }

  static int layer_of(int t);
  bool is_last(int t) const { return layer_of(t) == depth_ - 1; }
  static int left(int t) { return 2 * t + 1; }
  static int right(int t) { return 2 * t + 2; }

  // Last-layer descendants of t (t itself when t is in the last layer).
  NodeRange last_descendants(int t) const;
  // Left and right halves of last_descendants(t); t must not be last-layer.
  NodeRange last_left(int t) const;
  NodeRange last_right(int t) const;

 private:
  int depth_;
};

// Per-node linear classifiers w_t.x + b_t. Points go left when the score is
// <= 0; the last-layer node reached predicts -1 (left leaf) or +1 (right leaf).
struct TreeModel {
  TreeTopology topology{1};
  std::vector<Eigen::VectorXd> weights;  // one per branch node, length p
  std::vector<double> bias;
  double epsilon = 1e-5;
  LossKind loss_kind = LossKind::logistic_pwl;
  std::optional<Standardization> standardization;

  static TreeModel zeros(int depth, std::size_t p, double epsilon, LossKind kind);

  std::size_t num_features() const {
    return weights.empty() ? 0 : static_cast<std::size_t>(weights.front().size());
  }
  double score(int t, std::span<const double> x) const;
  double score(int t, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  void validate() const;
};

// Root-to-last-layer node ids visited by x.
std::vector<int> route(const TreeModel& model, std::span<const double> x);

// sign of the last node score with sign(0) = -1.
int predict(const TreeModel& model, std::span<const double> x);

struct Prediction {
  int label = -1;
  double probability = 0.5;        // sigmoid of the last node score
  std::vector<int> path;
  std::vector<double> confidences;  // sigmoid of each node score on the path
  bool calibrated = false;          // true only for logistic-loss models
};

Prediction predict_proba(const TreeModel& model, std::span<const double> x);

double sigmoid(double z);

struct NodeInfluence {
  int node = 0;
  std::size_t reached = 0;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> influence;  // weight * stddev
};

struct InfluenceTable {
  std::vector<NodeInfluence> nodes;
};

InfluenceTable feature_influence(const TreeModel& model, const Dataset& train);

std::string to_json(const TreeModel& model);
TreeModel tree_from_json(const std::string& text);

}  // namespace loct
