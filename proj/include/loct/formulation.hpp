#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loct/dataset.hpp"
#include "loct/milp.hpp"
#include "loct/tree.hpp"

namespace loct {

inline constexpr double kDefaultBigM = 100.0;
inline constexpr double kDefaultEpsilon = 1e-5;

// f(v) = log(1 + exp(-v)) and its derivative, evaluated without overflow.
double logistic_loss(double v);
double logistic_loss_derivative(double v);

enum class TangentSet { V0, V1, V2, V3 };

std::string_view to_string(TangentSet set);
TangentSet parse_tangent_set(std::string_view text);

// A line slope * v + intercept tangent to f at `origin` (+-inf for the
// asymptotes).
struct TangentLine {
  double slope = 0.0;
  double intercept = 0.0;
  double origin = 0.0;

  double operator()(double v) const { return slope * v + intercept; }
  bool is_zero_line() const { return slope == 0.0 && intercept == 0.0; }
};

// Lines for the tangent point sets {0,+-inf} grown by +-1.9, then +-0.89,
// +-3.55, then +-0.44, +-1.37, +-2.63, +-5.16. The zero line (+inf) comes
// first, then the -inf line, then finite points in increasing order.
std::vector<TangentLine> tangent_lines(TangentSet set);

// Pointwise maximum of the lines: a global underestimator of f.
double pwl_logistic(std::span<const TangentLine> lines, double v);

double hinge_loss(double v);

struct LossSpec {
  LossKind kind = LossKind::logistic_pwl;
  TangentSet tangents = TangentSet::V0;
  // One slack coefficient per layer (root first). Misclassification uses only
  // the first entry.
  std::vector<double> layer_c;
};

enum class RegKind { none, l1, sfs, hfs };

std::string_view to_string(RegKind kind);
RegKind parse_reg_kind(std::string_view text);

struct RegularizerSpec {
  RegKind kind = RegKind::l1;
  double alpha = 0.0;               // sfs penalty, shared by every layer
  std::vector<double> layer_budget; // sfs floor B_h per layer
  int node_budget = 1;              // hfs bound on nonzero weights per node

  // Every regularizer except `none` carries the l1 term on the weights.
  bool has_l1() const { return kind != RegKind::none; }
};

// Logistic loss approximated by tangent lines, l1 (or none) regularization,
// with l0 structure appended for sfs / hfs.
MilpModel build_olct(const Dataset& train, const TreeTopology& topology,
                     const LossSpec& loss, const RegularizerSpec& reg,
                     double big_m = kDefaultBigM, double epsilon = kDefaultEpsilon);

// Hinge slacks at every layer with l1-regularized weights.
MilpModel build_margot_l1(const Dataset& train, const TreeTopology& topology,
                          const std::vector<double>& layer_c,
                          double big_m = kDefaultBigM,
                          double epsilon = kDefaultEpsilon);

// Misclassification loss at the last layer through binary predictions.
MilpModel build_oct_misclass(const Dataset& train, const TreeTopology& topology,
                             double big_m, double epsilon,
                             const RegularizerSpec& reg, double c = 1.0);

// Adds binary indicators delta[t][j] with -M delta <= w <= M delta, then either
// a per-node budget (hfs) or the penalty alpha * max(||w_t||_0, B_h) (sfs).
MilpModel add_l0_structure(MilpModel model, const RegularizerSpec& reg);

// Dispatches on the loss kind and applies the l0 structure when requested.
MilpModel build_model(const Dataset& train, const TreeTopology& topology,
                      const LossSpec& loss, const RegularizerSpec& reg,
                      double big_m = kDefaultBigM,
                      double epsilon = kDefaultEpsilon);

void validate_specs(const TreeTopology& topology, std::size_t p,
                    const LossSpec& loss, const RegularizerSpec& reg);

// Variable and constraint counts per block. Rows: route (routing), fwdL/fwdR
// (forwarding), slack (gated loss lines), xipos (loss floor), wsplit, predU/
// predL (misclassification), l0up/l0lo (indicator links), hfs, sfsnnz and
// sfsfloor.
struct Census {
  long z = 0, w = 0, wpos = 0, wneg = 0, b = 0, xi = 0, delta = 0, yhat = 0, u = 0;
  long routing = 0, forwarding = 0, gated_slack = 0, slack_floor = 0, weight_split = 0,
       prediction = 0, indicator_link = 0, budget = 0, soft_budget = 0;

  long variables() const { return z + w + wpos + wneg + b + xi + delta + yhat + u; }
  long constraints() const {
    return routing + forwarding + gated_slack + slack_floor + weight_split + prediction +
           indicator_link + budget + soft_budget;
  }
  bool operator==(const Census&) const = default;
};

// Counts predicted from (n, p, depth) and the loss / regularizer choice.
Census closed_form_census(long n, long p, int depth, const LossSpec& loss,
                          const RegularizerSpec& reg);

// Counts read off a built model by variable and row names.
Census count_census(const MilpModel& model);

// Structured names such as z[3][1] become z_3_1 in LP files.
std::string lp_name(std::string_view name);

void write_lp(const MilpModel& model, std::ostream& out);
std::string to_lp_string(const MilpModel& model);
void export_lp(const MilpModel& model, const std::filesystem::path& path);

}  // namespace loct
