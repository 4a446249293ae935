#include "loct/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "loct/error.hpp"

namespace loct {
namespace {

std::vector<double> tangent_points(TangentSet set) {
  std::vector<double> points{0.0};
  const auto add = [&](std::initializer_list<double> values) {
    for (const double v : values) {
      points.push_back(v);
      points.push_back(-v);
    }
  };
  if (set >= TangentSet::V1) add({1.9});
  if (set >= TangentSet::V2) add({0.89, 3.55});
  if (set >= TangentSet::V3) add({0.44, 1.37, 2.63, 5.16});
  std::sort(points.begin(), points.end());
  return points;
}

double feature(const Dataset& data, int i, int j) {
  return data.features(i, j);
}

// Creates the routing/forwarding skeleton shared by every loss:
// z, w, [wpos, wneg], b blocks and the routing and forwarding rows.
MilpModel make_skeleton(const Dataset& train, const TreeTopology& topology,
                        bool with_l1, double big_m, double epsilon) {
  if (!(big_m > 0.0)) throw FormulationError("big-M must be positive");
  if (!(epsilon > 0.0)) throw FormulationError("epsilon must be positive");
  if (train.rows() == 0) throw FormulationError("training set is empty");
  for (const int y : train.labels) {
    if (y != 1 && y != -1) throw FormulationError("labels must be -1 or +1");
  }

  MilpModel model;
  model.big_m = big_m;
  model.epsilon = epsilon;
  auto& L = model.layout;
  L.n = static_cast<int>(train.rows());
  L.p = static_cast<int>(train.cols());
  L.depth = topology.depth();
  const int nodes = topology.num_nodes();
  const auto last = topology.last_layer();

  L.z = model.num_vars();
  for (int i = 0; i < L.n; ++i) {
    for (int s = last.begin; s < last.end; ++s) {
      model.add_variable(fmt::format("z[{}][{}]", i, s), VarKind::binary, 0.0, 1.0);
    }
  }
  L.w = model.num_vars();
  for (int t = 0; t < nodes; ++t) {
    for (int j = 0; j < L.p; ++j) {
      model.add_variable(fmt::format("w[{}][{}]", t, j), VarKind::continuous, -kInf, kInf);
    }
  }
  if (with_l1) {
    L.wpos = model.num_vars();
    for (int t = 0; t < nodes; ++t) {
      for (int j = 0; j < L.p; ++j) {
        model.add_variable(fmt::format("wpos[{}][{}]", t, j), VarKind::continuous, 0.0, kInf, 1.0);
      }
    }
    L.wneg = model.num_vars();
    for (int t = 0; t < nodes; ++t) {
      for (int j = 0; j < L.p; ++j) {
        model.add_variable(fmt::format("wneg[{}][{}]", t, j), VarKind::continuous, 0.0, kInf, 1.0);
      }
    }
  }
  L.b = model.num_vars();
  for (int t = 0; t < nodes; ++t) {
    model.add_variable(fmt::format("b[{}]", t), VarKind::continuous, -kInf, kInf);
  }

  for (int i = 0; i < L.n; ++i) {
    Constraint row;
    row.name = fmt::format("route[{}]", i);
    for (int s = last.begin; s < last.end; ++s) {
      row.index.push_back(L.z_col(i, s));
      row.coef.push_back(1.0);
    }
    row.sense = Sense::eq;
    row.rhs = 1.0;
    model.add_constraint(std::move(row));
  }

  // w_t.x_i + b_t <= M (1 - sum_{left} z) and >= eps - M (1 - sum_{right} z)
  for (int i = 0; i < L.n; ++i) {
    for (int t = 0; t < nodes; ++t) {
      if (topology.is_last(t)) continue;
      for (const bool left : {true, false}) {
        Constraint row;
        row.name = fmt::format("{}[{}][{}]", left ? "fwdL" : "fwdR", i, t);
        for (int j = 0; j < L.p; ++j) {
          const double x = feature(train, i, j);
          if (x == 0.0) continue;
          row.index.push_back(L.w_col(t, j));
          row.coef.push_back(x);
        }
        row.index.push_back(L.b_col(t));
        row.coef.push_back(1.0);
        const auto side = left ? topology.last_left(t) : topology.last_right(t);
        for (int s = side.begin; s < side.end; ++s) {
          row.index.push_back(L.z_col(i, s));
          row.coef.push_back(left ? big_m : -big_m);
        }
        row.sense = left ? Sense::le : Sense::ge;
        row.rhs = left ? big_m : epsilon - big_m;
        model.add_constraint(std::move(row));
      }
    }
  }
  return model;
}

void add_slack_block(MilpModel& model, const std::vector<double>& layer_c) {
  auto& L = model.layout;
  L.xi = model.num_vars();
  for (int i = 0; i < L.n; ++i) {
    for (int h = 0; h < L.depth; ++h) {
      model.add_variable(fmt::format("xi[{}][{}]", i, h), VarKind::continuous, 0.0, kInf,
                         layer_c[static_cast<std::size_t>(h)]);
    }
  }
}

// xi[i][h] >= slope * y_i (w_t.x_i + b_t) + intercept - M (1 - sum_{T_d(t)} z)
void add_gated_slack_rows(MilpModel& model, const Dataset& train,
                          const TreeTopology& topology,
                          std::span<const TangentLine> lines) {
  const auto& L = model.layout;
  const double big_m = model.big_m;
  for (int i = 0; i < L.n; ++i) {
    const double y = train.labels[static_cast<std::size_t>(i)];
    for (int t = 0; t < topology.num_nodes(); ++t) {
      const int h = TreeTopology::layer_of(t);
      const auto desc = topology.last_descendants(t);
      for (std::size_t k = 0; k < lines.size(); ++k) {
        const auto& line = lines[k];
        if (line.is_zero_line()) continue;
        Constraint row;
        row.name = fmt::format("slack[{}][{}][{}]", i, t, k);
        row.index.push_back(L.xi_col(i, h));
        row.coef.push_back(1.0);
        for (int j = 0; j < L.p; ++j) {
          const double x = feature(train, i, j);
          if (x == 0.0) continue;
          row.index.push_back(L.w_col(t, j));
          row.coef.push_back(-line.slope * y * x);
        }
        row.index.push_back(L.b_col(t));
        row.coef.push_back(-line.slope * y);
        for (int s = desc.begin; s < desc.end; ++s) {
          row.index.push_back(L.z_col(i, s));
          row.coef.push_back(-big_m);
        }
        row.sense = Sense::ge;
        row.rhs = line.intercept - big_m;
        model.add_constraint(std::move(row));
      }
    }
  }
  for (int i = 0; i < L.n; ++i) {
    for (int h = 0; h < L.depth; ++h) {
      Constraint row;
      row.name = fmt::format("xipos[{}][{}]", i, h);
      row.index = {L.xi_col(i, h)};
      row.coef = {1.0};
      row.sense = Sense::ge;
      row.rhs = 0.0;
      model.add_constraint(std::move(row));
    }
  }
}

void add_weight_split_rows(MilpModel& model) {
  const auto& L = model.layout;
  if (L.wpos < 0) return;
  for (int t = 0; t < L.num_nodes(); ++t) {
    for (int j = 0; j < L.p; ++j) {
      Constraint row;
      row.name = fmt::format("wsplit[{}][{}]", t, j);
      row.index = {L.w_col(t, j), L.wpos_col(t, j), L.wneg_col(t, j)};
      row.coef = {1.0, -1.0, 1.0};
      row.sense = Sense::eq;
      row.rhs = 0.0;
      model.add_constraint(std::move(row));
    }
  }
}

// Inserts `count` fresh columns at `position`, shifting every later column.
void shift_columns(MilpModel& model, int position, int count) {
  for (auto& row : model.constraints) {
    for (auto& idx : row.index) {
      if (idx >= position) idx += count;
    }
  }
  auto& L = model.layout;
  for (int* offset : {&L.z, &L.w, &L.wpos, &L.wneg, &L.b, &L.xi, &L.delta, &L.yhat, &L.u}) {
    if (*offset >= position) *offset += count;
  }
}

void check_layer_values(const std::vector<double>& values, int depth, const char* what) {
  if (static_cast<int>(values.size()) != depth) {
    throw FormulationError(fmt::format("{} needs one value per layer ({}), got {}", what,
                                       depth, values.size()));
  }
  for (const double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw FormulationError(fmt::format("{} values must be positive and finite", what));
    }
  }
}

}  // namespace

double logistic_loss(double v) {
  return v > 0 ? std::log1p(std::exp(-v)) : -v + std::log1p(std::exp(v));
}

double logistic_loss_derivative(double v) {
  // -1 / (1 + e^v)
  if (v > 0) {
    const double e = std::exp(-v);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(v));
}

double hinge_loss(double v) { return std::max(0.0, 1.0 - v); }

std::string_view to_string(TangentSet set) {
  switch (set) {
    case TangentSet::V0: return "v0";
    case TangentSet::V1: return "v1";
    case TangentSet::V2: return "v2";
    case TangentSet::V3: return "v3";
  }
  return "v0";
}

TangentSet parse_tangent_set(std::string_view text) {
  if (text == "v0" || text == "V0") return TangentSet::V0;
  if (text == "v1" || text == "V1") return TangentSet::V1;
  if (text == "v2" || text == "V2") return TangentSet::V2;
  if (text == "v3" || text == "V3") return TangentSet::V3;
  throw FormulationError(fmt::format("unknown tangent set '{}'", text));
}

std::vector<TangentLine> tangent_lines(TangentSet set) {
  std::vector<TangentLine> lines;
  lines.push_back({0.0, 0.0, kInf});
  lines.push_back({-1.0, 0.0, -kInf});
  for (const double v : tangent_points(set)) {
    const double slope = logistic_loss_derivative(v);
    lines.push_back({slope, logistic_loss(v) - slope * v, v});
  }
  return lines;
}

double pwl_logistic(std::span<const TangentLine> lines, double v) {
  double best = -kInf;
  for (const auto& line : lines) best = std::max(best, line(v));
  return best;
}

std::string_view to_string(RegKind kind) {
  switch (kind) {
    case RegKind::none: return "none";
    case RegKind::l1: return "l1";
    case RegKind::sfs: return "sfs";
    case RegKind::hfs: return "hfs";
  }
  return "none";
}

RegKind parse_reg_kind(std::string_view text) {
  if (text == "none") return RegKind::none;
  if (text == "l1") return RegKind::l1;
  if (text == "sfs") return RegKind::sfs;
  if (text == "hfs") return RegKind::hfs;
  throw FormulationError(fmt::format("unknown regularizer '{}'", text));
}

void validate_specs(const TreeTopology& topology, std::size_t p, const LossSpec& loss,
                    const RegularizerSpec& reg) {
  if (loss.kind == LossKind::misclassification) {
    if (loss.layer_c.empty() || !(loss.layer_c.front() > 0.0)) {
      throw FormulationError("misclassification loss needs a positive coefficient");
    }
  } else {
    check_layer_values(loss.layer_c, topology.depth(), "slack coefficient C");
  }
  switch (reg.kind) {
    case RegKind::none:
    case RegKind::l1:
      break;
    case RegKind::sfs:
      if (!(reg.alpha > 0.0)) throw FormulationError("sfs needs alpha > 0");
      if (static_cast<int>(reg.layer_budget.size()) != topology.depth()) {
        throw FormulationError("sfs needs one budget per layer");
      }
      for (const double b : reg.layer_budget) {
        if (b < 0.0 || b > static_cast<double>(p)) {
          throw FormulationError(fmt::format("sfs budget {} out of range [0, {}]", b, p));
        }
      }
      break;
    case RegKind::hfs:
      if (reg.node_budget < 1 || reg.node_budget > static_cast<int>(p)) {
        throw FormulationError(fmt::format("hfs budget {} out of range [1, {}]",
                                           reg.node_budget, p));
      }
      break;
  }
}

MilpModel build_olct(const Dataset& train, const TreeTopology& topology,
                     const LossSpec& loss, const RegularizerSpec& reg, double big_m,
                     double epsilon) {
  LossSpec spec = loss;
  spec.kind = LossKind::logistic_pwl;
  return build_model(train, topology, spec, reg, big_m, epsilon);
}

MilpModel build_margot_l1(const Dataset& train, const TreeTopology& topology,
                          const std::vector<double>& layer_c, double big_m,
                          double epsilon) {
  return build_model(train, topology, LossSpec{LossKind::hinge, TangentSet::V0, layer_c},
                     RegularizerSpec{}, big_m, epsilon);
}

MilpModel build_oct_misclass(const Dataset& train, const TreeTopology& topology,
                             double big_m, double epsilon, const RegularizerSpec& reg,
                             double c) {
  return build_model(train, topology,
                     LossSpec{LossKind::misclassification, TangentSet::V0, {c}}, reg, big_m,
                     epsilon);
}

MilpModel build_model(const Dataset& train, const TreeTopology& topology,
                      const LossSpec& loss, const RegularizerSpec& reg, double big_m,
                      double epsilon) {
  validate_specs(topology, train.cols(), loss, reg);
  MilpModel model = make_skeleton(train, topology, reg.has_l1(), big_m, epsilon);
  auto& L = model.layout;

  switch (loss.kind) {
    case LossKind::logistic_pwl: {
      add_slack_block(model, loss.layer_c);
      const auto lines = tangent_lines(loss.tangents);
      add_gated_slack_rows(model, train, topology, lines);
      break;
    }
    case LossKind::hinge: {
      add_slack_block(model, loss.layer_c);
      const std::vector<TangentLine> lines{{0.0, 0.0, kInf}, {-1.0, 1.0, 1.0}};
      add_gated_slack_rows(model, train, topology, lines);
      break;
    }
    case LossKind::misclassification:
      break;
  }
  add_weight_split_rows(model);

  if (loss.kind == LossKind::misclassification) {
    // yhat in {0,1} encodes the prediction 2 yhat - 1; the per-point loss
    // (1 - y (2 yhat - 1)) / 2 equals (1 + y) / 2 - y yhat.
    const double c = loss.layer_c.front();
    L.yhat = model.num_vars();
    for (int i = 0; i < L.n; ++i) {
      const double y = train.labels[static_cast<std::size_t>(i)];
      model.add_variable(fmt::format("yhat[{}]", i), VarKind::binary, 0.0, 1.0, -c * y);
      model.objective_offset += c * (1.0 + y) / 2.0;
    }
    const auto last = topology.last_layer();
    for (int i = 0; i < L.n; ++i) {
      for (int s = last.begin; s < last.end; ++s) {
        // w.x + b <= M (2 + (2 yhat - 1) - z)  and  w.x + b >= -M (2 - (2 yhat - 1) - z)
        for (const bool upper : {true, false}) {
          Constraint row;
          row.name = fmt::format("{}[{}][{}]", upper ? "predU" : "predL", i, s);
          for (int j = 0; j < L.p; ++j) {
            const double x = feature(train, i, j);
            if (x == 0.0) continue;
            row.index.push_back(L.w_col(s, j));
            row.coef.push_back(x);
          }
          row.index.push_back(L.b_col(s));
          row.coef.push_back(1.0);
          row.index.push_back(L.yhat_col(i));
          row.coef.push_back(-2.0 * big_m);
          row.index.push_back(L.z_col(i, s));
          row.coef.push_back(upper ? big_m : -big_m);
          row.sense = upper ? Sense::le : Sense::ge;
          row.rhs = upper ? big_m : -3.0 * big_m;
          model.add_constraint(std::move(row));
        }
      }
    }
  }

  if (reg.kind == RegKind::sfs || reg.kind == RegKind::hfs) {
    model = add_l0_structure(std::move(model), reg);
  }
  model.rebuild_index();
  return model;
}

MilpModel add_l0_structure(MilpModel model, const RegularizerSpec& reg) {
  auto& L = model.layout;
  if (reg.kind != RegKind::sfs && reg.kind != RegKind::hfs) {
    throw FormulationError("l0 structure needs an sfs or hfs regularizer");
  }
  if (L.delta >= 0) throw FormulationError("model already carries l0 structure");
  if (reg.kind == RegKind::hfs && (reg.node_budget < 1 || reg.node_budget > L.p)) {
    throw FormulationError(fmt::format("hfs budget {} out of range [1, {}]", reg.node_budget, L.p));
  }
  if (reg.kind == RegKind::sfs) {
    if (!(reg.alpha > 0.0)) throw FormulationError("sfs needs alpha > 0");
    if (static_cast<int>(reg.layer_budget.size()) != L.depth) {
      throw FormulationError("sfs needs one budget per layer");
    }
    for (const double b : reg.layer_budget) {
      if (b < 0.0 || b > L.p) throw FormulationError(fmt::format("sfs budget {} out of range", b));
    }
  }

  const int nodes = L.num_nodes();
  const int count = nodes * L.p;
  // delta sits before yhat and u in the fixed column order.
  const int position = L.yhat >= 0 ? L.yhat : model.num_vars();
  shift_columns(model, position, count);
  std::vector<Variable> fresh;
  fresh.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < nodes; ++t) {
    for (int j = 0; j < L.p; ++j) {
      fresh.push_back({fmt::format("delta[{}][{}]", t, j), VarKind::binary, 0.0, 1.0});
    }
  }
  model.variables.insert(model.variables.begin() + position, fresh.begin(), fresh.end());
  model.objective.insert(model.objective.begin() + position, static_cast<std::size_t>(count), 0.0);
  L.delta = position;

  const double big_m = model.big_m;
  for (int t = 0; t < nodes; ++t) {
    for (int j = 0; j < L.p; ++j) {
      model.add_constraint({fmt::format("l0up[{}][{}]", t, j),
                            {L.w_col(t, j), L.delta_col(t, j)},
                            {1.0, -big_m},
                            Sense::le,
                            0.0});
      model.add_constraint({fmt::format("l0lo[{}][{}]", t, j),
                            {L.w_col(t, j), L.delta_col(t, j)},
                            {1.0, big_m},
                            Sense::ge,
                            0.0});
    }
  }

  if (reg.kind == RegKind::hfs) {
    for (int t = 0; t < nodes; ++t) {
      Constraint row{fmt::format("hfs[{}]", t), {}, {}, Sense::le,
                     static_cast<double>(reg.node_budget)};
      for (int j = 0; j < L.p; ++j) {
        row.index.push_back(L.delta_col(t, j));
        row.coef.push_back(1.0);
      }
      model.add_constraint(std::move(row));
    }
  } else {
    L.u = model.num_vars();
    for (int t = 0; t < nodes; ++t) {
      model.add_variable(fmt::format("u[{}]", t), VarKind::continuous, 0.0, kInf, reg.alpha);
    }
    for (int t = 0; t < nodes; ++t) {
      Constraint row{fmt::format("sfsnnz[{}]", t), {L.u_col(t)}, {1.0}, Sense::ge, 0.0};
      for (int j = 0; j < L.p; ++j) {
        row.index.push_back(L.delta_col(t, j));
        row.coef.push_back(-1.0);
      }
      model.add_constraint(std::move(row));
      model.add_constraint({fmt::format("sfsfloor[{}]", t),
                            {L.u_col(t)},
                            {1.0},
                            Sense::ge,
                            reg.layer_budget[static_cast<std::size_t>(TreeTopology::layer_of(t))]});
    }
  }
  model.rebuild_index();
  return model;
}

Census closed_form_census(long n, long p, int depth, const LossSpec& loss,
                          const RegularizerSpec& reg) {
  const TreeTopology topology(depth);
  const long nodes = topology.num_nodes();
  const long last = topology.num_last();
  Census c;
  c.z = n * last;
  c.w = p * nodes;
  if (reg.has_l1()) {
    c.wpos = c.wneg = p * nodes;
    c.weight_split = p * nodes;
  }
  c.b = nodes;
  c.routing = n;
  c.forwarding = 2 * n * (last - 1);
  if (loss.kind == LossKind::misclassification) {
    c.yhat = n;
    c.prediction = 2 * n * last;
  } else {
    const long lines = loss.kind == LossKind::hinge
                           ? 2
                           : static_cast<long>(tangent_lines(loss.tangents).size());
    c.xi = n * depth;
    c.gated_slack = n * nodes * (lines - 1);
    c.slack_floor = n * depth;
  }
  if (reg.kind == RegKind::hfs || reg.kind == RegKind::sfs) {
    c.delta = p * nodes;
    c.indicator_link = 2 * p * nodes;
  }
  if (reg.kind == RegKind::hfs) c.budget = nodes;
  if (reg.kind == RegKind::sfs) {
    c.u = nodes;
    c.soft_budget = 2 * nodes;
  }
  return c;
}

Census count_census(const MilpModel& model) {
  const auto prefix = [](const std::string& name) { return name.substr(0, name.find('[')); };
  Census c;
  for (const auto& v : model.variables) {
    const auto k = prefix(v.name);
    if (k == "z") ++c.z;
    else if (k == "w") ++c.w;
    else if (k == "wpos") ++c.wpos;
    else if (k == "wneg") ++c.wneg;
    else if (k == "b") ++c.b;
    else if (k == "xi") ++c.xi;
    else if (k == "delta") ++c.delta;
    else if (k == "yhat") ++c.yhat;
    else if (k == "u") ++c.u;
    else throw FormulationError(fmt::format("unexpected variable {}", v.name));
  }
  for (const auto& r : model.constraints) {
    const auto k = prefix(r.name);
    if (k == "route") ++c.routing;
    else if (k == "fwdL" || k == "fwdR") ++c.forwarding;
    else if (k == "slack") ++c.gated_slack;
    else if (k == "xipos") ++c.slack_floor;
    else if (k == "wsplit") ++c.weight_split;
    else if (k == "predU" || k == "predL") ++c.prediction;
    else if (k == "l0up" || k == "l0lo") ++c.indicator_link;
    else if (k == "hfs") ++c.budget;
    else if (k == "sfsnnz" || k == "sfsfloor") ++c.soft_budget;
    else throw FormulationError(fmt::format("unexpected constraint {}", r.name));
  }
  return c;
}

std::string lp_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (std::size_t k = 0; k < name.size(); ++k) {
    const char c = name[k];
    if (c == '[') {
      out.push_back('_');
    } else if (c == ']') {
      if (k + 1 < name.size() && name[k + 1] == '[') {
        out.push_back('_');
        ++k;
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

namespace {

std::string number(double v) { return fmt::format("{:.17g}", v); }

void write_terms(std::ostream& out, const std::vector<int>& index,
                 const std::vector<double>& coef, const MilpModel& model) {
  constexpr int kTermsPerLine = 6;
  int written = 0;
  for (std::size_t k = 0; k < index.size(); ++k) {
    const double c = coef[k];
    if (c == 0.0) continue;
    if (written > 0 && written % kTermsPerLine == 0) out << "\n   ";
    out << (c < 0 ? " - " : (written == 0 ? " " : " + ")) << number(std::abs(c)) << ' '
        << lp_name(model.variables[static_cast<std::size_t>(index[k])].name);
    ++written;
  }
  if (written == 0) out << " 0 " << lp_name(model.variables.front().name);
}

}  // namespace

void write_lp(const MilpModel& model, std::ostream& out) {
  if (model.variables.empty()) throw FormulationError("cannot export a model without variables");
  out << "\\ loct MILP: " << model.num_vars() << " variables, " << model.num_rows()
      << " constraints\n";
  out << "Minimize\n obj:";
  std::vector<int> index;
  std::vector<double> coef;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (model.objective[static_cast<std::size_t>(j)] != 0.0) {
      index.push_back(j);
      coef.push_back(model.objective[static_cast<std::size_t>(j)]);
    }
  }
  write_terms(out, index, coef, model);
  if (model.objective_offset != 0.0) {
    out << (model.objective_offset < 0 ? " - " : " + ") << number(std::abs(model.objective_offset));
  }
  out << "\nSubject To\n";
  for (const auto& row : model.constraints) {
    out << ' ' << lp_name(row.name) << ':';
    write_terms(out, row.index, row.coef, model);
    switch (row.sense) {
      case Sense::le: out << " <= "; break;
      case Sense::ge: out << " >= "; break;
      case Sense::eq: out << " = "; break;
    }
    out << number(row.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const auto& var : model.variables) {
    if (var.kind == VarKind::binary) continue;
    const auto name = lp_name(var.name);
    if (var.lower == -kInf && var.upper == kInf) {
      out << ' ' << name << " free\n";
    } else if (var.lower == 0.0 && var.upper == kInf) {
      continue;
    } else if (var.upper == kInf) {
      out << ' ' << name << " >= " << number(var.lower) << '\n';
    } else if (var.lower == -kInf) {
      out << " -inf <= " << name << " <= " << number(var.upper) << '\n';
    } else {
      out << ' ' << number(var.lower) << " <= " << name << " <= " << number(var.upper) << '\n';
    }
  }
  bool any_binary = false;
  for (const auto& var : model.variables) {
    if (var.kind != VarKind::binary) continue;
    if (!any_binary) out << "Binaries\n";
    any_binary = true;
    out << ' ' << lp_name(var.name) << '\n';
  }
  out << "End\n";
}

std::string to_lp_string(const MilpModel& model) {
  std::ostringstream out;
  write_lp(model, out);
  return out.str();
}

void export_lp(const MilpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormulationError(fmt::format("cannot open {} for writing", path.string()));
  write_lp(model, out);
  out.flush();
  if (!out) throw FormulationError(fmt::format("failed writing {}", path.string()));
}

}  // namespace loct
