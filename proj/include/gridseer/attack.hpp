#pragma once

// Minimum-cost undetectable attacks via minimum S-T cuts.
//
// Biasing every bus on one side of a line set by the same angle leaves all
// other angle differences untouched, so only meters measuring the cut lines
// see a change. The cheapest such cut separating the targets from the
// reference gives the cheapest attack of this shape.

#include <algorithm>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gridseer/core.hpp"
#include "gridseer/estimator.hpp"
#include "gridseer/grid_model.hpp"
#include "gridseer/max_flow.hpp"

namespace gridseer {

struct AttackTarget {
  std::vector<BusIdx> buses;
  // Meters the attacker cannot touch, in addition to those flagged secured.
  std::vector<MeterIdx> secured;
  // Lines whose parameters the attacker does not know; measured ones cannot
  // be cut.
  std::vector<LineIdx> unknown_lines;
  double delta = 0.1;
};

struct CutGraph {
  std::size_t bus_count = 0;
  BusIdx source = 0;
  std::vector<BusIdx> targets;
  bool virtual_terminal = false;
  std::vector<double> weight;  // per line; 0 when unmeasured
  std::vector<bool> measured;  // per line

  std::size_t node_count() const { return bus_count + (virtual_terminal ? 1 : 0); }
  std::size_t terminal() const { return virtual_terminal ? bus_count : targets.front(); }
};

struct AttackPlan {
  std::vector<LineIdx> cut_edges;
  std::vector<MeterIdx> compromised_meters;
  double cost = 0.0;        // sum of cut weights
  double meter_cost = 0.0;  // each compromised meter counted once
  double max_flow = 0.0;
  std::vector<BusIdx> biased_buses;
  StateVector bias;
  AttackVector vector;
};

namespace detail {

inline std::vector<BusIdx> attack_targets(const Case& c, const AttackTarget& target) {
  if (target.buses.empty()) fail(ErrorKind::kUsage, "attack target set must be nonempty");
  std::vector<BusIdx> t = target.buses;
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  for (BusIdx b : t) {
    if (b >= c.network.bus_count()) {
      fail(ErrorKind::kInvalidInput, "unknown target bus index " + std::to_string(b));
    }
    if (b == c.network.reference()) {
      fail(ErrorKind::kInvalidInput, "the reference bus cannot be attacked");
    }
  }
  return t;
}

inline std::vector<bool> secured_mask(const Case& c, const AttackTarget& target) {
  std::vector<bool> secured(c.meter_count(), false);
  for (MeterIdx p = 0; p < c.meter_count(); ++p) secured[p] = c.meters[p].secured;
  for (MeterIdx p : target.secured) secured.at(p) = true;
  return secured;
}

}  // namespace detail

// Edge weight: total cost of the unsecured meters measuring the line, or
// infinity when a secured meter measures it. Several targets are merged
// through a virtual terminal joined to each by an infinite edge.
inline CutGraph build_cut_graph(const Case& c, std::span<const MeterIdx> meters,
                                const AttackTarget& target,
                                std::span<const double> costs = {}) {
  const PowerNetwork& net = c.network;
  CutGraph g;
  g.bus_count = net.bus_count();
  g.source = net.reference();
  g.targets = detail::attack_targets(c, target);
  g.virtual_terminal = g.targets.size() > 1;
  g.weight.assign(net.line_count(), 0.0);
  g.measured.assign(net.line_count(), false);
  std::vector<bool> secured = detail::secured_mask(c, target);
  if (!costs.empty() && costs.size() != c.meter_count()) {
    fail(ErrorKind::kInvalidInput, "cost vector length does not match the meter count");
  }
  for (MeterIdx p : canonical_meters(c, meters)) {
    const double cost = costs.empty() ? c.meters[p].cost : costs[p];
    for (LineIdx l : measured_lines(net, c.meters[p])) {
      g.measured[l] = true;
      g.weight[l] = secured[p] ? kInfinity : g.weight[l] + cost;
    }
  }
  for (LineIdx l : target.unknown_lines) {
    if (l >= net.line_count()) fail(ErrorKind::kInvalidInput, "unknown line index");
    if (g.measured[l]) g.weight[l] = kInfinity;
  }
  return g;
}

namespace detail {

struct CutFlow {
  FlowNetwork network;
  std::vector<FlowNetwork::ArcId> line_arcs;  // forward arc per line, or npos
};

inline CutFlow cut_flow_network(const PowerNetwork& net, const CutGraph& g) {
  CutFlow out{FlowNetwork(g.node_count()), {}};
  out.line_arcs.assign(net.line_count(), static_cast<FlowNetwork::ArcId>(-1));
  for (LineIdx l = 0; l < net.line_count(); ++l) {
    if (!g.measured[l] || g.weight[l] <= 0.0) continue;
    const Line& ln = net.line(l);
    out.line_arcs[l] = out.network.add_arc(ln.from, ln.to, g.weight[l]);
    out.network.add_arc(ln.to, ln.from, g.weight[l]);
  }
  if (g.virtual_terminal) {
    for (BusIdx t : g.targets) out.network.add_arc(t, g.bus_count, kInfinity);
  }
  return out;
}

}  // namespace detail

// Minimum cut closest to the reference. The biased side gets angle shift
// delta, the attack vector is a = H c over `meters`, and the result is
// checked to be undetectable before it is returned.
inline AttackPlan min_cut_attack(const Case& c, std::span<const MeterIdx> meters,
                                 const AttackTarget& target,
                                 std::span<const double> costs = {}) {
  const PowerNetwork& net = c.network;
  CutGraph g = build_cut_graph(c, meters, target, costs);
  detail::CutFlow cf = detail::cut_flow_network(net, g);
  FlowNetwork& fn = cf.network;

  auto barrier = fn.unbounded_path(g.source, g.terminal());
  if (!barrier.empty()) {
    nlohmann::json path = nlohmann::json::array();
    std::string text;
    for (auto a : barrier) {
      if (fn.tail(a) >= net.bus_count() || fn.head(a) >= net.bus_count()) continue;
      path.push_back({net.bus_id(fn.tail(a)), net.bus_id(fn.head(a))});
      text += (text.empty() ? "" : " ") + std::string("(") + std::to_string(net.bus_id(fn.tail(a))) +
              "," + std::to_string(net.bus_id(fn.head(a))) + ")";
    }
    fail(ErrorKind::kInfeasible,
         "attack impossible under secured set: every path to the target is guarded, e.g. " + text,
         {{"barrier", path}});
  }

  AttackPlan plan;
  plan.max_flow = fn.max_flow(g.source, g.terminal());
  std::vector<bool> source_side = fn.reachable_from(g.source);
  for (BusIdx b = 0; b < net.bus_count(); ++b) {
    if (!source_side[b]) plan.biased_buses.push_back(b);
  }
  std::vector<bool> cut(net.line_count(), false);
  for (LineIdx l = 0; l < net.line_count(); ++l) {
    const Line& ln = net.line(l);
    if (g.measured[l] && source_side[ln.from] != source_side[ln.to]) {
      cut[l] = true;
      plan.cut_edges.push_back(l);
      plan.cost += g.weight[l];
    }
  }
  std::vector<MeterIdx> active = canonical_meters(c, meters);
  for (MeterIdx p : active) {
    auto lines = measured_lines(net, c.meters[p]);
    if (std::any_of(lines.begin(), lines.end(), [&](LineIdx l) { return cut[l]; })) {
      plan.compromised_meters.push_back(p);
      plan.meter_cost += costs.empty() ? c.meters[p].cost : costs[p];
    }
  }

  JacobianMatrix h = build_jacobian(c, active);
  plan.bias = StateVector::Zero(static_cast<Eigen::Index>(net.state_count()));
  for (BusIdx b : plan.biased_buses) plan.bias(static_cast<Eigen::Index>(*net.column(b))) = target.delta;
  plan.vector = forge_attack(h, plan.bias);
  const bool covered = std::includes(plan.compromised_meters.begin(), plan.compromised_meters.end(),
                                     plan.vector.support.begin(), plan.vector.support.end());
  if (!verify_undetectable(h, plan.vector) || !covered) {
    fail(ErrorKind::kInternal, "synthesized attack failed its undetectability check");
  }
  return plan;
}

// Counts meters instead of costs: every unsecured meter weighs 1. The count
// bounds the sparsest attack from above; shared injection meters are charged
// once per cut line in the weight model.
inline AttackPlan smallest_attack_meter_set(const Case& c, std::span<const MeterIdx> meters,
                                            const AttackTarget& target) {
  std::vector<double> unit(c.meter_count(), 1.0);
  return min_cut_attack(c, meters, target, unit);
}

inline nlohmann::json to_json(const Case& c, const AttackPlan& plan) {
  const PowerNetwork& net = c.network;
  nlohmann::json cut = nlohmann::json::array();
  for (LineIdx l : plan.cut_edges) {
    cut.push_back({net.bus_id(net.line(l).from), net.bus_id(net.line(l).to)});
  }
  nlohmann::json ids = nlohmann::json::array();
  for (MeterIdx p : plan.compromised_meters) ids.push_back(c.meters[p].id);
  nlohmann::json biased = nlohmann::json::array();
  for (BusIdx b : plan.biased_buses) biased.push_back(net.bus_id(b));
  const auto& a = plan.vector.a;
  return {{"cut", cut},
          {"meters", ids},
          {"cost", plan.cost},
          {"meter_cost", plan.meter_cost},
          {"max_flow", plan.max_flow},
          {"biased_buses", biased},
          {"c", std::vector<double>(plan.bias.data(), plan.bias.data() + plan.bias.size())},
          {"a", std::vector<double>(a.data(), a.data() + a.size())}};
}

// Cut lines drawn bold red, biased buses filled.
inline std::string to_dot(const Case& c, const AttackPlan& plan) {
  const PowerNetwork& net = c.network;
  std::vector<bool> biased(net.bus_count(), false);
  for (BusIdx b : plan.biased_buses) biased[b] = true;
  std::vector<bool> cut(net.line_count(), false);
  for (LineIdx l : plan.cut_edges) cut[l] = true;
  std::ostringstream dot;
  dot << "graph attack {\n  node [shape=circle];\n";
  for (BusIdx b = 0; b < net.bus_count(); ++b) {
    dot << "  v" << net.bus_id(b);
    if (b == net.reference()) {
      dot << " [shape=doublecircle]";
    } else if (biased[b]) {
      dot << " [style=filled, fillcolor=salmon]";
    }
    dot << ";\n";
  }
  for (LineIdx l = 0; l < net.line_count(); ++l) {
    const Line& ln = net.line(l);
    dot << "  v" << net.bus_id(ln.from) << " -- v" << net.bus_id(ln.to);
    if (cut[l]) dot << " [color=red, penwidth=3]";
    dot << ";\n";
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace gridseer
