#pragma once

// Minimum-cost protection planning: choose meters whose protection makes
// every attack that biases a target bus detectable. A meter set qualifies
// when it measures an observable subnetwork containing the targets, i.e.
// when an EMST over its meters reaches every target.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridseer/core.hpp"
#include "gridseer/grid_model.hpp"
#include "gridseer/linalg.hpp"
#include "gridseer/lp.hpp"
#include "gridseer/max_flow.hpp"
#include "gridseer/milp.hpp"
#include "gridseer/observability.hpp"

namespace gridseer {

struct ProtectionTarget {
  std::vector<BusIdx> buses;  // D
};

struct ProtectionPlan {
  std::vector<MeterIdx> meters;  // canonical order
  double cost = 0.0;
  Emst witness;
  bool optimal = false;
};

struct SolverStats {
  long nodes = 0;
  long lp_iterations = 0;
  int cuts = 0;
  double best_bound = 0.0;
  double seconds = 0.0;
  bool timed_out = false;
  bool incumbent_from_heuristic = false;
};

struct ProtectionOptions {
  double time_limit_seconds = 60.0;
  // Per-meter costs overriding Meter::cost; empty uses the case costs.
  std::vector<double> costs;
  std::function<void(const nlohmann::json&)> trace;
  bool trace_every_node = false;
};

// Residual vertex set after each pruning round.
struct TphTrace {
  std::vector<std::vector<BusIdx>> rounds;
};

namespace detail {

inline std::vector<double> effective_costs(const Case& c, std::span<const double> override) {
  if (override.empty()) {
    std::vector<double> out;
    for (const Meter& m : c.meters) out.push_back(m.cost);
    return out;
  }
  if (override.size() != c.meter_count()) {
    fail(ErrorKind::kInvalidInput, "cost vector length does not match the meter count");
  }
  for (double v : override) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorKind::kInvalidInput, "meter costs must be finite and nonnegative");
    }
  }
  return {override.begin(), override.end()};
}

inline std::vector<BusIdx> normalized_target(const Case& c, const ProtectionTarget& target) {
  if (target.buses.empty()) fail(ErrorKind::kUsage, "target set D must be nonempty");
  std::vector<BusIdx> d = target.buses;
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  for (BusIdx b : d) {
    if (b >= c.network.bus_count()) {
      fail(ErrorKind::kInvalidInput, "unknown target bus index " + std::to_string(b));
    }
    if (b == c.network.reference()) {
      fail(ErrorKind::kInvalidInput, "target set must exclude the reference bus " +
                                         std::to_string(c.network.bus_id(b)));
    }
  }
  return d;
}

// Targets that no path of measured lines connects to the reference.
inline void require_reachable(const Case& c, const MeasuredSubgraph& g,
                              std::span<const BusIdx> targets) {
  const PowerNetwork& net = c.network;
  std::vector<bool> seen(net.bus_count(), false);
  std::queue<BusIdx> queue;
  seen[net.reference()] = true;
  queue.push(net.reference());
  while (!queue.empty()) {
    BusIdx b = queue.front();
    queue.pop();
    for (LineIdx l : net.incident(b)) {
      BusIdx k = net.other_end(l, b);
      if (g.contains_edge(l) && !seen[k]) {
        seen[k] = true;
        queue.push(k);
      }
    }
  }
  nlohmann::json ids = nlohmann::json::array();
  std::string list;
  for (BusIdx b : targets) {
    if (seen[b]) continue;
    ids.push_back(net.bus_id(b));
    list += (list.empty() ? "" : ",") + std::to_string(net.bus_id(b));
  }
  if (!ids.empty()) {
    fail(ErrorKind::kInfeasible,
         "infeasible target: buses {" + list + "} are not connected to the reference by measured lines",
         {{"unreachable_buses", ids}});
  }
}

}  // namespace detail

// Algebraic soundness: every state c with H_plan c = 0 leaves the targets
// unbiased, so an undetectable attack avoiding the plan's meters cannot move
// any target angle.
inline bool verify_protection(const Case& c, std::span<const MeterIdx> plan_meters,
                              const ProtectionTarget& target) {
  JacobianMatrix h = build_jacobian(c, plan_meters);
  std::vector<bool> pinned = linalg::determined_columns(h.values);
  for (BusIdx b : target.buses) {
    auto col = c.network.column(b);
    if (!col) continue;
    if (!pinned[*col]) return false;
  }
  return true;
}

inline bool verify_protection(const Case& c, const ProtectionPlan& plan,
                              const ProtectionTarget& target) {
  return verify_protection(c, plan.meters, target);
}

// Single-commodity flow model of the minimum-cost EMST reaching D.
//
// Every measured line contributes two opposite arcs (none enter the root).
// y[a,p] assigns meter p to arc a, x[a] marks arc use and f[a] carries flow.
// Each vertex in the arborescence absorbs one unit sent from the root, which
// keeps the used arcs connected to it; vertices measured by a selected
// injection meter are forced in as pseudo demands.
class ArborescenceModel {
 public:
  struct Arc {
    BusIdx tail, head;
    LineIdx line;
    int x = -1, f = -1;
    std::vector<std::pair<MeterIdx, int>> y;  // (meter, variable)
  };

  ArborescenceModel(const Case& c, std::span<const MeterIdx> meters,
                    const ProtectionTarget& target, std::span<const double> costs = {})
      : case_(&c), costs_(detail::effective_costs(c, costs)) {
    const PowerNetwork& net = c.network;
    targets_ = detail::normalized_target(c, target);
    graph_ = measured_subgraph(c, meters);
    detail::require_reachable(c, graph_, targets_);
    const BusIdx root = net.reference();
    const double capacity = static_cast<double>(graph_.vertices.size()) - 1.0;

    in_arcs_.assign(net.bus_count(), {});
    out_arcs_.assign(net.bus_count(), {});
    std::vector<std::vector<int>> meter_vars(c.meter_count());
    for (LineIdx l : graph_.edges) {
      const Line& ln = net.line(l);
      for (auto [u, v] : {std::pair{ln.from, ln.to}, std::pair{ln.to, ln.from}}) {
        if (v == root) continue;
        Arc arc{u, v, l};
        for (MeterIdx p : graph_.meters) {
          if (!measures_line(net, c.meters[p], l)) continue;
          int var = model_.add_variable(0.0, 1.0, costs_[p]);
          arc.y.emplace_back(p, var);
          meter_vars[p].push_back(var);
          y_vars_.push_back(var);
        }
        arc.x = model_.add_variable(0.0, 1.0, 0.0);
        arc.f = model_.add_variable(0.0, capacity, 0.0);
        x_vars_.push_back(arc.x);
        in_arcs_[v].push_back(static_cast<int>(arcs_.size()));
        out_arcs_[u].push_back(static_cast<int>(arcs_.size()));
        arcs_.push_back(std::move(arc));
      }
    }

    std::vector<bool> demanded(net.bus_count(), false);
    for (BusIdx b : targets_) demanded[b] = true;

    for (const Arc& a : arcs_) {
      std::vector<lp::Term> t{{a.x, 1.0}};
      for (const auto& [p, var] : a.y) t.push_back({var, -1.0});
      model_.add_row(std::move(t), 0.0, 0.0);
    }
    // Each measurement serves at most one arc, however many meters take it.
    std::vector<bool> grouped(c.meter_count(), false);
    for (MeterIdx p : graph_.meters) {
      if (grouped[p]) continue;
      std::vector<lp::Term> t;
      for (MeterIdx q : graph_.meters) {
        if (grouped[q] || !same_measurement(c.meters[p], c.meters[q])) continue;
        grouped[q] = true;
        for (int var : meter_vars[q]) t.push_back({var, 1.0});
      }
      if (t.size() >= 2) model_.add_row(std::move(t), -lp::kInf, 1.0);
    }
    for (BusIdx v : graph_.vertices) {
      if (v == root) continue;
      model_.add_row(in_terms(v, 1.0), demanded[v] ? 1.0 : -lp::kInf, 1.0);
    }
    // An arc leaves only from a vertex already in the arborescence.
    for (const Arc& a : arcs_) {
      if (a.tail == root) continue;
      std::vector<lp::Term> t = in_terms(a.tail, -1.0);
      t.push_back({a.x, 1.0});
      model_.add_row(std::move(t), -lp::kInf, 0.0);
    }
    // Pseudo demands of injection meters.
    for (MeterIdx p : graph_.meters) {
      if (c.meters[p].kind != MeterKind::kInjection || meter_vars[p].empty()) continue;
      for (BusIdx w : measured_buses(net, c.meters[p])) {
        if (w == root) continue;
        std::vector<lp::Term> t = in_terms(w, -1.0);
        for (int var : meter_vars[p]) t.push_back({var, 1.0});
        model_.add_row(std::move(t), -lp::kInf, 0.0);
      }
    }
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
      for (std::size_t j = i + 1; j < arcs_.size(); ++j) {
        if (arcs_[i].line == arcs_[j].line) {
          model_.add_row({{arcs_[i].x, 1.0}, {arcs_[j].x, 1.0}}, -lp::kInf, 1.0);
        }
      }
    }
    // Flow conservation: every vertex in the arborescence absorbs one unit.
    for (BusIdx v : graph_.vertices) {
      if (v == root) continue;
      std::vector<lp::Term> t = in_terms(v, -1.0);
      for (int a : in_arcs_[v]) t.push_back({arcs_[a].f, 1.0});
      for (int a : out_arcs_[v]) t.push_back({arcs_[a].f, -1.0});
      model_.add_row(std::move(t), 0.0, 0.0);
    }
    for (const Arc& a : arcs_) {
      model_.add_row({{a.f, 1.0}, {a.x, -capacity}}, -lp::kInf, 0.0);
    }
  }

  const lp::Model& model() const { return model_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const MeasuredSubgraph& measured() const { return graph_; }
  const std::vector<BusIdx>& targets() const { return targets_; }
  const std::vector<double>& costs() const { return costs_; }

  std::vector<std::vector<int>> branch_groups() const { return {x_vars_, y_vars_}; }

  bool integral_costs() const {
    return std::all_of(costs_.begin(), costs_.end(),
                       [](double v) { return v == std::floor(v); });
  }

  // Directed cuts x(delta-(S)) >= in(v) for root-free sets S containing v,
  // found by max flow under arc capacities x.
  std::vector<lp::Row> separate(const std::vector<double>& x, std::size_t max_cuts = 32) const {
    const PowerNetwork& net = case_->network;
    std::vector<std::pair<double, BusIdx>> order;
    for (BusIdx v : graph_.vertices) {
      if (v == net.reference()) continue;
      double in = 0.0;
      for (int a : in_arcs_[v]) in += x[arcs_[a].x];
      if (in > 1e-6) order.emplace_back(-in, v);
    }
    std::sort(order.begin(), order.end());
    std::vector<lp::Row> cuts;
    std::set<std::vector<int>> seen;
    for (const auto& [neg_in, v] : order) {
      if (cuts.size() >= max_cuts) break;
      FlowNetwork fn(net.bus_count());
      for (const Arc& a : arcs_) {
        const double cap = x[a.x];
        if (cap > 1e-9) fn.add_arc(a.tail, a.head, cap);
      }
      const double flow = fn.max_flow(net.reference(), v);
      if (flow >= -neg_in - 1e-4) continue;
      std::vector<bool> source_side = fn.reachable_from(net.reference());
      lp::Row row;
      std::vector<int> key;
      for (std::size_t i = 0; i < arcs_.size(); ++i) {
        if (source_side[arcs_[i].tail] && !source_side[arcs_[i].head]) {
          row.terms.push_back({arcs_[i].x, 1.0});
          key.push_back(static_cast<int>(i));
        }
      }
      if (!seen.insert(key).second) continue;
      for (lp::Term t : in_terms(v, -1.0)) row.terms.push_back(t);
      row.lower = 0.0;
      row.upper = lp::kInf;
      cuts.push_back(std::move(row));
    }
    return cuts;
  }

  ProtectionPlan extract(const std::vector<double>& x) const {
    const PowerNetwork& net = case_->network;
    std::vector<std::pair<LineIdx, MeterIdx>> pairs;
    std::vector<BusIdx> vertices{net.reference()};
    for (const Arc& a : arcs_) {
      if (x[a.x] < 0.5) continue;
      vertices.push_back(a.head);
      for (const auto& [p, var] : a.y) {
        if (x[var] > 0.5) {
          pairs.emplace_back(a.line, p);
          break;
        }
      }
    }
    std::sort(vertices.begin(), vertices.end());
    std::sort(pairs.begin(), pairs.end());
    ProtectionPlan plan;
    plan.witness.vertices = vertices;
    for (const auto& [l, p] : pairs) {
      plan.witness.edges.push_back(l);
      plan.witness.meter_of_edge.push_back(p);
    }
    plan.meters = plan.witness.meters();
    for (MeterIdx p : plan.meters) plan.cost += costs_[p];
    return plan;
  }

 private:
  std::vector<lp::Term> in_terms(BusIdx v, double coef) const {
    std::vector<lp::Term> t;
    for (int a : in_arcs_[v]) t.push_back({arcs_[a].x, coef});
    return t;
  }

  const Case* case_;
  std::vector<double> costs_;
  std::vector<BusIdx> targets_;
  MeasuredSubgraph graph_;
  lp::Model model_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> in_arcs_, out_arcs_;
  std::vector<int> x_vars_, y_vars_;
};

// ---------------------------------------------------------------------------
// Tree pruning heuristic
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<MeterIdx> meters_inside(const Case& c, std::span<const MeterIdx> meters,
                                           const std::vector<bool>& inside) {
  std::vector<MeterIdx> out;
  for (MeterIdx p : meters) {
    auto buses = measured_buses(c.network, c.meters[p]);
    if (std::all_of(buses.begin(), buses.end(), [&](BusIdx b) { return inside[b]; })) {
      out.push_back(p);
    }
  }
  return out;
}

// The vertex set `inside` is still an observable subnetwork when measured by
// the meters lying wholly inside it.
inline bool residual_observable(const Case& c, std::span<const MeterIdx> meters,
                                const std::vector<bool>& inside) {
  auto kept = meters_inside(c, meters, inside);
  MeasuredSubgraph g = measured_subgraph(c, kept);
  std::size_t count = static_cast<std::size_t>(std::count(inside.begin(), inside.end(), true));
  if (g.vertices.size() != count) return false;
  return subnetwork_observable(c, g);
}

inline Emst cheapest_emst(const Case& c, std::span<const MeterIdx> meters,
                          const std::vector<double>& costs) {
  std::vector<MeterIdx> order(meters.begin(), meters.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](MeterIdx a, MeterIdx b) { return costs[a] < costs[b]; });
  MeasuredSubgraph g = measured_subgraph(c, meters);
  BasicSet basic = find_basic_set(c, meters, order);
  return construct_emst(c, g, basic);
}

}  // namespace detail

// Starts from an EMST of the whole measured network and, walking it depth
// first from the root, removes each terminal-free subtree whose removal keeps
// the residual vertex set observable; the EMST is rebuilt on what remains
// and the walk repeated until nothing more can be removed.
inline ProtectionPlan protect_tph(const Case& c, std::span<const MeterIdx> meters,
                                  const ProtectionTarget& target, TphTrace* trace = nullptr,
                                  std::span<const double> cost_override = {}) {
  const PowerNetwork& net = c.network;
  std::vector<double> costs = detail::effective_costs(c, cost_override);
  std::vector<BusIdx> d = detail::normalized_target(c, target);
  MeasuredSubgraph full = measured_subgraph(c, meters);
  detail::require_reachable(c, full, d);
  if (!subnetwork_observable(c, full)) {
    fail(ErrorKind::kUnobservable, "the measured network is not observable");
  }
  std::vector<bool> terminal(net.bus_count(), false);
  for (BusIdx b : d) terminal[b] = true;
  std::vector<bool> inside(net.bus_count(), false);
  for (BusIdx b : full.vertices) inside[b] = true;

  while (true) {
    auto kept = detail::meters_inside(c, full.meters, inside);
    Emst tree = detail::cheapest_emst(c, kept, costs);

    std::vector<std::vector<BusIdx>> adj(net.bus_count());
    for (LineIdx l : tree.edges) {
      adj[net.line(l).from].push_back(net.line(l).to);
      adj[net.line(l).to].push_back(net.line(l).from);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    std::vector<BusIdx> parent(net.bus_count(), net.bus_count());
    std::vector<BusIdx> preorder;
    std::vector<BusIdx> stack{net.reference()};
    parent[net.reference()] = net.reference();
    while (!stack.empty()) {
      BusIdx v = stack.back();
      stack.pop_back();
      preorder.push_back(v);
      for (auto it = adj[v].rbegin(); it != adj[v].rend(); ++it) {
        if (parent[*it] == net.bus_count()) {
          parent[*it] = v;
          stack.push_back(*it);
        }
      }
    }
    std::vector<bool> has_terminal(net.bus_count(), false);
    for (auto it = preorder.rbegin(); it != preorder.rend(); ++it) {
      if (terminal[*it]) has_terminal[*it] = true;
      if (*it != net.reference() && has_terminal[*it]) has_terminal[parent[*it]] = true;
    }
    auto subtree = [&](BusIdx w) {
      std::vector<BusIdx> out{w};
      for (std::size_t i = 0; i < out.size(); ++i) {
        for (BusIdx k : adj[out[i]]) {
          if (parent[k] == out[i] && k != parent[out[i]]) out.push_back(k);
        }
      }
      return out;
    };

    bool pruned = false;
    std::function<void(BusIdx)> walk = [&](BusIdx v) {
      for (BusIdx w : adj[v]) {
        if (w == parent[v] || parent[w] != v) continue;
        if (!has_terminal[w]) {
          std::vector<bool> trial = inside;
          for (BusIdx b : subtree(w)) trial[b] = false;
          if (detail::residual_observable(c, full.meters, trial)) {
            inside = std::move(trial);
            pruned = true;
            continue;
          }
        }
        walk(w);
      }
    };
    walk(net.reference());

    if (trace) {
      std::vector<BusIdx> residual;
      for (BusIdx b = 0; b < net.bus_count(); ++b) {
        if (inside[b]) residual.push_back(b);
      }
      trace->rounds.push_back(std::move(residual));
    }
    if (!pruned) {
      ProtectionPlan plan;
      plan.witness = tree;
      plan.meters = tree.meters();
      for (MeterIdx p : plan.meters) plan.cost += costs[p];
      plan.optimal = false;
      return plan;
    }
  }
}

// Exact minimum-cost plan by branch-and-bound over the arborescence model,
// seeded with the heuristic plan as incumbent when the measured network is
// observable.
inline ProtectionPlan protect_exact(const Case& c, std::span<const MeterIdx> meters,
                                    const ProtectionTarget& target,
                                    const ProtectionOptions& options = {},
                                    SolverStats* stats = nullptr) {
  ArborescenceModel model(c, meters, target, options.costs);
  std::optional<ProtectionPlan> seed;
  try {
    seed = protect_tph(c, meters, target, nullptr, options.costs);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kUnobservable) throw;
  }
  milp::BranchAndBound bb(model.model(), model.branch_groups());
  bb.set_separator([&model](const std::vector<double>& x) { return model.separate(x); });
  if (seed) bb.set_cutoff(seed->cost);
  milp::Options opt;
  opt.time_limit_seconds = options.time_limit_seconds;
  opt.integral_objective = model.integral_costs();
  opt.trace = options.trace;
  opt.trace_every_node = options.trace_every_node;
  milp::Result res = bb.solve(opt);

  if (stats) {
    stats->nodes = res.nodes;
    stats->lp_iterations = res.lp_iterations;
    stats->cuts = res.cuts;
    stats->seconds = res.seconds;
    stats->timed_out = res.status == milp::Status::kTimeLimit;
    stats->incumbent_from_heuristic = res.solution.empty() && seed.has_value();
  }
  ProtectionPlan plan;
  if (!res.solution.empty()) {
    plan = model.extract(res.solution);
  } else if (seed) {
    plan = *seed;
  } else if (res.status == milp::Status::kTimeLimit) {
    fail(ErrorKind::kInfeasible, "time limit reached before any feasible plan was found");
  } else {
    fail(ErrorKind::kInfeasible, "no observable measured subnetwork contains the targets");
  }
  plan.optimal = res.status == milp::Status::kOptimal;
  if (stats) stats->best_bound = plan.optimal ? plan.cost : res.best_bound;
  auto check = validate_emst(c, meters, plan.witness);
  if (!check.valid) {
    fail(ErrorKind::kInternal, "protection witness failed validation: " + check.violations.front());
  }
  return plan;
}

inline nlohmann::json to_json(const Case& c, const ProtectionPlan& plan) {
  nlohmann::json ids = nlohmann::json::array();
  for (MeterIdx p : plan.meters) ids.push_back(c.meters[p].id);
  return {{"meters", ids},
          {"cost", plan.cost},
          {"optimal", plan.optimal},
          {"witness", to_json(c, plan.witness)}};
}

}  // namespace gridseer
