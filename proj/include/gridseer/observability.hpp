#pragma once

// Network and subnetwork observability, basic measurement sets, and
// edge-measured Steiner trees (EMSTs).
//
// A subnetwork G(M) = (V, E) is observable when the Jacobian rows of M,
// restricted to the columns of V minus the reference, have full column rank.
// Equivalently there is a tree containing the reference that spans V and maps
// each tree edge to a distinct meter of M measuring it.

#include <algorithm>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gridseer/core.hpp"
#include "gridseer/grid_model.hpp"
#include "gridseer/linalg.hpp"
#include "gridseer/max_flow.hpp"

namespace gridseer {

struct ObservabilityReport {
  bool observable = false;
  // Buses (among those queried) whose angle the meters leave free.
  std::vector<BusIdx> unobservable_buses;
  // Nonzero c with H c = 0 exposing the free buses; empty when observable.
  Eigen::VectorXd certificate;
};

namespace detail {

inline Eigen::MatrixXd restrict_columns(const JacobianMatrix& h,
                                        const PowerNetwork& net,
                                        std::span<const BusIdx> buses) {
  Eigen::MatrixXd out(h.values.rows(), 0);
  std::vector<Eigen::Index> cols;
  for (BusIdx b : buses) {
    if (auto c = net.column(b)) cols.push_back(static_cast<Eigen::Index>(*c));
  }
  out.resize(h.values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = h.values.col(cols[k]);
  }
  return out;
}

// Null-space certificate over the full column set: the basis vector with the
// largest weight on the queried buses, plus every queried bus left free.
inline void fill_certificate(const JacobianMatrix& h, const PowerNetwork& net,
                             const std::vector<bool>& queried,
                             ObservabilityReport& report) {
  Eigen::MatrixXd ns = linalg::null_space(h.values);
  Eigen::Index best = -1;
  double best_weight = 0.0;
  for (Eigen::Index k = 0; k < ns.cols(); ++k) {
    double w = 0.0;
    for (Eigen::Index j = 0; j < ns.rows(); ++j) {
      if (queried[net.column_bus(static_cast<std::size_t>(j))]) {
        w += ns(j, k) * ns(j, k);
      }
    }
    if (w > best_weight + 1e-12) {
      best_weight = w;
      best = k;
    }
  }
  if (best >= 0) report.certificate = ns.col(best);
  for (Eigen::Index j = 0; j < ns.rows(); ++j) {
    BusIdx b = net.column_bus(static_cast<std::size_t>(j));
    if (queried[b] && ns.cols() > 0 && ns.row(j).norm() > 1e-7) {
      report.unobservable_buses.push_back(b);
    }
  }
  std::sort(report.unobservable_buses.begin(), report.unobservable_buses.end());
}

}  // namespace detail

// Rank test for G(meters): the reference is measured and the rows have full
// column rank on the measured buses.
inline bool subnetwork_observable(const Case& c, const MeasuredSubgraph& g) {
  const PowerNetwork& net = c.network;
  if (!g.contains_vertex(net.reference())) return false;
  JacobianMatrix h = build_jacobian(c, g.meters);
  Eigen::MatrixXd restricted = detail::restrict_columns(h, net, g.vertices);
  return linalg::rank(restricted) == restricted.cols();
}

inline bool subnetwork_observable(const Case& c, std::span<const MeterIdx> meters) {
  return subnetwork_observable(c, measured_subgraph(c, meters));
}

// Without targets: full-network mode, true iff rank(H(meters)) = n.
// With targets: subnetwork mode over G(meters), additionally requiring every
// target to lie inside the measured subnetwork.
inline ObservabilityReport is_observable(
    const Case& c, std::span<const MeterIdx> meters,
    const std::optional<std::vector<BusIdx>>& targets = std::nullopt) {
  const PowerNetwork& net = c.network;
  JacobianMatrix h = build_jacobian(c, meters);
  ObservabilityReport report;
  std::vector<bool> queried(net.bus_count(), false);
  if (!targets) {
    report.observable =
        linalg::rank(h.values) == static_cast<Eigen::Index>(net.state_count());
    std::fill(queried.begin(), queried.end(), true);
  } else {
    MeasuredSubgraph g = measured_subgraph(c, meters);
    bool inside = true;
    for (BusIdx b : *targets) {
      if (b >= net.bus_count()) {
        fail(ErrorKind::kInvalidInput, "unknown target bus index " + std::to_string(b));
      }
      queried[b] = true;
      if (b != net.reference() && !g.contains_vertex(b)) inside = false;
    }
    for (BusIdx b : g.vertices) queried[b] = true;
    report.observable = inside && subnetwork_observable(c, g);
  }
  queried[net.reference()] = false;
  if (!report.observable) detail::fill_certificate(h, net, queried, report);
  return report;
}

// ---------------------------------------------------------------------------
// Basic measurement sets
// ---------------------------------------------------------------------------

struct BasicSet {
  std::vector<MeterIdx> meters;  // canonical order
};

// First-independent-row-wins scan over `order` (canonical meter order when
// empty). Requires G(meters) to be observable.
inline BasicSet find_basic_set(const Case& c, std::span<const MeterIdx> meters,
                               std::span<const MeterIdx> order = {}) {
  MeasuredSubgraph g = measured_subgraph(c, meters);
  std::vector<MeterIdx> scan = order.empty()
                                   ? g.meters
                                   : std::vector<MeterIdx>(order.begin(), order.end());
  // Rows in scan order; build_jacobian would sort them.
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(scan.size()),
                       static_cast<Eigen::Index>(c.network.state_count()));
  for (std::size_t i = 0; i < scan.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = meter_row(c.network, c.meters[scan[i]]);
  }
  std::size_t needed = g.vertices.empty() ? 0 : g.vertices.size() - 1;
  std::vector<Eigen::Index> kept = linalg::independent_rows(rows);
  if (!g.contains_vertex(c.network.reference()) || kept.size() != needed) {
    auto report = is_observable(c, meters, std::vector<BusIdx>{});
    nlohmann::json free = nlohmann::json::array();
    for (BusIdx b : report.unobservable_buses) free.push_back(c.network.bus_id(b));
    fail(ErrorKind::kUnobservable,
         "unobservable measured subnetwork: no basic measurement set",
         {{"unobservable_buses", free}});
  }
  BasicSet out;
  for (Eigen::Index r : kept) out.meters.push_back(scan[static_cast<std::size_t>(r)]);
  std::sort(out.meters.begin(), out.meters.end());
  return out;
}

// ---------------------------------------------------------------------------
// Edge-measured Steiner trees
// ---------------------------------------------------------------------------

struct Emst {
  std::vector<BusIdx> vertices;        // sorted
  std::vector<LineIdx> edges;          // sorted
  std::vector<MeterIdx> meter_of_edge; // parallel to `edges`

  std::vector<MeterIdx> meters() const {
    std::vector<MeterIdx> out = meter_of_edge;
    std::sort(out.begin(), out.end());
    return out;
  }
};

struct EmstValidation {
  bool valid = true;
  std::vector<std::string> violations;
};

struct EmstStats {
  std::size_t flow_attempts = 0;
  bool used_exchange_fallback = false;
};

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Local view of a subgraph used by the tree constructions.
struct TreeProblem {
  std::vector<BusIdx> vertices;               // local vertex -> bus
  std::vector<LineIdx> edges;                 // local edge -> line
  std::vector<std::pair<std::size_t, std::size_t>> ends;  // local endpoints
  std::vector<MeterIdx> meters;               // local meter -> meter
  std::vector<std::vector<std::size_t>> meters_of_edge;   // canonical order
  std::size_t root = 0;

  TreeProblem(const Case& c, const MeasuredSubgraph& g,
              std::span<const MeterIdx> basic) {
    const PowerNetwork& net = c.network;
    vertices = g.vertices;
    meters.assign(basic.begin(), basic.end());
    std::vector<std::size_t> local(net.bus_count(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < vertices.size(); ++i) local[vertices[i]] = i;
    root = local[net.reference()];
    for (LineIdx l : g.edges) {
      std::vector<std::size_t> who;
      for (std::size_t k = 0; k < meters.size(); ++k) {
        if (measures_line(net, c.meters[meters[k]], l)) who.push_back(k);
      }
      if (who.empty()) continue;
      edges.push_back(l);
      ends.emplace_back(local[net.line(l).from], local[net.line(l).to]);
      meters_of_edge.push_back(std::move(who));
    }
  }

  bool is_spanning_tree(const std::vector<std::size_t>& chosen) const {
    if (chosen.size() + 1 != vertices.size()) return false;
    UnionFind uf(vertices.size());
    for (std::size_t e : chosen) {
      if (!uf.unite(ends[e].first, ends[e].second)) return false;
    }
    return true;
  }
};

// Each non-root vertex is fed by exactly one edge (its parent edge), each
// edge by exactly one meter. `forced` is a root-incident edge that must be
// used. Returns chosen (edge, meter) pairs, or nullopt if not all vertices
// can be fed.
inline std::optional<std::vector<std::pair<std::size_t, std::size_t>>>
assign_parent_edges(const TreeProblem& p, std::size_t forced) {
  const std::size_t nm = p.meters.size(), ne = p.edges.size(),
                    nv = p.vertices.size();
  // Node layout: s, t, meters, edge-in, edge-out, vertices.
  const std::size_t s = 0, t = 1, meter0 = 2, ein0 = meter0 + nm,
                    eout0 = ein0 + ne, vert0 = eout0 + ne;
  FlowNetwork fn(vert0 + nv);
  std::vector<FlowNetwork::ArcId> src_arc(nm), through(ne), sink_arc(nv);
  std::vector<std::vector<std::pair<std::size_t, FlowNetwork::ArcId>>> meter_arcs(ne);
  std::vector<std::vector<std::pair<std::size_t, FlowNetwork::ArcId>>> vertex_arcs(ne);
  for (std::size_t k = 0; k < nm; ++k) src_arc[k] = fn.add_arc(s, meter0 + k, 1.0);
  // Meter -> edge arcs in canonical meter order, then edge order.
  std::vector<std::vector<std::size_t>> edges_of_meter(nm);
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t k : p.meters_of_edge[e]) edges_of_meter[k].push_back(e);
  }
  for (std::size_t k = 0; k < nm; ++k) {
    for (std::size_t e : edges_of_meter[k]) {
      meter_arcs[e].emplace_back(k, fn.add_arc(meter0 + k, ein0 + e, 1.0));
    }
  }
  for (std::size_t e = 0; e < ne; ++e) {
    through[e] = fn.add_arc(ein0 + e, eout0 + e, 1.0);
    for (std::size_t v : {p.ends[e].first, p.ends[e].second}) {
      if (v == p.root) continue;
      vertex_arcs[e].emplace_back(v, fn.add_arc(eout0 + e, vert0 + v, 1.0));
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (v != p.root) sink_arc[v] = fn.add_arc(vert0 + v, t, 1.0);
  }

  // Route one unit through the forced edge and pin it there.
  if (meter_arcs[forced].empty() || vertex_arcs[forced].empty()) return std::nullopt;
  const auto [k0, m_arc] = meter_arcs[forced].front();
  const auto [v0, v_arc] = vertex_arcs[forced].front();
  fn.push_path({src_arc[k0], m_arc, through[forced], v_arc, sink_arc[v0]}, 1.0);
  fn.lock(through[forced]);

  double value = 1.0 + fn.max_flow(s, t);
  if (value + 0.5 < static_cast<double>(nv - 1)) return std::nullopt;

  std::vector<std::pair<std::size_t, std::size_t>> chosen;
  for (std::size_t e = 0; e < ne; ++e) {
    if (fn.flow(through[e]) < 0.5) continue;
    for (const auto& [k, arc] : meter_arcs[e]) {
      if (fn.flow(arc) > 0.5) {
        chosen.emplace_back(e, k);
        break;
      }
    }
  }
  return chosen;
}

// Kuhn's augmenting-path bipartite matching of `edges` into meters.
// Returns the meter of each edge, or nullopt when some edge is unmatched.
inline std::optional<std::vector<std::size_t>> match_edges(
    const TreeProblem& p, const std::vector<std::size_t>& edges) {
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(p.meters.size(), none);  // meter -> slot
  std::vector<std::size_t> meter_of(edges.size(), none);
  for (std::size_t slot = 0; slot < edges.size(); ++slot) {
    std::vector<bool> visited(p.meters.size(), false);
    auto try_slot = [&](auto&& self, std::size_t i) -> bool {
      for (std::size_t k : p.meters_of_edge[edges[i]]) {
        if (visited[k]) continue;
        visited[k] = true;
        if (owner[k] == none || self(self, owner[k])) {
          owner[k] = i;
          meter_of[i] = k;
          return true;
        }
      }
      return false;
    };
    if (!try_slot(try_slot, slot)) return std::nullopt;
  }
  return meter_of;
}

inline bool is_forest(const TreeProblem& p, const std::vector<std::size_t>& edges) {
  UnionFind uf(p.vertices.size());
  for (std::size_t e : edges) {
    if (!uf.unite(p.ends[e].first, p.ends[e].second)) return false;
  }
  return true;
}

// Largest common independent set of the graphic matroid (forests) and the
// transversal matroid (edge sets matchable into the basic meters), grown by
// shortest augmenting paths in the exchange graph.
inline std::optional<std::vector<std::pair<std::size_t, std::size_t>>>
exchange_tree(const TreeProblem& p) {
  const std::size_t ne = p.edges.size();
  std::vector<bool> in(ne, false);
  auto members = [&](const std::vector<bool>& mask) {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < ne; ++e) {
      if (mask[e]) out.push_back(e);
    }
    return out;
  };
  auto with_swap = [&](std::size_t drop, std::size_t add) {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < ne; ++e) {
      if ((in[e] && e != drop) || e == add) out.push_back(e);
    }
    return out;
  };
  const std::size_t none = static_cast<std::size_t>(-1);
  while (true) {
    std::vector<bool> src(ne, false), dst(ne, false);
    bool added = false;
    for (std::size_t x = 0; x < ne && !added; ++x) {
      if (in[x]) continue;
      auto grown = with_swap(none, x);
      src[x] = is_forest(p, grown);
      dst[x] = match_edges(p, grown).has_value();
      if (src[x] && dst[x]) {
        in[x] = true;
        added = true;
      }
    }
    if (added) continue;
    // Exchange graph: y -> x when I - y + x is a forest, x -> y when it is
    // matchable (y in I, x outside I).
    std::vector<std::vector<std::size_t>> adj(ne);
    for (std::size_t y = 0; y < ne; ++y) {
      if (!in[y]) continue;
      for (std::size_t x = 0; x < ne; ++x) {
        if (in[x]) continue;
        auto swapped = with_swap(y, x);
        if (is_forest(p, swapped)) adj[y].push_back(x);
        if (match_edges(p, swapped)) adj[x].push_back(y);
      }
    }
    std::vector<std::size_t> pred(ne, none);
    std::vector<bool> seen(ne, false);
    std::queue<std::size_t> queue;
    for (std::size_t x = 0; x < ne; ++x) {
      if (src[x]) {
        seen[x] = true;
        queue.push(x);
      }
    }
    std::size_t end = none;
    while (!queue.empty() && end == none) {
      std::size_t u = queue.front();
      queue.pop();
      if (dst[u]) {
        end = u;
        break;
      }
      for (std::size_t v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          pred[v] = u;
          queue.push(v);
        }
      }
    }
    if (end == none) break;
    for (std::size_t v = end; v != none; v = pred[v]) in[v] = !in[v];
  }
  auto chosen = members(in);
  if (!p.is_spanning_tree(chosen)) return std::nullopt;
  auto matching = match_edges(p, chosen);
  if (!matching) return std::nullopt;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < chosen.size(); ++i) out.emplace_back(chosen[i], (*matching)[i]);
  return out;
}

inline Emst make_emst(const TreeProblem& p,
                      const std::vector<std::pair<std::size_t, std::size_t>>& chosen) {
  std::vector<std::pair<LineIdx, MeterIdx>> pairs;
  for (const auto& [e, k] : chosen) pairs.emplace_back(p.edges[e], p.meters[k]);
  std::sort(pairs.begin(), pairs.end());
  Emst out;
  out.vertices = p.vertices;
  for (const auto& [l, m] : pairs) {
    out.edges.push_back(l);
    out.meter_of_edge.push_back(m);
  }
  return out;
}

}  // namespace detail

// Max-flow matching: for each root-incident edge (canonical order) forced
// into the solution, feed every non-root vertex with a distinct parent edge
// carried by a distinct basic meter, and accept the first assignment whose
// edges form a spanning tree. If no forced edge yields a tree, the
// assignment is repaired by matroid exchange, which always succeeds on an
// observable subnetwork.
inline Emst construct_emst(const Case& c, const MeasuredSubgraph& g,
                           const BasicSet& basic, EmstStats* stats = nullptr) {
  const PowerNetwork& net = c.network;
  if (!g.contains_vertex(net.reference()) ||
      basic.meters.size() + 1 != g.vertices.size()) {
    fail(ErrorKind::kUnobservable,
         "EMST construction needs an observable subnetwork containing the "
         "reference bus and a matching basic set");
  }
  detail::TreeProblem p(c, g, basic.meters);
  for (std::size_t e = 0; e < p.edges.size(); ++e) {
    if (p.ends[e].first != p.root && p.ends[e].second != p.root) continue;
    if (stats) ++stats->flow_attempts;
    auto chosen = detail::assign_parent_edges(p, e);
    if (!chosen) continue;
    std::vector<std::size_t> edges;
    for (const auto& [edge, meter] : *chosen) edges.push_back(edge);
    if (p.is_spanning_tree(edges)) return detail::make_emst(p, *chosen);
  }
  if (stats) stats->used_exchange_fallback = true;
  auto chosen = detail::exchange_tree(p);
  if (!chosen) {
    fail(ErrorKind::kInternal,
         "EMST construction failed on a subnetwork reported observable");
  }
  return detail::make_emst(p, *chosen);
}

// Builds G(meters), its basic set and an EMST in one call.
inline Emst construct_emst(const Case& c, std::span<const MeterIdx> meters,
                           EmstStats* stats = nullptr) {
  MeasuredSubgraph g = measured_subgraph(c, meters);
  BasicSet basic = find_basic_set(c, meters);
  return construct_emst(c, g, basic, stats);
}

// Checks tree-ness and the three EMST conditions. When `meters` is
// non-empty, mapped meters must also belong to it.
inline EmstValidation validate_emst(const Case& c, std::span<const MeterIdx> meters,
                                    const Emst& t) {
  const PowerNetwork& net = c.network;
  EmstValidation out;
  auto violate = [&](std::string msg) {
    out.valid = false;
    out.violations.push_back(std::move(msg));
  };
  std::vector<bool> in_tree(net.bus_count(), false);
  for (BusIdx b : t.vertices) {
    if (b >= net.bus_count()) {
      violate("tree: unknown vertex index " + std::to_string(b));
      return out;
    }
    if (in_tree[b]) violate("tree: vertex " + std::to_string(net.bus_id(b)) + " listed twice");
    in_tree[b] = true;
  }
  if (!in_tree[net.reference()]) {
    violate("condition 1: reference bus " + std::to_string(net.bus_id(net.reference())) +
            " is not in the tree");
  }
  if (t.meter_of_edge.size() != t.edges.size()) {
    violate("condition 2: " + std::to_string(t.edges.size()) + " edges but " +
            std::to_string(t.meter_of_edge.size()) + " mapped meters");
  }
  if (t.edges.size() + 1 != t.vertices.size()) {
    violate("tree: " + std::to_string(t.edges.size()) + " edges for " +
            std::to_string(t.vertices.size()) + " vertices");
  }
  detail::UnionFind uf(net.bus_count());
  for (LineIdx l : t.edges) {
    if (l >= net.line_count()) {
      violate("tree: unknown edge index " + std::to_string(l));
      return out;
    }
    const Line& ln = net.line(l);
    if (!in_tree[ln.from] || !in_tree[ln.to]) {
      violate("tree: edge " + net.line_label(l) + " leaves the vertex set");
    } else if (!uf.unite(ln.from, ln.to)) {
      violate("tree: edge " + net.line_label(l) + " closes a cycle");
    }
  }
  std::vector<int> uses(c.meter_count(), 0);
  std::vector<bool> allowed(c.meter_count(), meters.empty());
  for (MeterIdx m : meters) allowed.at(m) = true;
  for (std::size_t i = 0; i < t.edges.size() && i < t.meter_of_edge.size(); ++i) {
    MeterIdx m = t.meter_of_edge[i];
    if (m >= c.meter_count()) {
      violate("condition 2: unknown meter index " + std::to_string(m));
      continue;
    }
    if (!allowed[m]) {
      violate("condition 2: meter " + c.meters[m].id + " is not in the meter set");
    }
    if (!measures_line(net, c.meters[m], t.edges[i])) {
      violate("condition 2: meter " + c.meters[m].id + " does not measure edge " +
              net.line_label(t.edges[i]));
    }
    if (++uses[m] == 2) {
      violate("condition 3: meter " + c.meters[m].id + " is mapped to several edges");
    }
  }
  for (std::size_t i = 0; i < t.meter_of_edge.size(); ++i) {
    for (std::size_t j = i + 1; j < t.meter_of_edge.size(); ++j) {
      const MeterIdx a = t.meter_of_edge[i], b = t.meter_of_edge[j];
      if (a != b && a < c.meter_count() && b < c.meter_count() &&
          same_measurement(c.meters[a], c.meters[b])) {
        violate("condition 3: meters " + c.meters[a].id + " and " + c.meters[b].id +
                " take the same measurement");
      }
    }
  }
  return out;
}

inline nlohmann::json to_json(const Case& c, const Emst& t) {
  const PowerNetwork& net = c.network;
  nlohmann::json out;
  out["vertices"] = nlohmann::json::array();
  for (BusIdx b : t.vertices) out["vertices"].push_back(net.bus_id(b));
  out["edges"] = nlohmann::json::array();
  out["mapping"] = nlohmann::json::object();
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    const Line& ln = net.line(t.edges[i]);
    nlohmann::json pair = {net.bus_id(ln.from), net.bus_id(ln.to)};
    out["edges"].push_back(pair);
    out["mapping"][c.meters[t.meter_of_edge[i]].id] = pair;
  }
  return out;
}

// Graphviz rendering: tree edges solid and labelled with their meter,
// remaining subgraph edges dashed, the reference bus double-circled.
inline std::string to_dot(const Case& c, const Emst& t,
                          const MeasuredSubgraph* context = nullptr) {
  const PowerNetwork& net = c.network;
  std::ostringstream dot;
  dot << "graph emst {\n  node [shape=circle];\n";
  std::vector<BusIdx> shown = t.vertices;
  if (context) {
    shown.insert(shown.end(), context->vertices.begin(), context->vertices.end());
    std::sort(shown.begin(), shown.end());
    shown.erase(std::unique(shown.begin(), shown.end()), shown.end());
  }
  for (BusIdx b : shown) {
    dot << "  v" << net.bus_id(b);
    if (b == net.reference()) dot << " [shape=doublecircle]";
    dot << ";\n";
  }
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    const Line& ln = net.line(t.edges[i]);
    dot << "  v" << net.bus_id(ln.from) << " -- v" << net.bus_id(ln.to)
        << " [label=\"" << c.meters[t.meter_of_edge[i]].id << "\", penwidth=2];\n";
  }
  if (context) {
    for (LineIdx l : context->edges) {
      if (std::binary_search(t.edges.begin(), t.edges.end(), l)) continue;
      const Line& ln = net.line(l);
      dot << "  v" << net.bus_id(ln.from) << " -- v" << net.bus_id(ln.to)
          << " [style=dashed];\n";
    }
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace gridseer
