#pragma once

// Augmenting-path (Edmonds-Karp) maximum flow with lower-bounded arcs and
// minimum-cut extraction. Arcs are explored in insertion order, so results
// are deterministic for a deterministic construction order.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "gridseer/core.hpp"

namespace gridseer {

class FlowNetwork {
 public:
  using ArcId = std::size_t;

  explicit FlowNetwork(std::size_t nodes) : out_(nodes) {}

  std::size_t node_count() const { return out_.size(); }

  std::size_t add_node() {
    out_.emplace_back();
    return out_.size() - 1;
  }

  // Adds arc from -> to and its residual twin. Returns the forward arc id.
  ArcId add_arc(std::size_t from, std::size_t to, double capacity) {
    ArcId id = arcs_.size();
    arcs_.push_back({from, to, capacity, 0.0, 0.0});
    arcs_.push_back({to, from, 0.0, 0.0, 0.0});
    out_[from].push_back(id);
    out_[to].push_back(id + 1);
    return id;
  }

  // Routes `amount` along a path of forward arcs without capacity checks.
  void push_path(const std::vector<ArcId>& path, double amount) {
    for (ArcId a : path) push(a, amount);
  }

  // Turns the current flow on `a` into a lower bound: later augmentations may
  // not cancel it.
  void lock(ArcId a) { arcs_[a].lower = arcs_[a].flow; }

  double flow(ArcId a) const { return arcs_[a].flow; }
  double capacity(ArcId a) const { return arcs_[a].capacity; }
  std::size_t tail(ArcId a) const { return arcs_[a].from; }
  std::size_t head(ArcId a) const { return arcs_[a].to; }

  // Increases the s-t flow to a maximum. Returns the value gained, or
  // +infinity if an augmenting path of unbounded capacity exists.
  double max_flow(std::size_t s, std::size_t t) {
    double total = 0.0;
    std::vector<ArcId> pred(out_.size());
    while (true) {
      std::vector<bool> seen(out_.size(), false);
      std::queue<std::size_t> queue;
      queue.push(s);
      seen[s] = true;
      while (!queue.empty() && !seen[t]) {
        std::size_t u = queue.front();
        queue.pop();
        for (ArcId a : out_[u]) {
          std::size_t v = arcs_[a].to;
          if (!seen[v] && residual(a) > kEps) {
            seen[v] = true;
            pred[v] = a;
            queue.push(v);
          }
        }
      }
      if (!seen[t]) break;
      double bottleneck = kInfinity;
      for (std::size_t v = t; v != s; v = arcs_[pred[v]].from) {
        bottleneck = std::min(bottleneck, residual(pred[v]));
      }
      if (bottleneck == kInfinity) return kInfinity;
      for (std::size_t v = t; v != s; v = arcs_[pred[v]].from) {
        push(pred[v], bottleneck);
      }
      total += bottleneck;
    }
    return total;
  }

  // Nodes reachable from s in the residual graph. After max_flow() these form
  // the source side of the minimum cut closest to s.
  std::vector<bool> reachable_from(std::size_t s) const {
    std::vector<bool> seen(out_.size(), false);
    std::queue<std::size_t> queue;
    queue.push(s);
    seen[s] = true;
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop();
      for (ArcId a : out_[u]) {
        if (!seen[arcs_[a].to] && residual(a) > kEps) {
          seen[arcs_[a].to] = true;
          queue.push(arcs_[a].to);
        }
      }
    }
    return seen;
  }

  // Arcs of infinite residual capacity form the only paths that can make a
  // flow unbounded; returns one such s-t path if it exists.
  std::vector<ArcId> unbounded_path(std::size_t s, std::size_t t) const {
    std::vector<bool> seen(out_.size(), false);
    std::vector<ArcId> pred(out_.size());
    std::queue<std::size_t> queue;
    queue.push(s);
    seen[s] = true;
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop();
      for (ArcId a : out_[u]) {
        std::size_t v = arcs_[a].to;
        if (!seen[v] && residual(a) == kInfinity) {
          seen[v] = true;
          pred[v] = a;
          queue.push(v);
        }
      }
    }
    std::vector<ArcId> path;
    if (!seen[t]) return path;
    for (std::size_t v = t; v != s; v = arcs_[pred[v]].from) path.push_back(pred[v]);
    std::reverse(path.begin(), path.end());
    return path;
  }

 private:
  static constexpr double kEps = 1e-12;

  struct Arc {
    std::size_t from, to;
    double capacity;
    double flow;
    double lower;
  };

  // Twin arcs are stored at ids (2k, 2k+1).
  double residual(ArcId a) const {
    const Arc& arc = arcs_[a];
    if (a % 2 == 0) return arc.capacity - arc.flow;
    const Arc& fwd = arcs_[a - 1];
    return fwd.flow - fwd.lower;
  }

  void push(ArcId a, double amount) {
    if (a % 2 == 0) {
      arcs_[a].flow += amount;
    } else {
      arcs_[a - 1].flow -= amount;
    }
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcId>> out_;
};

}  // namespace gridseer
