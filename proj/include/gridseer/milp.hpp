#pragma once

// LP-based branch-and-bound for 0-1 programs with lazily separated cuts.
//
// Nodes are explored best bound first; among equal bounds the most recently
// created node wins, so the search dives and can reuse the parent's tableau
// instead of refactoring.

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridseer/lp.hpp"

namespace gridseer::milp {

enum class Status { kOptimal, kInfeasible, kTimeLimit };

struct Options {
  double time_limit_seconds = 60.0;
  // Objective values of feasible points are integers; bounds may be rounded up.
  bool integral_objective = false;
  int root_cut_rounds = 50;
  int node_cut_rounds = 2;
  // Receives one JSON object per trace event; unset disables tracing.
  std::function<void(const nlohmann::json&)> trace;
  bool trace_every_node = false;
};

struct Result {
  Status status = Status::kInfeasible;
  // Empty when no solution better than the cutoff was found.
  std::vector<double> solution;
  double objective = lp::kInf;
  double best_bound = -lp::kInf;
  long nodes = 0;
  long lp_iterations = 0;
  int cuts = 0;
  double seconds = 0.0;
};

// Returns rows violated by the given LP point; they must be valid for every
// integer feasible point.
using Separator = std::function<std::vector<lp::Row>(const std::vector<double>&)>;

class BranchAndBound {
 public:
  // `branch_groups` lists the binary variables in branching priority order:
  // a later group is only branched on once every earlier group is integral.
  BranchAndBound(lp::Model model, std::vector<std::vector<int>> branch_groups)
      : model_(std::move(model)), groups_(std::move(branch_groups)) {}

  void set_separator(Separator s) { separator_ = std::move(s); }

  // Objective of a known feasible point found elsewhere; only strictly
  // better solutions are reported.
  void set_cutoff(double value) { cutoff_ = value; }

  Result solve(const Options& opt) {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const auto deadline =
        start + std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(opt.time_limit_seconds));
    Result res;
    double upper = cutoff_.value_or(lp::kInf);
    auto pruned = [&](double bound) {
      if (!std::isfinite(upper)) return false;
      if (opt.integral_objective) return std::ceil(bound - 1e-6) >= upper - 1e-9;
      return bound >= upper - 1e-9;
    };
    auto emit = [&](nlohmann::json event) {
      if (!opt.trace) return;
      event["t"] = std::chrono::duration<double>(Clock::now() - start).count();
      opt.trace(event);
    };

    lp::Simplex lp(model_);
    std::vector<double> root_lo(model_.variable_count()), root_hi(model_.variable_count());
    for (std::size_t j = 0; j < root_lo.size(); ++j) {
      root_lo[j] = model_.lower(static_cast<int>(j));
      root_hi[j] = model_.upper(static_cast<int>(j));
    }

    auto cmp = [](const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) {
      if (a->bound != b->bound) return a->bound > b->bound;
      return a->id < b->id;
    };
    std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, decltype(cmp)>
        open(cmp);
    long next_id = 0;
    open.push(std::make_shared<Node>(Node{next_id++, -1, 0, -lp::kInf, {}, nullptr}));
    long last_solved = -1;
    bool timed_out = false;

    while (!open.empty()) {
      if (Clock::now() > deadline) {
        timed_out = true;
        break;
      }
      std::shared_ptr<Node> node = open.top();
      open.pop();
      if (pruned(node->bound)) continue;
      ++res.nodes;

      for (std::size_t j = 0; j < root_lo.size(); ++j) {
        lp.set_bounds(static_cast<int>(j), root_lo[j], root_hi[j]);
      }
      for (const Fix& f : node->fixes) lp.set_bounds(f.var, f.lower, f.upper);
      if (node->parent_basis && node->parent != last_solved) {
        if (!lp.load(*node->parent_basis)) lp.reset_to_slack_basis();
      }
      last_solved = node->id;

      lp::Status st = lp.solve(deadline);
      const int rounds = node->parent < 0 ? opt.root_cut_rounds : opt.node_cut_rounds;
      for (int round = 0; st == lp::Status::kOptimal && separator_ && round < rounds; ++round) {
        if (pruned(lp.objective())) break;
        std::vector<lp::Row> cuts = separator_(lp.primal());
        if (cuts.empty()) break;
        for (const lp::Row& row : cuts) lp.add_row(row);
        res.cuts += static_cast<int>(cuts.size());
        st = lp.solve(deadline);
      }
      if (st == lp::Status::kLimit) {
        open.push(node);
        timed_out = true;
        break;
      }
      if (st == lp::Status::kInfeasible) {
        if (opt.trace_every_node) emit({{"event", "node"}, {"id", node->id}, {"infeasible", true}});
        continue;
      }
      const double bound = lp.objective();
      const std::vector<double> x = lp.primal();
      if (opt.trace_every_node) {
        emit({{"event", "node"},
              {"id", node->id},
              {"depth", node->depth},
              {"bound", bound},
              {"incumbent", std::isfinite(upper) ? nlohmann::json(upper) : nlohmann::json()},
              {"open", open.size()}});
      } else if (res.nodes % 100 == 0) {
        emit({{"event", "progress"},
              {"nodes", res.nodes},
              {"bound", open.empty() ? bound : std::min(bound, open.top()->bound)},
              {"incumbent", std::isfinite(upper) ? nlohmann::json(upper) : nlohmann::json()}});
      }
      if (pruned(bound)) continue;

      int var = branching_variable(x);
      if (var < 0) {
        std::vector<double> sol = x;
        for (const auto& group : groups_) {
          for (int j : group) sol[j] = std::round(sol[j]);
        }
        double value = 0.0;
        for (std::size_t j = 0; j < sol.size(); ++j) value += model_.cost(static_cast<int>(j)) * sol[j];
        if (value < upper - 1e-9) {
          upper = value;
          res.solution = std::move(sol);
          res.objective = value;
          emit({{"event", "incumbent"}, {"node", node->id}, {"objective", value}});
        }
        continue;
      }
      auto basis = std::make_shared<lp::Basis>(lp.basis());
      for (int dir = 0; dir < 2; ++dir) {
        auto child = std::make_shared<Node>(*node);
        child->id = next_id++;
        child->parent = node->id;
        child->depth = node->depth + 1;
        child->bound = bound;
        child->parent_basis = basis;
        double v = std::floor(x[var]);
        child->fixes.push_back(dir == 0 ? Fix{var, root_lo[var], v} : Fix{var, v + 1.0, root_hi[var]});
        open.push(child);
      }
    }

    res.lp_iterations = lp.iterations();
    res.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (timed_out) {
      res.status = Status::kTimeLimit;
      double lb = upper;
      while (!open.empty()) {
        lb = std::min(lb, open.top()->bound);
        open.pop();
      }
      res.best_bound = lb;
    } else {
      res.status = std::isfinite(upper) ? Status::kOptimal : Status::kInfeasible;
      res.best_bound = upper;
    }
    emit({{"event", "done"},
          {"status", res.status == Status::kOptimal      ? "optimal"
                     : res.status == Status::kTimeLimit ? "time_limit"
                                                        : "infeasible"},
          {"nodes", res.nodes},
          {"cuts", res.cuts},
          {"lp_iterations", res.lp_iterations},
          {"objective", std::isfinite(upper) ? nlohmann::json(upper) : nlohmann::json()},
          {"best_bound", std::isfinite(res.best_bound) ? nlohmann::json(res.best_bound)
                                                        : nlohmann::json()}});
    return res;
  }

 private:
  struct Fix {
    int var;
    double lower, upper;
  };
  struct Node {
    long id;
    long parent;
    int depth;
    double bound;
    std::vector<Fix> fixes;
    std::shared_ptr<lp::Basis> parent_basis;
  };

  // Fractional variable closest to 0.5 in the first group that has one;
  // lowest index on ties.
  int branching_variable(const std::vector<double>& x) const {
    for (const auto& group : groups_) {
      int best = -1;
      double best_dist = 1.0;
      for (int j : group) {
        const double frac = x[j] - std::floor(x[j]);
        if (frac < 1e-6 || frac > 1.0 - 1e-6) continue;
        const double dist = std::abs(frac - 0.5);
        if (dist < best_dist - 1e-12 || (std::abs(dist - best_dist) <= 1e-12 && j < best)) {
          best_dist = dist;
          best = j;
        }
      }
      if (best >= 0) return best;
    }
    return -1;
  }

  lp::Model model_;
  std::vector<std::vector<int>> groups_;
  Separator separator_;
  std::optional<double> cutoff_;
};

}  // namespace gridseer::milp
