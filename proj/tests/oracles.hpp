#pragma once

// Test-only reference implementations. They share data types with the
// library but none of its algorithms: elimination instead of QR/SVD,
// enumeration instead of flows and branch-and-bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridseer/grid_model.hpp"

namespace oracle {

using gridseer::BusIdx;
using gridseer::Case;
using gridseer::LineIdx;
using gridseer::MeterIdx;
using gridseer::MeterKind;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-echelon elimination with partial pivoting.
inline int rank(Eigen::MatrixXd a, double tol = 1e-9) {
  int r = 0;
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(a.cols());
  for (int col = 0; col < cols && r < rows; ++col) {
    int pivot = r;
    for (int i = r + 1; i < rows; ++i) {
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    }
    if (std::abs(a(pivot, col)) <= tol) continue;
    a.row(r).swap(a.row(pivot));
    for (int i = r + 1; i < rows; ++i) {
      const double f = a(i, col) / a(r, col);
      a.row(i) -= f * a.row(r);
    }
    ++r;
  }
  return r;
}

// Basis of {c : A c = 0} from the reduced row echelon form.
inline Eigen::MatrixXd null_space(Eigen::MatrixXd a, double tol = 1e-9) {
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(a.cols());
  std::vector<int> pivot_col;
  int r = 0;
  for (int col = 0; col < cols && r < rows; ++col) {
    int pivot = r;
    for (int i = r + 1; i < rows; ++i) {
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    }
    if (std::abs(a(pivot, col)) <= tol) continue;
    a.row(r).swap(a.row(pivot));
    a.row(r) /= a(r, col);
    for (int i = 0; i < rows; ++i) {
      if (i != r) a.row(i) -= a(i, col) * a.row(r);
    }
    pivot_col.push_back(col);
    ++r;
  }
  std::vector<bool> is_pivot(static_cast<std::size_t>(cols), false);
  for (int c : pivot_col) is_pivot[static_cast<std::size_t>(c)] = true;
  std::vector<Eigen::VectorXd> basis;
  for (int free = 0; free < cols; ++free) {
    if (is_pivot[static_cast<std::size_t>(free)]) continue;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(cols);
    v(free) = 1.0;
    for (std::size_t k = 0; k < pivot_col.size(); ++k) {
      v(pivot_col[k]) = -a(static_cast<Eigen::Index>(k), free);
    }
    basis.push_back(v);
  }
  Eigen::MatrixXd out(cols, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = basis[k];
  return out;
}

// Jacobian written out from the DC model directly: one column per bus
// (reference included), one row per meter.
inline Eigen::MatrixXd full_jacobian(const Case& c, const std::vector<MeterIdx>& meters) {
  const auto& net = c.network;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(meters.size()),
                                            static_cast<Eigen::Index>(net.bus_count()));
  auto add_flow = [&](Eigen::Index row, LineIdx l, BusIdx from) {
    const auto& ln = net.line(l);
    const BusIdx to = ln.from == from ? ln.to : ln.from;
    h(row, static_cast<Eigen::Index>(from)) += 1.0 / ln.reactance;
    h(row, static_cast<Eigen::Index>(to)) -= 1.0 / ln.reactance;
  };
  for (std::size_t i = 0; i < meters.size(); ++i) {
    const auto& m = c.meters[meters[i]];
    const auto row = static_cast<Eigen::Index>(i);
    if (m.kind == MeterKind::kFlow) {
      add_flow(row, m.location, net.line(m.location).from);
    } else {
      for (LineIdx l = 0; l < net.line_count(); ++l) {
        const auto& ln = net.line(l);
        if (ln.from == m.location || ln.to == m.location) add_flow(row, l, m.location);
      }
    }
  }
  return h;
}

// Jacobian with the reference column removed.
inline Eigen::MatrixXd jacobian(const Case& c, const std::vector<MeterIdx>& meters) {
  Eigen::MatrixXd full = full_jacobian(c, meters);
  const auto ref = static_cast<Eigen::Index>(c.network.reference());
  Eigen::MatrixXd out(full.rows(), full.cols() - 1);
  for (Eigen::Index j = 0, k = 0; j < full.cols(); ++j) {
    if (j != ref) out.col(k++) = full.col(j);
  }
  return out;
}

inline bool meter_touches_line(const Case& c, MeterIdx p, LineIdx l) {
  const auto& m = c.meters[p];
  const auto& ln = c.network.line(l);
  if (m.kind == MeterKind::kFlow) return m.location == l;
  return ln.from == m.location || ln.to == m.location;
}

// Buses measured by a meter set: line endpoints for flow meters, the bus and
// all neighbours for injection meters.
inline std::vector<bool> measured_vertices(const Case& c, const std::vector<MeterIdx>& meters) {
  std::vector<bool> in(c.network.bus_count(), false);
  for (MeterIdx p : meters) {
    for (LineIdx l = 0; l < c.network.line_count(); ++l) {
      if (meter_touches_line(c, p, l)) {
        in[c.network.line(l).from] = true;
        in[c.network.line(l).to] = true;
      }
    }
  }
  return in;
}

// Observability of the measured subnetwork by elimination on the columns of
// its non-reference vertices. The reference must be measured.
inline bool subnetwork_observable(const Case& c, const std::vector<MeterIdx>& meters) {
  std::vector<bool> in = measured_vertices(c, meters);
  const BusIdx ref = c.network.reference();
  if (!in[ref]) return false;
  Eigen::MatrixXd full = full_jacobian(c, meters);
  std::vector<Eigen::Index> cols;
  for (BusIdx b = 0; b < in.size(); ++b) {
    if (in[b] && b != ref) cols.push_back(static_cast<Eigen::Index>(b));
  }
  Eigen::MatrixXd sub(full.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = full.col(cols[k]);
  return rank(sub) == static_cast<int>(cols.size());
}

// Does a set of edges admit an injective assignment of meters measuring them?
// Exhaustive augmenting search over the small bipartite graph.
inline bool edges_matchable(const Case& c, const std::vector<LineIdx>& edges,
                            const std::vector<MeterIdx>& all_meters) {
  // Meters repeating an earlier meter's kind and location add nothing.
  std::vector<MeterIdx> meters;
  for (MeterIdx p : all_meters) {
    bool repeat = false;
    for (MeterIdx q : meters) {
      repeat = repeat || (c.meters[p].kind == c.meters[q].kind &&
                          c.meters[p].location == c.meters[q].location);
    }
    if (!repeat) meters.push_back(p);
  }
  std::vector<int> owner(meters.size(), -1);
  std::function<bool(std::size_t, std::vector<bool>&)> place = [&](std::size_t e,
                                                                   std::vector<bool>& seen) {
    for (std::size_t k = 0; k < meters.size(); ++k) {
      if (seen[k] || !meter_touches_line(c, meters[k], edges[e])) continue;
      seen[k] = true;
      if (owner[k] < 0 || place(static_cast<std::size_t>(owner[k]), seen)) {
        owner[k] = static_cast<int>(e);
        return true;
      }
    }
    return false;
  };
  for (std::size_t e = 0; e < edges.size(); ++e) {
    std::vector<bool> seen(meters.size(), false);
    if (!place(e, seen)) return false;
  }
  return true;
}

// Enumerates every (|V|-1)-subset of the measured lines inside the measured
// vertex set and accepts the first spanning tree of it that contains the
// reference and has an injective meter mapping.
inline bool emst_exists(const Case& c, const std::vector<MeterIdx>& meters) {
  const auto& net = c.network;
  std::vector<bool> in = measured_vertices(c, meters);
  if (!in[net.reference()]) return false;
  std::vector<LineIdx> candidates;
  for (LineIdx l = 0; l < net.line_count(); ++l) {
    bool measured = false;
    for (MeterIdx p : meters) measured = measured || meter_touches_line(c, p, l);
    if (measured) candidates.push_back(l);
  }
  const auto nv = static_cast<std::size_t>(std::count(in.begin(), in.end(), true));
  const std::size_t need = nv - 1;
  if (candidates.size() < need) return false;
  std::vector<LineIdx> pick;
  std::function<bool(std::size_t)> search = [&](std::size_t start) -> bool {
    if (pick.size() == need) {
      std::vector<std::size_t> parent(net.bus_count());
      for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
      std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
      };
      for (LineIdx l : pick) {
        auto a = find(net.line(l).from), b = find(net.line(l).to);
        if (a == b) return false;
        parent[a] = b;
      }
      return edges_matchable(c, pick, meters);
    }
    for (std::size_t k = start; k < candidates.size(); ++k) {
      if (candidates.size() - k < need - pick.size()) break;
      pick.push_back(candidates[k]);
      if (search(k + 1)) return true;
      pick.pop_back();
    }
    return false;
  };
  return search(0);
}

// Cheapest meter subset whose measured subnetwork contains the reference and
// every target and is observable, by enumeration over all subsets.
struct ProtectionOptimum {
  bool feasible = false;
  double cost = kInf;
  std::vector<MeterIdx> meters;
};

inline ProtectionOptimum cheapest_protection(const Case& c, const std::vector<MeterIdx>& meters,
                                             const std::vector<BusIdx>& targets) {
  const std::size_t m = meters.size();
  ProtectionOptimum best;
  std::vector<std::uint32_t> covers(m, 0);
  for (std::size_t k = 0; k < m; ++k) {
    auto in = measured_vertices(c, {meters[k]});
    for (BusIdx b = 0; b < in.size(); ++b) {
      if (in[b]) covers[k] |= 1u << b;
    }
  }
  std::uint32_t needed = 1u << c.network.reference();
  for (BusIdx b : targets) needed |= 1u << b;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    double cost = 0.0;
    std::uint32_t covered = 0;
    std::vector<MeterIdx> chosen;
    for (std::size_t k = 0; k < m; ++k) {
      if (mask & (1u << k)) {
        cost += c.meters[meters[k]].cost;
        covered |= covers[k];
        chosen.push_back(meters[k]);
      }
    }
    if ((covered & needed) != needed || cost >= best.cost - 1e-12) continue;
    if (!subnetwork_observable(c, chosen)) continue;
    best = {true, cost, chosen};
  }
  return best;
}

// Line weights of the attack model written out directly.
inline std::vector<double> cut_weights(const Case& c, const std::vector<MeterIdx>& meters,
                                       const std::vector<bool>& secured) {
  std::vector<double> w(c.network.line_count(), 0.0);
  for (MeterIdx p : meters) {
    for (LineIdx l = 0; l < c.network.line_count(); ++l) {
      if (!meter_touches_line(c, p, l)) continue;
      w[l] = secured[p] ? kInf : w[l] + c.meters[p].cost;
    }
  }
  return w;
}

// Minimum total weight of lines crossing a bipartition with the reference
// on one side and every target on the other.
inline double min_separating_cut(const Case& c, const std::vector<double>& weight,
                                 const std::vector<BusIdx>& targets) {
  const auto& net = c.network;
  std::vector<BusIdx> free;
  for (BusIdx b = 0; b < net.bus_count(); ++b) {
    if (b != net.reference() &&
        std::find(targets.begin(), targets.end(), b) == targets.end()) {
      free.push_back(b);
    }
  }
  double best = kInf;
  for (std::uint32_t mask = 0; mask < (1u << free.size()); ++mask) {
    std::vector<bool> source_side(net.bus_count(), false);
    source_side[net.reference()] = true;
    for (std::size_t k = 0; k < free.size(); ++k) {
      if (mask & (1u << k)) source_side[free[k]] = true;
    }
    double cost = 0.0;
    for (LineIdx l = 0; l < net.line_count(); ++l) {
      if (source_side[net.line(l).from] != source_side[net.line(l).to]) cost += weight[l];
    }
    best = std::min(best, cost);
  }
  return best;
}

// Random connected network: a random spanning tree plus `extra` chords,
// reference bus 1, meters placed uniformly with integer costs.
struct RandomCaseSpec {
  int buses = 6;
  int extra_lines = 2;
  int flow_meters = 4;
  int injection_meters = 2;
  int max_cost = 1;
};

inline Case random_case(std::mt19937_64& rng, const RandomCaseSpec& spec) {
  gridseer::RawCase raw;
  for (int b = 1; b <= spec.buses; ++b) raw.buses.push_back({b, b == 1});
  std::uniform_real_distribution<double> x(0.05, 0.5);
  std::vector<std::pair<int, int>> lines;
  auto has = [&](int a, int b) {
    return std::find(lines.begin(), lines.end(), std::pair(std::min(a, b), std::max(a, b))) !=
           lines.end();
  };
  for (int b = 2; b <= spec.buses; ++b) {
    int parent = std::uniform_int_distribution<int>(1, b - 1)(rng);
    lines.emplace_back(parent, b);
  }
  const int max_lines = spec.buses * (spec.buses - 1) / 2;
  for (int k = 0; k < spec.extra_lines && static_cast<int>(lines.size()) < max_lines;) {
    int a = std::uniform_int_distribution<int>(1, spec.buses)(rng);
    int b = std::uniform_int_distribution<int>(1, spec.buses)(rng);
    if (a == b || has(a, b)) continue;
    lines.emplace_back(std::min(a, b), std::max(a, b));
    ++k;
  }
  for (auto [a, b] : lines) raw.lines.push_back({a, b, x(rng)});
  std::uniform_int_distribution<int> cost(1, spec.max_cost);
  int id = 0;
  for (int k = 0; k < spec.flow_meters; ++k) {
    auto [a, b] = lines[std::uniform_int_distribution<std::size_t>(0, lines.size() - 1)(rng)];
    gridseer::RawMeter m;
    m.id = "r" + std::to_string(++id);
    m.kind = "flow";
    m.from = a;
    m.to = b;
    m.cost = cost(rng);
    raw.meters.push_back(m);
  }
  for (int k = 0; k < spec.injection_meters; ++k) {
    gridseer::RawMeter m;
    m.id = "r" + std::to_string(++id);
    m.kind = "injection";
    m.bus = std::uniform_int_distribution<int>(1, spec.buses)(rng);
    m.cost = cost(rng);
    raw.meters.push_back(m);
  }
  return gridseer::build_case(raw);
}

}  // namespace oracle
