#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "gridseer/attack.hpp"
#include "oracles.hpp"

using namespace gridseer;

namespace {

AttackTarget on(const Case& c, std::initializer_list<int> ids) {
  AttackTarget t;
  for (int id : ids) t.buses.push_back(fixtures::bus(c, id));
  return t;
}

}  // namespace

TEST(Attack, SingleBusGolden) {
  Case c = fixtures::load("ieee14.json");
  auto all = c.all_meters();
  AttackPlan plan = min_cut_attack(c, all, on(c, {8}));
  EXPECT_EQ(plan.cut_edges, std::vector<LineIdx>{fixtures::line(c, 7, 8)});
  EXPECT_EQ(plan.compromised_meters, fixtures::ids(c, {"r9", "r10"}));
  EXPECT_DOUBLE_EQ(plan.cost, 2.0);
  EXPECT_DOUBLE_EQ(plan.max_flow, plan.cost);
  EXPECT_EQ(plan.biased_buses, std::vector<BusIdx>{fixtures::bus(c, 8)});
  JacobianMatrix h = build_jacobian(c);
  EXPECT_TRUE(verify_undetectable(h, plan.vector));
  EXPECT_EQ(plan.vector.support, plan.compromised_meters);
}

TEST(Attack, MultipleTargetsUseVirtualTerminal) {
  Case c = fixtures::load("ieee14.json");
  auto all = c.all_meters();
  AttackTarget t = on(c, {10, 12});
  EXPECT_TRUE(build_cut_graph(c, all, t).virtual_terminal);
  AttackPlan plan = min_cut_attack(c, all, t);
  for (BusIdx b : t.buses) {
    EXPECT_TRUE(std::binary_search(plan.biased_buses.begin(), plan.biased_buses.end(), b));
  }
  std::vector<bool> secured(c.meter_count(), false);
  EXPECT_NEAR(plan.cost, oracle::min_separating_cut(c, oracle::cut_weights(c, all, secured), t.buses),
              1e-9);
}

TEST(Attack, SecuredMetersYieldBarrier) {
  Case c = parse_native(R"({
    "buses": [{"id": 1}, {"id": 2}, {"id": 3}],
    "lines": [{"from": 1, "to": 2, "x": 0.5}, {"from": 2, "to": 3, "x": 0.5}],
    "meters": [{"id": "a", "kind": "flow", "line": [1, 2], "secured": true},
               {"id": "b", "kind": "flow", "line": [2, 3]}]
  })");
  auto all = c.all_meters();
  try {
    min_cut_attack(c, all, on(c, {2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
    EXPECT_EQ(e.detail()["barrier"], nlohmann::json::parse("[[1, 2]]"));
  }
  // Bus 3 can still be shifted alone.
  AttackPlan plan = min_cut_attack(c, all, on(c, {3}));
  EXPECT_EQ(plan.compromised_meters, fixtures::ids(c, {"b"}));
}

TEST(Attack, UnknownMeasuredLinesCannotBeCut) {
  Case c = fixtures::load("ieee14.json");
  auto all = c.all_meters();
  AttackTarget t = on(c, {8});
  t.unknown_lines = {fixtures::line(c, 7, 8)};
  AttackPlan plan = min_cut_attack(c, all, t);
  EXPECT_GT(plan.cost, 2.0);
  for (LineIdx l : plan.cut_edges) EXPECT_NE(l, fixtures::line(c, 7, 8));
  EXPECT_TRUE(verify_undetectable(build_jacobian(c), plan.vector));
}

TEST(Attack, CostMatchesEnumeratedCut) {
  std::mt19937_64 rng(19);
  for (int k = 0; k < 60; ++k) {
    Case c = oracle::random_case(rng, {8, 4, 8, 4, 3});
    auto all = c.all_meters();
    std::vector<bool> secured(c.meter_count(), false);
    for (MeterIdx p = 0; p < c.meter_count(); ++p) secured[p] = rng() % 5 == 0;
    AttackTarget t;
    t.buses = {static_cast<BusIdx>(1 + rng() % (c.network.bus_count() - 1))};
    if (t.buses[0] == c.network.reference()) continue;
    for (MeterIdx p = 0; p < c.meter_count(); ++p) {
      if (secured[p]) t.secured.push_back(p);
    }
    const double want = oracle::min_separating_cut(c, oracle::cut_weights(c, all, secured), t.buses);
    if (want == oracle::kInf) {
      EXPECT_THROW(min_cut_attack(c, all, t), Error);
      continue;
    }
    AttackPlan plan = min_cut_attack(c, all, t);
    EXPECT_NEAR(plan.cost, want, 1e-9);
    EXPECT_TRUE(verify_undetectable(build_jacobian(c), plan.vector));
    for (MeterIdx p : plan.compromised_meters) EXPECT_FALSE(secured[p]);
  }
}

TEST(Attack, RejectsReferenceAndEmptyTargets) {
  Case c = fixtures::load("ieee14.json");
  auto all = c.all_meters();
  EXPECT_THROW(min_cut_attack(c, all, AttackTarget{}), Error);
  EXPECT_THROW(min_cut_attack(c, all, on(c, {1})), Error);
}
