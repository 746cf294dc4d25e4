#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "gridseer/observability.hpp"
#include "oracles.hpp"

using namespace gridseer;

namespace {

bool has_violation(const EmstValidation& v, const std::string& prefix) {
  for (const auto& msg : v.violations) {
    if (msg.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

}  // namespace

TEST(Observability, FullMeterSetObservable) {
  Case c = fixtures::load("ieee14.json");
  auto all = c.all_meters();
  EXPECT_TRUE(is_observable(c, all).observable);
  EXPECT_TRUE(subnetwork_observable(c, all));
}

TEST(Observability, RadialBusWithoutMeterIsCertified) {
  Case c = parse_native(fixtures::kThreeBus);
  auto all = c.all_meters();
  ObservabilityReport r = is_observable(c, all);
  EXPECT_FALSE(r.observable);
  EXPECT_EQ(r.unobservable_buses, std::vector<BusIdx>{fixtures::bus(c, 3)});
  JacobianMatrix h = build_jacobian(c);
  ASSERT_EQ(r.certificate.size(), 2);
  EXPECT_LE((h.values * r.certificate).norm(), 1e-9);
  // The measured subnetwork {1,2} is observable on its own.
  EXPECT_TRUE(subnetwork_observable(c, all));
  EXPECT_TRUE(is_observable(c, all, std::vector<BusIdx>{fixtures::bus(c, 2)}).observable);
  EXPECT_FALSE(is_observable(c, all, std::vector<BusIdx>{fixtures::bus(c, 3)}).observable);
}

TEST(Observability, SubnetworkModeMatchesOracle) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 150; ++k) {
    Case c = oracle::random_case(rng, {6, 3, 4, 3, 1});
    std::vector<MeterIdx> subset;
    for (MeterIdx p = 0; p < c.meter_count(); ++p) {
      if (rng() % 2) subset.push_back(p);
    }
    EXPECT_EQ(subnetwork_observable(c, subset), oracle::subnetwork_observable(c, subset));
    const bool full = oracle::rank(oracle::jacobian(c, subset)) ==
                      static_cast<int>(c.network.state_count());
    EXPECT_EQ(is_observable(c, subset).observable, full);
  }
}

TEST(Observability, BasicSetHasOneMeterPerNonReferenceVertex) {
  Case c = fixtures::load("subnet14.json");
  auto all = c.all_meters();
  BasicSet basic = find_basic_set(c, all);
  EXPECT_EQ(basic.meters.size(), 4u);
  EXPECT_EQ(oracle::rank(oracle::jacobian(c, basic.meters)), 4);
  EXPECT_THROW(find_basic_set(c, fixtures::ids(c, {"r5"})), Error);
}

TEST(Emst, FiveMeterGolden) {
  Case c = fixtures::load("subnet14.json");
  auto all = c.all_meters();
  Emst t = construct_emst(c, all);
  nlohmann::json j = to_json(c, t);
  EXPECT_EQ(j["mapping"], nlohmann::json::parse(
                              R"({"r1": [1, 2], "r2": [1, 5], "r4": [4, 5], "r5": [5, 6]})"));
  EXPECT_TRUE(validate_emst(c, all, t).valid);
  EXPECT_EQ(to_dot(c, t).rfind("graph", 0), 0u);
}

TEST(Emst, UnobservableMetersFail) {
  Case c = fixtures::load("subnet14.json");
  try {
    construct_emst(c, fixtures::ids(c, {"r5"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnobservable);
    EXPECT_EQ(e.detail()["unobservable_buses"], nlohmann::json({5, 6}));
  }
}

TEST(Emst, LargeFixturesSpan) {
  for (const char* name : {"ieee14.json", "ieee57.json", "ieee118.json"}) {
    Case c = fixtures::load(name);
    auto all = c.all_meters();
    Emst t = construct_emst(c, all);
    EXPECT_EQ(t.edges.size() + 1, c.network.bus_count()) << name;
    EmstValidation v = validate_emst(c, all, t);
    EXPECT_TRUE(v.valid) << name << ": " << (v.violations.empty() ? "" : v.violations[0]);
  }
}

TEST(Emst, Deterministic) {
  Case c = fixtures::load("ieee57.json");
  auto all = c.all_meters();
  EXPECT_EQ(to_json(c, construct_emst(c, all)), to_json(c, construct_emst(c, all)));
}

TEST(Emst, ExistsIffObservable) {
  std::mt19937_64 rng(101);
  for (int k = 0; k < 150; ++k) {
    Case c = oracle::random_case(rng, {6, 3, 4, 3, 1});
    std::vector<MeterIdx> subset;
    for (MeterIdx p = 0; p < c.meter_count(); ++p) {
      if (rng() % 3) subset.push_back(p);
    }
    const bool observable = subnetwork_observable(c, subset);
    EXPECT_EQ(observable, oracle::emst_exists(c, subset));
    if (!observable) continue;
    Emst t = construct_emst(c, subset);
    EXPECT_TRUE(validate_emst(c, subset, t).valid);
  }
}

TEST(Emst, ValidationReportsEachCondition) {
  Case c = fixtures::load("subnet14.json");
  auto all = c.all_meters();
  const Emst good = construct_emst(c, all);

  Emst no_ref = good;
  no_ref.vertices.erase(no_ref.vertices.begin());
  EXPECT_TRUE(has_violation(validate_emst(c, all, no_ref), "condition 1"));

  Emst wrong_meter = good;
  wrong_meter.meter_of_edge[0] = c.require_meter("r5");
  EmstValidation v = validate_emst(c, all, wrong_meter);
  EXPECT_TRUE(has_violation(v, "condition 2"));
  EXPECT_TRUE(has_violation(v, "condition 3"));

  Emst outside = good;
  EXPECT_TRUE(has_violation(validate_emst(c, fixtures::ids(c, {"r1"}), outside), "condition 2"));
}

TEST(Emst, DuplicateMetersCountOnce) {
  // Two meters on the same line take one measurement: bus 3 stays free.
  Case c = parse_native(R"({
    "buses": [{"id": 1}, {"id": 2}, {"id": 3}],
    "lines": [{"from": 1, "to": 2, "x": 0.5}, {"from": 2, "to": 3, "x": 0.5}],
    "meters": [{"id": "a", "kind": "flow", "line": [1, 2]},
               {"id": "b", "kind": "flow", "line": [2, 1]},
               {"id": "c", "kind": "injection", "bus": 2}]
  })");
  auto ab = fixtures::ids(c, {"a", "b"});
  EXPECT_TRUE(subnetwork_observable(c, ab));
  Emst t;
  t.vertices = {0, 1, 2};
  t.edges = {fixtures::line(c, 1, 2), fixtures::line(c, 2, 3)};
  t.meter_of_edge = {c.require_meter("a"), c.require_meter("c")};
  auto all = c.all_meters();
  EXPECT_TRUE(validate_emst(c, all, t).valid);
  t.meter_of_edge = {c.require_meter("a"), c.require_meter("b")};
  EXPECT_TRUE(has_violation(validate_emst(c, all, t), "condition 3: meters a and b"));
  EXPECT_TRUE(oracle::emst_exists(c, all));
  EXPECT_FALSE(is_observable(c, ab).observable);
}
