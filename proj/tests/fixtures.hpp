#pragma once

#include <string>

#include "gridseer/grid_model.hpp"

namespace fixtures {

inline std::string path(const std::string& name) {
  return std::string(GRIDSEER_DATA_DIR) + "/" + name;
}

inline gridseer::Case load(const std::string& name) { return gridseer::load_case(path(name)); }

inline gridseer::BusIdx bus(const gridseer::Case& c, int id) { return *c.network.find_bus(id); }

inline gridseer::LineIdx line(const gridseer::Case& c, int a, int b) {
  return *c.network.find_line(bus(c, a), bus(c, b));
}

inline std::vector<gridseer::MeterIdx> ids(const gridseer::Case& c,
                                           std::initializer_list<const char*> names) {
  std::vector<gridseer::MeterIdx> out;
  for (const char* n : names) out.push_back(c.require_meter(n));
  return out;
}

// Path 1-2-3 with a flow meter on (1,2) only.
inline const char* kThreeBus = R"({
  "buses": [{"id": 1, "reference": true}, {"id": 2}, {"id": 3}],
  "lines": [{"from": 1, "to": 2, "x": 0.5}, {"from": 2, "to": 3, "x": 0.25}],
  "meters": [{"id": "f12", "kind": "flow", "line": [1, 2]}]
})";

}  // namespace fixtures
