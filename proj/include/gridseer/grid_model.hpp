#pragma once

// Power network, meter placements, case-file parsing, measured subgraphs and
// the DC measurement Jacobian.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gridseer/core.hpp"

namespace gridseer {

struct Bus {
  int id = 0;
  bool is_reference = false;
};

// Endpoints are stored in canonical orientation: from < to.
struct Line {
  BusIdx from = 0;
  BusIdx to = 0;
  double reactance = 0.0;
};

enum class MeterKind { kFlow, kInjection };

struct Meter {
  std::string id;
  MeterKind kind = MeterKind::kFlow;
  // Line index for flow meters, bus index for injection meters.
  std::size_t location = 0;
  double cost = 1.0;
  bool secured = false;
};

class PowerNetwork {
 public:
  PowerNetwork() = default;

  // `buses` must be sorted by id with exactly one reference; `lines` must be
  // canonical, deduplicated and sorted. Use build_case() for raw input.
  PowerNetwork(std::vector<Bus> buses, std::vector<Line> lines)
      : buses_(std::move(buses)), lines_(std::move(lines)) {
    incident_.assign(buses_.size(), {});
    for (LineIdx l = 0; l < lines_.size(); ++l) {
      incident_[lines_[l].from].push_back(l);
      incident_[lines_[l].to].push_back(l);
    }
    column_of_.assign(buses_.size(), kNoColumn);
    for (BusIdx b = 0; b < buses_.size(); ++b) {
      if (buses_[b].is_reference) {
        reference_ = b;
      } else {
        column_of_[b] = bus_of_column_.size();
        bus_of_column_.push_back(b);
      }
    }
  }

  std::size_t bus_count() const { return buses_.size(); }
  std::size_t line_count() const { return lines_.size(); }
  // Number of state variables (non-reference buses).
  std::size_t state_count() const { return bus_of_column_.size(); }

  BusIdx reference() const { return reference_; }
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  const Bus& bus(BusIdx b) const { return buses_.at(b); }
  const Line& line(LineIdx l) const { return lines_.at(l); }
  int bus_id(BusIdx b) const { return buses_.at(b).id; }

  const std::vector<LineIdx>& incident(BusIdx b) const {
    return incident_.at(b);
  }

  BusIdx other_end(LineIdx l, BusIdx b) const {
    const Line& ln = lines_.at(l);
    return ln.from == b ? ln.to : ln.from;
  }

  std::optional<BusIdx> find_bus(int id) const {
    auto it = std::lower_bound(
        buses_.begin(), buses_.end(), id,
        [](const Bus& bus, int value) { return bus.id < value; });
    if (it == buses_.end() || it->id != id) return std::nullopt;
    return static_cast<BusIdx>(it - buses_.begin());
  }

  std::optional<LineIdx> find_line(BusIdx a, BusIdx b) const {
    if (a > b) std::swap(a, b);
    for (LineIdx l : incident_.at(a)) {
      if (lines_[l].from == a && lines_[l].to == b) return l;
    }
    return std::nullopt;
  }

  // Jacobian column of a bus, or nullopt for the reference bus.
  std::optional<std::size_t> column(BusIdx b) const {
    if (column_of_.at(b) == kNoColumn) return std::nullopt;
    return column_of_[b];
  }
  BusIdx column_bus(std::size_t col) const { return bus_of_column_.at(col); }

  std::string line_label(LineIdx l) const {
    const Line& ln = lines_.at(l);
    return "(" + std::to_string(bus_id(ln.from)) + "," +
           std::to_string(bus_id(ln.to)) + ")";
  }

 private:
  static constexpr std::size_t kNoColumn = static_cast<std::size_t>(-1);

  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::vector<std::vector<LineIdx>> incident_;
  std::vector<std::size_t> column_of_;
  std::vector<BusIdx> bus_of_column_;
  BusIdx reference_ = 0;
};

// A validated network with its meter set. Immutable after construction.
struct Case {
  PowerNetwork network;
  std::vector<Meter> meters;
  std::string description;

  std::size_t meter_count() const { return meters.size(); }

  std::optional<MeterIdx> find_meter(std::string_view id) const {
    for (MeterIdx i = 0; i < meters.size(); ++i) {
      if (meters[i].id == id) return i;
    }
    return std::nullopt;
  }

  MeterIdx require_meter(std::string_view id) const {
    auto found = find_meter(id);
    if (!found) {
      fail(ErrorKind::kInvalidInput, "unknown meter id '" + std::string(id) + "'");
    }
    return *found;
  }

  std::vector<MeterIdx> all_meters() const {
    std::vector<MeterIdx> out(meters.size());
    for (MeterIdx i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
};

// Buses a meter measures: a flow meter sees both ends of its line, an
// injection meter sees its own bus and every neighbor. Sorted.
inline std::vector<BusIdx> measured_buses(const PowerNetwork& net,
                                          const Meter& meter) {
  std::vector<BusIdx> out;
  if (meter.kind == MeterKind::kFlow) {
    const Line& ln = net.line(meter.location);
    out = {ln.from, ln.to};
  } else {
    out.push_back(meter.location);
    for (LineIdx l : net.incident(meter.location)) {
      out.push_back(net.other_end(l, meter.location));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

// Lines a meter measures. Sorted.
inline std::vector<LineIdx> measured_lines(const PowerNetwork& net,
                                           const Meter& meter) {
  if (meter.kind == MeterKind::kFlow) return {meter.location};
  std::vector<LineIdx> out = net.incident(meter.location);
  std::sort(out.begin(), out.end());
  return out;
}

inline bool measures_line(const PowerNetwork& net, const Meter& meter,
                          LineIdx l) {
  if (meter.kind == MeterKind::kFlow) return meter.location == l;
  const Line& ln = net.line(l);
  return ln.from == meter.location || ln.to == meter.location;
}

// Two meters of the same kind at the same location take the same
// measurement; for tree mappings they count as one meter.
inline bool same_measurement(const Meter& a, const Meter& b) {
  return a.kind == b.kind && a.location == b.location;
}

// ---------------------------------------------------------------------------
// Raw input and validation
// ---------------------------------------------------------------------------

struct RawBus {
  int id = 0;
  bool reference = false;
};

struct RawLine {
  int from = 0;
  int to = 0;
  double reactance = 0.0;
};

struct RawMeter {
  std::string id;
  std::string kind;  // "flow", "injection" (anything else is rejected)
  int from = 0, to = 0;  // flow meters
  int bus = 0;           // injection meters
  double cost = 1.0;
  bool secured = false;
};

struct RawCase {
  std::vector<RawBus> buses;
  std::vector<RawLine> lines;
  std::vector<RawMeter> meters;
  std::optional<int> reference;  // overrides per-bus flags when set
  std::string description;
};

namespace detail {

inline std::vector<BusIdx> unreachable_from(const PowerNetwork& net,
                                            BusIdx start) {
  std::vector<bool> seen(net.bus_count(), false);
  std::queue<BusIdx> queue;
  queue.push(start);
  seen[start] = true;
  while (!queue.empty()) {
    BusIdx b = queue.front();
    queue.pop();
    for (LineIdx l : net.incident(b)) {
      BusIdx k = net.other_end(l, b);
      if (!seen[k]) {
        seen[k] = true;
        queue.push(k);
      }
    }
  }
  std::vector<BusIdx> out;
  for (BusIdx b = 0; b < seen.size(); ++b) {
    if (!seen[b]) out.push_back(b);
  }
  return out;
}

}  // namespace detail

// Validates raw records and builds the canonical case: buses sorted by id,
// parallel lines merged into one equivalent reactance, endpoints oriented
// from the lower to the higher bus.
inline Case build_case(const RawCase& raw) {
  if (raw.buses.size() < 2) {
    fail(ErrorKind::kInvalidInput, "a network needs at least two buses");
  }
  std::vector<Bus> buses;
  buses.reserve(raw.buses.size());
  for (const RawBus& rb : raw.buses) buses.push_back({rb.id, rb.reference});
  std::sort(buses.begin(), buses.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < buses.size(); ++i) {
    if (buses[i].id == buses[i - 1].id) {
      fail(ErrorKind::kInvalidInput,
           "duplicate bus id " + std::to_string(buses[i].id));
    }
  }
  if (raw.reference) {
    bool found = false;
    for (Bus& b : buses) {
      b.is_reference = (b.id == *raw.reference);
      found = found || b.is_reference;
    }
    if (!found) {
      fail(ErrorKind::kInvalidInput,
           "unknown reference bus " + std::to_string(*raw.reference));
    }
  }
  auto ref_count = std::count_if(buses.begin(), buses.end(),
                                 [](const Bus& b) { return b.is_reference; });
  if (ref_count > 1) {
    fail(ErrorKind::kInvalidInput, "more than one reference bus");
  }
  if (ref_count == 0) buses.front().is_reference = true;

  auto index_of = [&](int id, const std::string& what) -> BusIdx {
    auto it = std::lower_bound(
        buses.begin(), buses.end(), id,
        [](const Bus& bus, int value) { return bus.id < value; });
    if (it == buses.end() || it->id != id) {
      fail(ErrorKind::kInvalidInput,
           "unknown bus " + std::to_string(id) + " referenced by " + what);
    }
    return static_cast<BusIdx>(it - buses.begin());
  };

  // Parallel lines combine as parallel reactances: 1/x = sum 1/x_k.
  std::map<std::pair<BusIdx, BusIdx>, double> susceptance;
  for (const RawLine& rl : raw.lines) {
    std::string label =
        "line (" + std::to_string(rl.from) + "," + std::to_string(rl.to) + ")";
    BusIdx a = index_of(rl.from, label);
    BusIdx b = index_of(rl.to, label);
    if (a == b) fail(ErrorKind::kInvalidInput, label + " is a self-loop");
    if (!(rl.reactance > 0.0) || !std::isfinite(rl.reactance)) {
      fail(ErrorKind::kInvalidInput, "zero/negative reactance on " + label);
    }
    susceptance[{std::min(a, b), std::max(a, b)}] += 1.0 / rl.reactance;
  }
  std::vector<Line> lines;
  lines.reserve(susceptance.size());
  for (const auto& [ends, y] : susceptance) {
    lines.push_back({ends.first, ends.second, 1.0 / y});
  }

  Case out;
  out.network = PowerNetwork(buses, std::move(lines));
  out.description = raw.description;
  const PowerNetwork& net = out.network;

  if (auto lost = detail::unreachable_from(net, net.reference()); !lost.empty()) {
    nlohmann::json ids = nlohmann::json::array();
    std::string list;
    for (BusIdx b : lost) {
      ids.push_back(net.bus_id(b));
      list += (list.empty() ? "" : ",") + std::to_string(net.bus_id(b));
    }
    fail(ErrorKind::kInvalidInput,
         "disconnected network: buses {" + list + "} unreachable from reference",
         {{"unreachable_buses", ids}});
  }

  for (const RawMeter& rm : raw.meters) {
    if (rm.id.empty()) fail(ErrorKind::kInvalidInput, "meter without id");
    if (out.find_meter(rm.id)) {
      fail(ErrorKind::kInvalidInput, "duplicate meter id '" + rm.id + "'");
    }
    std::string kind = rm.kind;
    std::transform(kind.begin(), kind.end(), kind.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    Meter m;
    m.id = rm.id;
    if (kind == "pmu") {
      fail(ErrorKind::kInvalidInput,
           "unsupported meter kind: PMU - out of scope (meter '" + rm.id + "')");
    } else if (kind == "flow") {
      m.kind = MeterKind::kFlow;
      std::string what = "meter '" + rm.id + "'";
      BusIdx a = index_of(rm.from, what);
      BusIdx b = index_of(rm.to, what);
      auto l = net.find_line(a, b);
      if (!l) {
        fail(ErrorKind::kInvalidInput,
             "unknown line (" + std::to_string(rm.from) + "," +
                 std::to_string(rm.to) + ") referenced by " + what);
      }
      m.location = *l;
    } else if (kind == "injection") {
      m.kind = MeterKind::kInjection;
      m.location = index_of(rm.bus, "meter '" + rm.id + "'");
    } else {
      fail(ErrorKind::kInvalidInput,
           "unsupported meter kind: " + rm.kind + " (meter '" + rm.id + "')");
    }
    if (!(rm.cost >= 0.0) || !std::isfinite(rm.cost)) {
      fail(ErrorKind::kInvalidInput, "negative cost on meter '" + rm.id + "'");
    }
    m.cost = rm.cost;
    m.secured = rm.secured;
    out.meters.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Native JSON format
// ---------------------------------------------------------------------------

namespace detail {

inline std::string position_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline nlohmann::json parse_json_text(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is one past the offending character.
    std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    fail(ErrorKind::kInvalidInput,
         "syntax error at " + position_of(text, at) + ": " + e.what());
  }
}

template <class T>
T field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(ErrorKind::kInvalidInput,
         std::string("missing field '") + key + "' in " + where);
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::kInvalidInput,
         std::string("field '") + key + "' has the wrong type in " + where);
  }
}

template <class T>
T field_or(const nlohmann::json& obj, const char* key, T fallback,
           const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return field<T>(obj, key, where);
}

inline void read_meters(const nlohmann::json& doc, RawCase& raw) {
  if (!doc.contains("meters")) return;
  if (!doc["meters"].is_array()) {
    fail(ErrorKind::kInvalidInput, "'meters' must be an array");
  }
  std::size_t k = 0;
  for (const auto& jm : doc["meters"]) {
    std::string where = "meters[" + std::to_string(k++) + "]";
    RawMeter rm;
    rm.id = field<std::string>(jm, "id", where);
    rm.kind = field<std::string>(jm, "kind", where);
    if (rm.kind == "flow") {
      auto ends = field<std::vector<int>>(jm, "line", where);
      if (ends.size() != 2) {
        fail(ErrorKind::kInvalidInput, "'line' must be [from, to] in " + where);
      }
      rm.from = ends[0];
      rm.to = ends[1];
    } else if (rm.kind == "injection") {
      rm.bus = field<int>(jm, "bus", where);
    }
    rm.cost = field_or<double>(jm, "cost", 1.0, where);
    rm.secured = field_or<bool>(jm, "secured", false, where);
    raw.meters.push_back(std::move(rm));
  }
}

}  // namespace detail

inline RawCase read_native_raw(std::string_view text) {
  nlohmann::json doc = detail::parse_json_text(text);
  if (!doc.is_object()) {
    fail(ErrorKind::kInvalidInput, "case document must be a JSON object");
  }
  RawCase raw;
  raw.description = detail::field_or<std::string>(doc, "description", "", "case");
  if (doc.contains("reference")) {
    raw.reference = detail::field<int>(doc, "reference", "case");
  }
  if (!doc.contains("buses") || !doc["buses"].is_array()) {
    fail(ErrorKind::kInvalidInput, "missing 'buses' array");
  }
  std::size_t k = 0;
  for (const auto& jb : doc["buses"]) {
    std::string where = "buses[" + std::to_string(k++) + "]";
    raw.buses.push_back({detail::field<int>(jb, "id", where),
                         detail::field_or<bool>(jb, "reference", false, where)});
  }
  if (!doc.contains("lines") || !doc["lines"].is_array()) {
    fail(ErrorKind::kInvalidInput, "missing 'lines' array");
  }
  k = 0;
  for (const auto& jl : doc["lines"]) {
    std::string where = "lines[" + std::to_string(k++) + "]";
    raw.lines.push_back({detail::field<int>(jl, "from", where),
                         detail::field<int>(jl, "to", where),
                         detail::field<double>(jl, "x", where)});
  }
  detail::read_meters(doc, raw);
  return raw;
}

inline Case parse_native(std::string_view text) {
  return build_case(read_native_raw(text));
}

inline nlohmann::json meter_to_json(const PowerNetwork& net, const Meter& m) {
  nlohmann::json jm;
  jm["id"] = m.id;
  if (m.kind == MeterKind::kFlow) {
    const Line& ln = net.line(m.location);
    jm["kind"] = "flow";
    jm["line"] = {net.bus_id(ln.from), net.bus_id(ln.to)};
  } else {
    jm["kind"] = "injection";
    jm["bus"] = net.bus_id(m.location);
  }
  jm["cost"] = m.cost;
  jm["secured"] = m.secured;
  return jm;
}

inline nlohmann::json to_native_json(const Case& c) {
  const PowerNetwork& net = c.network;
  nlohmann::json doc;
  if (!c.description.empty()) doc["description"] = c.description;
  doc["buses"] = nlohmann::json::array();
  for (const Bus& b : net.buses()) {
    doc["buses"].push_back({{"id", b.id}, {"reference", b.is_reference}});
  }
  doc["lines"] = nlohmann::json::array();
  for (const Line& ln : net.lines()) {
    doc["lines"].push_back({{"from", net.bus_id(ln.from)},
                            {"to", net.bus_id(ln.to)},
                            {"x", ln.reactance}});
  }
  doc["meters"] = nlohmann::json::array();
  for (const Meter& m : c.meters) doc["meters"].push_back(meter_to_json(net, m));
  return doc;
}

// ---------------------------------------------------------------------------
// MATPOWER subset: `mpc.bus` column 1 and `mpc.branch` columns 1, 2, 4, 11.
// Meters (and optionally "reference") come from a native-format sidecar.
// ---------------------------------------------------------------------------

namespace detail {

struct MatrixBlock {
  std::vector<std::vector<double>> rows;
};

// Parses the body of `mpc.<name> = [ ... ];`.
inline std::optional<MatrixBlock> read_matpower_matrix(std::string_view text,
                                                       std::string_view name) {
  std::string key = "mpc." + std::string(name);
  std::size_t pos = 0;
  while (true) {
    pos = text.find(key, pos);
    if (pos == std::string_view::npos) return std::nullopt;
    std::size_t after = pos + key.size();
    // Reject prefixes like mpc.bus_name.
    if (after < text.size() && (std::isalnum(static_cast<unsigned char>(text[after])) ||
                                text[after] == '_')) {
      pos = after;
      continue;
    }
    // Skip occurrences inside comments.
    std::size_t line_start = text.rfind('\n', pos);
    line_start = line_start == std::string_view::npos ? 0 : line_start + 1;
    if (text.substr(line_start, pos - line_start).find('%') != std::string_view::npos) {
      pos = after;
      continue;
    }
    pos = after;
    break;
  }
  std::size_t i = pos;
  auto skip_blank = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  skip_blank();
  if (i >= text.size() || text[i] != '=') {
    fail(ErrorKind::kInvalidInput,
         "syntax error at " + position_of(text, i) + ": expected '=' after " + key);
  }
  ++i;
  skip_blank();
  if (i >= text.size() || text[i] != '[') {
    fail(ErrorKind::kInvalidInput,
         "syntax error at " + position_of(text, i) + ": expected '[' after " + key + " =");
  }
  ++i;
  MatrixBlock block;
  std::vector<double> row;
  auto end_row = [&] {
    if (!row.empty()) block.rows.push_back(std::move(row));
    row.clear();
  };
  while (true) {
    if (i >= text.size()) {
      fail(ErrorKind::kInvalidInput,
           "syntax error at " + position_of(text, i) + ": unterminated matrix " + key);
    }
    char ch = text[i];
    if (ch == ']') {
      end_row();
      ++i;
      break;
    }
    if (ch == '%') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (ch == ';' || ch == '\n') {
      end_row();
      ++i;
      continue;
    }
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == ',') {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
           text[i] != ';' && text[i] != ',' && text[i] != ']' && text[i] != '%') {
      ++i;
    }
    std::string token(text.substr(start, i - start));
    char* end = nullptr;
    double value = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
      fail(ErrorKind::kInvalidInput, "syntax error at " + position_of(text, start) +
                                         ": bad number '" + token + "' in " + key);
    }
    row.push_back(value);
  }
  return block;
}

inline int as_bus_id(double value, const std::string& where) {
  if (value != std::floor(value)) {
    fail(ErrorKind::kInvalidInput, "non-integer bus id in " + where);
  }
  return static_cast<int>(value);
}

}  // namespace detail

inline Case parse_matpower(std::string_view text, std::string_view sidecar) {
  RawCase raw;
  auto bus = detail::read_matpower_matrix(text, "bus");
  auto branch = detail::read_matpower_matrix(text, "branch");
  if (!bus) fail(ErrorKind::kInvalidInput, "missing mpc.bus matrix");
  if (!branch) fail(ErrorKind::kInvalidInput, "missing mpc.branch matrix");
  for (std::size_t r = 0; r < bus->rows.size(); ++r) {
    raw.buses.push_back(
        {detail::as_bus_id(bus->rows[r][0], "mpc.bus row " + std::to_string(r + 1)),
         false});
  }
  for (std::size_t r = 0; r < branch->rows.size(); ++r) {
    const auto& row = branch->rows[r];
    std::string where = "mpc.branch row " + std::to_string(r + 1);
    if (row.size() < 4) {
      fail(ErrorKind::kInvalidInput, where + " has fewer than 4 columns");
    }
    // Column 11 is the in-service flag; out-of-service branches are dropped.
    if (row.size() >= 11 && row[10] == 0.0) continue;
    raw.lines.push_back({detail::as_bus_id(row[0], where),
                         detail::as_bus_id(row[1], where), row[3]});
  }
  if (!sidecar.empty()) {
    nlohmann::json doc = detail::parse_json_text(sidecar);
    if (doc.contains("reference")) {
      raw.reference = detail::field<int>(doc, "reference", "meter config");
    }
    raw.description =
        detail::field_or<std::string>(doc, "description", "", "meter config");
    detail::read_meters(doc, raw);
  }
  return build_case(raw);
}

enum class CaseFormat { kNativeJson, kMatpower };

inline Case parse_case(std::string_view source, CaseFormat format,
                       std::string_view meter_config = {}) {
  if (format == CaseFormat::kMatpower) return parse_matpower(source, meter_config);
  if (meter_config.empty()) return parse_native(source);
  // A native case with a separate meter file: meters come from the sidecar.
  RawCase raw = read_native_raw(source);
  nlohmann::json side = detail::parse_json_text(meter_config);
  raw.meters.clear();
  if (side.contains("reference")) {
    raw.reference = detail::field<int>(side, "reference", "meter config");
  }
  detail::read_meters(side, raw);
  return build_case(raw);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kInvalidInput, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline CaseFormat format_for_path(const std::string& path) {
  return path.size() >= 2 && path.substr(path.size() - 2) == ".m"
             ? CaseFormat::kMatpower
             : CaseFormat::kNativeJson;
}

inline Case load_case(const std::string& case_path,
                      const std::string& meter_path = {}) {
  std::string text = read_file(case_path);
  std::string meters = meter_path.empty() ? std::string() : read_file(meter_path);
  return parse_case(text, format_for_path(case_path), meters);
}

// ---------------------------------------------------------------------------
// Measured subgraph
// ---------------------------------------------------------------------------

struct MeasuredSubgraph {
  std::vector<BusIdx> vertices;
  std::vector<LineIdx> edges;
  std::vector<MeterIdx> meters;

  bool contains_vertex(BusIdx b) const {
    return std::binary_search(vertices.begin(), vertices.end(), b);
  }
  bool contains_edge(LineIdx l) const {
    return std::binary_search(edges.begin(), edges.end(), l);
  }
};

inline std::vector<MeterIdx> canonical_meters(const Case& c,
                                              std::span<const MeterIdx> meters) {
  std::vector<MeterIdx> out(meters.begin(), meters.end());
  for (MeterIdx m : out) {
    if (m >= c.meter_count()) {
      fail(ErrorKind::kInvalidInput, "unknown meter index " + std::to_string(m));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline MeasuredSubgraph measured_subgraph(const Case& c,
                                          std::span<const MeterIdx> meters) {
  MeasuredSubgraph g;
  g.meters = canonical_meters(c, meters);
  std::vector<bool> in_v(c.network.bus_count(), false);
  std::vector<bool> in_e(c.network.line_count(), false);
  for (MeterIdx m : g.meters) {
    for (BusIdx b : measured_buses(c.network, c.meters[m])) in_v[b] = true;
    for (LineIdx l : measured_lines(c.network, c.meters[m])) in_e[l] = true;
  }
  for (BusIdx b = 0; b < in_v.size(); ++b) {
    if (in_v[b]) g.vertices.push_back(b);
  }
  for (LineIdx l = 0; l < in_e.size(); ++l) {
    if (in_e[l]) g.edges.push_back(l);
  }
  return g;
}

inline std::vector<MeterIdx> meters_by_id(const Case& c,
                                          std::span<const std::string> ids) {
  std::vector<MeterIdx> out;
  for (const auto& id : ids) out.push_back(c.require_meter(id));
  return canonical_meters(c, out);
}

// ---------------------------------------------------------------------------
// DC measurement Jacobian
// ---------------------------------------------------------------------------

struct JacobianMatrix {
  Eigen::MatrixXd values;        // rows x cols
  std::vector<MeterIdx> rows;    // meter of each row, canonical order
  std::vector<BusIdx> columns;   // bus of each column (non-reference buses)

  std::size_t row_count() const { return rows.size(); }
  std::size_t col_count() const { return columns.size(); }
};

// Adds the oriented flow row of line `l`, measured leaving bus `from_bus`,
// scaled by `sign`, into `row`.
inline void add_flow_row(const PowerNetwork& net, LineIdx l, BusIdx from_bus,
                         double sign, Eigen::Ref<Eigen::RowVectorXd> row) {
  const Line& ln = net.line(l);
  BusIdx to_bus = net.other_end(l, from_bus);
  double y = 1.0 / ln.reactance;
  if (auto col = net.column(from_bus)) row(*col) += sign * y;
  if (auto col = net.column(to_bus)) row(*col) -= sign * y;
}

inline Eigen::RowVectorXd meter_row(const PowerNetwork& net, const Meter& m) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(
      static_cast<Eigen::Index>(net.state_count()));
  if (m.kind == MeterKind::kFlow) {
    add_flow_row(net, m.location, net.line(m.location).from, 1.0, row);
  } else {
    for (LineIdx l : net.incident(m.location)) {
      add_flow_row(net, l, m.location, 1.0, row);
    }
  }
  return row;
}

inline JacobianMatrix build_jacobian(const Case& c,
                                     std::span<const MeterIdx> meters) {
  JacobianMatrix h;
  h.rows = canonical_meters(c, meters);
  const std::size_t n = c.network.state_count();
  for (std::size_t col = 0; col < n; ++col) {
    h.columns.push_back(c.network.column_bus(col));
  }
  h.values.resize(static_cast<Eigen::Index>(h.rows.size()),
                  static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < h.rows.size(); ++r) {
    h.values.row(static_cast<Eigen::Index>(r)) =
        meter_row(c.network, c.meters[h.rows[r]]);
  }
  return h;
}

inline JacobianMatrix build_jacobian(const Case& c) {
  auto all = c.all_meters();
  return build_jacobian(c, all);
}

}  // namespace gridseer
